#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "belle/gateway.hpp"
#include "belle/operators.hpp"
#include "belle/types.hpp"

namespace belle::cli {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct BackendSpec {
    std::string kind = "mock";  // mock | http
    std::string base_url;
    std::string model;
    std::string script_path;
    std::string api_key_env = "BELLE_API_KEY";
};

struct RunConfig {
    BackendSpec backend;
    std::string classifier_config;   // path; defaults to the shipped fixture
    DebateConfig debate;             // operator_pool filled from operator_pool_path
    ops::OperatorBudget budget;
    std::string corpus_path;
    std::string index_path;
    std::string out_dir = "runs";
    int concurrency = 2;
    bool compute_acc = false;
    std::string fixtures_dir;        // BELLE_FIXTURES_DIR or the compiled default
    std::string templates_dir;       // <fixtures>/templates
    std::string operator_pool_path;  // <fixtures>/operator_pool.json
    std::string demos_path;          // <fixtures>/demos.json

    void validate() const;

    static std::string default_fixtures_dir();
    static RunConfig defaults();
    static RunConfig from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir = {});
    /// Loads a JSON config; ${NAME} sequences are replaced with the value of
    /// the environment variable NAME (empty when unset), and relative paths
    /// are resolved against the config file's directory.
    static RunConfig load(const std::filesystem::path& path);
};

std::string interpolate_env(const std::string& text);

std::shared_ptr<llm::Backend> make_backend(const BackendSpec& spec);

}  // namespace belle::cli
