#include "belle/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "belle/http_backend.hpp"
#include "belle/mock_backend.hpp"

namespace belle::cli {
namespace {

std::string resolve(const std::filesystem::path& base, const std::string& path) {
    if (path.empty() || base.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (base / p).lexically_normal().string();
}

}  // namespace

std::string interpolate_env(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '$' && i + 1 < text.size() && text[i + 1] == '{') {
            const auto close = text.find('}', i + 2);
            if (close != std::string::npos) {
                const std::string name = text.substr(i + 2, close - i - 2);
                if (const char* value = std::getenv(name.c_str())) out += value;
                i = close + 1;
                continue;
            }
        }
        out.push_back(text[i++]);
    }
    return out;
}

std::string RunConfig::default_fixtures_dir() {
    if (const char* env = std::getenv("BELLE_FIXTURES_DIR")) return env;
#ifdef BELLE_DEFAULT_FIXTURES_DIR
    return BELLE_DEFAULT_FIXTURES_DIR;
#else
    return "fixtures";
#endif
}

RunConfig RunConfig::defaults() {
    RunConfig cfg;
    cfg.fixtures_dir = default_fixtures_dir();
    cfg.templates_dir = cfg.fixtures_dir + "/templates";
    cfg.operator_pool_path = cfg.fixtures_dir + "/operator_pool.json";
    cfg.demos_path = cfg.fixtures_dir + "/demos.json";
    cfg.classifier_config = cfg.fixtures_dir + "/classifier_default.json";
    return cfg;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    RunConfig cfg = defaults();
    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        cfg.backend.kind = b.value("kind", cfg.backend.kind);
        cfg.backend.base_url = b.value("base_url", std::string{});
        cfg.backend.model = b.value("model", std::string{});
        cfg.backend.script_path = resolve(base_dir, b.value("script_path", std::string{}));
        cfg.backend.api_key_env = b.value("api_key_env", cfg.backend.api_key_env);
    }
    if (j.contains("fixtures_dir")) {
        cfg.fixtures_dir = resolve(base_dir, j.at("fixtures_dir").get<std::string>());
        cfg.templates_dir = cfg.fixtures_dir + "/templates";
        cfg.operator_pool_path = cfg.fixtures_dir + "/operator_pool.json";
        cfg.demos_path = cfg.fixtures_dir + "/demos.json";
        cfg.classifier_config = cfg.fixtures_dir + "/classifier_default.json";
    }
    if (j.contains("classifier_config"))
        cfg.classifier_config = resolve(base_dir, j.at("classifier_config").get<std::string>());
    if (j.contains("templates_dir"))
        cfg.templates_dir = resolve(base_dir, j.at("templates_dir").get<std::string>());
    if (j.contains("operator_pool_path"))
        cfg.operator_pool_path = resolve(base_dir, j.at("operator_pool_path").get<std::string>());
    if (j.contains("demos_path"))
        cfg.demos_path = resolve(base_dir, j.at("demos_path").get<std::string>());
    if (j.contains("debate")) {
        const auto& d = j.at("debate");
        cfg.debate.max_rounds = d.value("max_rounds", cfg.debate.max_rounds);
        cfg.debate.turns_per_side_per_round =
            d.value("turns_per_side_per_round", cfg.debate.turns_per_side_per_round);
        cfg.debate.first_level_debaters =
            d.value("first_level_debaters", cfg.debate.first_level_debaters);
        cfg.debate.second_level_debaters =
            d.value("second_level_debaters", cfg.debate.second_level_debaters);
        if (d.contains("level")) {
            const auto level = debate_level_from_string(d.at("level").get<std::string>());
            if (!level) throw ConfigError("unknown debate level in config");
            cfg.debate.level = *level;
        }
    }
    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        cfg.budget.max_iterations = b.value("max_iterations", cfg.budget.max_iterations);
        cfg.budget.k_docs = b.value("k_docs", cfg.budget.k_docs);
    }
    if (j.contains("corpus_path"))
        cfg.corpus_path = resolve(base_dir, j.at("corpus_path").get<std::string>());
    if (j.contains("index_path"))
        cfg.index_path = resolve(base_dir, j.at("index_path").get<std::string>());
    if (j.contains("out_dir")) cfg.out_dir = resolve(base_dir, j.at("out_dir").get<std::string>());
    cfg.concurrency = j.value("concurrency", cfg.concurrency);
    cfg.compute_acc = j.value("compute_acc", cfg.compute_acc);
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(interpolate_env(buf.str()));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad config " + path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
}

void RunConfig::validate() const {
    if (backend.kind == "mock") {
        if (backend.script_path.empty())
            throw ConfigError("mock backend requires backend.script_path");
    } else if (backend.kind == "http") {
        if (backend.base_url.empty() || backend.model.empty())
            throw ConfigError("http backend requires backend.base_url and backend.model");
    } else {
        throw ConfigError("unknown backend kind '" + backend.kind + "'");
    }
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (budget.max_iterations < 1) throw ConfigError("budget.max_iterations must be >= 1");
    if (debate.max_rounds < 1) throw ConfigError("debate.max_rounds must be >= 1");
}

std::shared_ptr<llm::Backend> make_backend(const BackendSpec& spec) {
    if (spec.kind == "mock")
        return std::make_shared<llm::MockBackend>(
            llm::MockBackend::from_script_file(spec.script_path));
    if (spec.kind == "http") {
        llm::HttpBackendConfig http;
        http.base_url = spec.base_url;
        http.model = spec.model;
        if (const char* key = std::getenv(spec.api_key_env.c_str())) http.api_key = key;
        return std::make_shared<llm::HttpBackend>(http);
    }
    throw ConfigError("unknown backend kind '" + spec.kind + "'");
}

}  // namespace belle::cli
