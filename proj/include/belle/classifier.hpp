#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "belle/gateway.hpp"
#include "belle/types.hpp"

namespace belle::classify {

enum class ClassifierStrategy { ICL, ZeroShot };

class ClassifierError : public std::runtime_error {
public:
    explicit ClassifierError(const std::string& what) : std::runtime_error(what) {}
};

class UnrecognizedLabel : public std::runtime_error {
public:
    explicit UnrecognizedLabel(const std::string& what) : std::runtime_error(what) {}
};

struct ClassifierConfig {
    ClassifierStrategy strategy = ClassifierStrategy::ICL;
    std::vector<std::pair<std::string, std::string>> demonstrations;  // (question, label)
    std::vector<std::string> label_set;
    std::map<std::string, std::string> type_descriptions;
    double temperature = 0.0;

    /// Throws ClassifierError unless every label has a description and, in
    /// ICL mode, at least one demonstration.
    void validate() const;

    static ClassifierConfig from_json(const nlohmann::json& j);
    static ClassifierConfig load(const std::filesystem::path& path);
};

/// Pure function of (question, config): byte-identical across calls.
std::vector<llm::ChatMessage> build_classification_prompt(const Question& q,
                                                          const ClassifierConfig& cfg);

/// Case-insensitive scan for the earliest label-set member occurring in the
/// raw output (JSON wrappers and punctuation need no stripping; the longest
/// member wins on position ties). Throws UnrecognizedLabel when none occurs.
QuestionType parse_type_label(const std::string& raw, const std::vector<std::string>& label_set);

/// Classifies the question; retries once with a corrective instruction on an
/// unrecognized label and falls back to the Null bucket after that. Always
/// returns a member of the active label set. When `usage_out` is given it
/// receives the summed usage of the classifier calls made.
QuestionType classify(const Question& q, const ClassifierConfig& cfg, llm::Gateway& gateway,
                      TokenUsage* usage_out = nullptr);

}  // namespace belle::classify
