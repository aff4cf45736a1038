#include "belle/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace belle::classify {
namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

void ClassifierConfig::validate() const {
    if (label_set.empty()) throw ClassifierError("label set is empty");
    for (const auto& label : label_set) {
        if (!type_descriptions.count(label))
            throw ClassifierError("no description for label '" + label + "'");
        if (strategy == ClassifierStrategy::ICL) {
            const bool has_demo = std::any_of(
                demonstrations.begin(), demonstrations.end(),
                [&](const auto& d) { return d.second == label; });
            if (!has_demo)
                throw ClassifierError("ICL mode needs a demonstration for label '" + label + "'");
        }
    }
}

ClassifierConfig ClassifierConfig::from_json(const nlohmann::json& j) {
    ClassifierConfig cfg;
    const auto strategy = j.value("strategy", std::string{"ICL"});
    if (strategy == "ICL")
        cfg.strategy = ClassifierStrategy::ICL;
    else if (strategy == "ZeroShot")
        cfg.strategy = ClassifierStrategy::ZeroShot;
    else
        throw ClassifierError("unknown strategy '" + strategy + "'");
    cfg.label_set = j.at("label_set").get<std::vector<std::string>>();
    for (const auto& [label, desc] : j.at("type_descriptions").items())
        cfg.type_descriptions[label] = desc.get<std::string>();
    if (j.contains("demonstrations"))
        for (const auto& d : j.at("demonstrations"))
            cfg.demonstrations.emplace_back(d.at("question").get<std::string>(),
                                            d.at("label").get<std::string>());
    cfg.temperature = j.value("temperature", 0.0);
    cfg.validate();
    return cfg;
}

ClassifierConfig ClassifierConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ClassifierError("cannot open classifier config: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ClassifierError("bad classifier config " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

std::vector<llm::ChatMessage> build_classification_prompt(const Question& q,
                                                          const ClassifierConfig& cfg) {
    cfg.validate();

    std::ostringstream system;
    system << "As an assistant, you classify a multi-hop question into exactly one of the "
              "following question types: ";
    for (std::size_t i = 0; i < cfg.label_set.size(); ++i) {
        if (i) system << ", ";
        system << "'" << cfg.label_set[i] << "'";
    }
    system << ".\n";
    for (const auto& label : cfg.label_set)
        system << label << ": " << cfg.type_descriptions.at(label) << "\n";
    system << "Answer in the form {\"type\": \"<label>\"} with exactly one label.";

    std::vector<llm::ChatMessage> messages;
    messages.push_back({llm::MessageRole::System, system.str()});

    std::ostringstream user;
    if (cfg.strategy == ClassifierStrategy::ICL) {
        // One demonstration per label, in label-set order.
        int example_no = 1;
        for (const auto& label : cfg.label_set) {
            const auto demo = std::find_if(cfg.demonstrations.begin(), cfg.demonstrations.end(),
                                           [&](const auto& d) { return d.second == label; });
            user << "Example " << example_no++ << ": " << demo->first << " (Output: " << label
                 << ")\n";
        }
        user << "\n";
    }
    user << "Question: " << q.text << "\nOutput exactly one type label.";
    messages.push_back({llm::MessageRole::User, user.str()});
    return messages;
}

QuestionType parse_type_label(const std::string& raw, const std::vector<std::string>& label_set) {
    const std::string haystack = lowercase(raw);
    std::size_t best_pos = std::string::npos;
    std::size_t best_len = 0;
    const std::string* best = nullptr;
    for (const auto& label : label_set) {
        const auto pos = haystack.find(lowercase(label));
        if (pos == std::string::npos) continue;
        if (pos < best_pos || (pos == best_pos && label.size() > best_len)) {
            best_pos = pos;
            best_len = label.size();
            best = &label;
        }
    }
    if (!best) throw UnrecognizedLabel("no label-set member found in: " + raw);
    return QuestionType{*best};
}

QuestionType classify(const Question& q, const ClassifierConfig& cfg, llm::Gateway& gateway,
                      TokenUsage* usage_out) {
    llm::CompletionRequest request;
    request.messages = build_classification_prompt(q, cfg);
    request.temperature = cfg.temperature;
    request.max_output_tokens = 32;
    request.tag = "classifier";

    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto response = gateway.complete(request);
        if (usage_out) *usage_out += response.usage;
        try {
            return parse_type_label(response.content, cfg.label_set);
        } catch (const UnrecognizedLabel&) {
            request.messages.push_back({llm::MessageRole::Assistant, response.content});
            request.messages.push_back(
                {llm::MessageRole::User,
                 "That was not a valid type label. Reply with exactly one of the listed labels, "
                 "formatted as {\"type\": \"<label>\"}."});
        }
    }

    // Fallback bucket for questions the classifier cannot resolve.
    for (const auto& label : cfg.label_set)
        if (lowercase(label) == "null") return QuestionType{label};
    return QuestionType{cfg.label_set.back()};
}

}  // namespace belle::classify
