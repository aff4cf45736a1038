#include "belle/serialization.hpp"

namespace belle {
namespace {

template <typename T>
T require(const nlohmann::json& j, const char* key) {
    if (!j.contains(key))
        throw SerializationError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw SerializationError(std::string("bad field '") + key + "': " + e.what());
    }
}

}  // namespace

ojson to_json(const TokenUsage& u) {
    return ojson{{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}};
}

TokenUsage token_usage_from_json(const nlohmann::json& j) {
    TokenUsage u;
    u.prompt_tokens = require<std::int64_t>(j, "prompt_tokens");
    u.completion_tokens = require<std::int64_t>(j, "completion_tokens");
    if (u.prompt_tokens < 0 || u.completion_tokens < 0)
        throw SerializationError("negative token count");
    return u;
}

ojson to_json(const Question& q) {
    ojson j;
    j["id"] = q.id;
    j["question"] = q.text;
    j["answers"] = q.gold_answers;
    if (q.declared_type) j["type"] = q.declared_type->label;
    if (q.hops) j["hops"] = *q.hops;
    return j;
}

Question question_from_json(const nlohmann::json& j) {
    Question q;
    q.id = require<std::string>(j, "id");
    q.text = require<std::string>(j, "question");
    if (j.contains("answers")) q.gold_answers = j.at("answers").get<std::vector<std::string>>();
    if (j.contains("type") && !j.at("type").is_null())
        q.declared_type = QuestionType{j.at("type").get<std::string>()};
    if (j.contains("hops") && !j.at("hops").is_null()) q.hops = j.at("hops").get<int>();
    if (const auto bad = question_violations(q); !bad.empty())
        throw SerializationError("invalid question '" + q.id + "': " + bad.front());
    return q;
}

ojson to_json(const PlanStep& s) {
    return ojson{{"operator", to_string(s.op)},
                 {"directive", s.directive},
                 {"depends_on", s.depends_on}};
}

PlanStep plan_step_from_json(const nlohmann::json& j) {
    PlanStep s;
    const auto name = require<std::string>(j, "operator");
    const auto kind = operator_kind_from_string(name);
    if (!kind) throw SerializationError("unknown operator '" + name + "'");
    s.op = *kind;
    if (j.contains("directive")) s.directive = j.at("directive").get<std::string>();
    if (j.contains("depends_on"))
        s.depends_on = j.at("depends_on").get<std::vector<std::size_t>>();
    return s;
}

ojson to_json(const ExecutionPlan& p) {
    ojson steps = ojson::array();
    for (const auto& s : p.steps) steps.push_back(to_json(s));
    return ojson{{"steps", std::move(steps)},
                 {"source_mode", to_string(p.source_mode)},
                 {"judge_rationale", p.judge_rationale},
                 {"rounds_used", p.rounds_used}};
}

ExecutionPlan execution_plan_from_json(const nlohmann::json& j) {
    ExecutionPlan p;
    if (!j.contains("steps") || !j.at("steps").is_array())
        throw SerializationError("plan missing steps array");
    for (const auto& s : j.at("steps")) p.steps.push_back(plan_step_from_json(s));
    if (j.contains("source_mode")) {
        const auto mode = source_mode_from_string(j.at("source_mode").get<std::string>());
        if (!mode) throw SerializationError("unknown source_mode");
        p.source_mode = *mode;
    }
    if (j.contains("judge_rationale")) p.judge_rationale = j.at("judge_rationale").get<std::string>();
    if (j.contains("rounds_used")) p.rounds_used = j.at("rounds_used").get<int>();
    return p;
}

ojson to_json(const Utterance& u) {
    return ojson{{"round", u.round},
                 {"role", to_string(u.role)},
                 {"content", u.content},
                 {"usage", to_json(u.usage)}};
}

Utterance utterance_from_json(const nlohmann::json& j) {
    Utterance u;
    u.round = require<int>(j, "round");
    const auto role = role_from_string(require<std::string>(j, "role"));
    if (!role) throw SerializationError("unknown role");
    u.role = *role;
    u.content = require<std::string>(j, "content");
    u.usage = token_usage_from_json(j.at("usage"));
    return u;
}

ojson to_json(const Transcript& t) {
    ojson utterances = ojson::array();
    for (const auto& u : t.utterances) utterances.push_back(to_json(u));
    // histories are derivable from the utterance list and rebuilt on load.
    return ojson{{"question_id", t.question_id}, {"utterances", std::move(utterances)}};
}

Transcript transcript_from_json(const nlohmann::json& j) {
    Transcript t;
    t.question_id = require<std::string>(j, "question_id");
    if (!j.contains("utterances") || !j.at("utterances").is_array())
        throw SerializationError("transcript missing utterances array");
    for (const auto& u : j.at("utterances")) t.append(utterance_from_json(u));
    return t;
}

}  // namespace belle
