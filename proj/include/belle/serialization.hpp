#pragma once

#include <nlohmann/json.hpp>

#include "belle/types.hpp"

namespace belle {

// Canonical JSON forms use a stable field order so golden-file comparisons
// are byte-exact. JSONL files carry one value per line.
using ojson = nlohmann::ordered_json;

ojson to_json(const TokenUsage& u);
ojson to_json(const Question& q);
ojson to_json(const PlanStep& s);
ojson to_json(const ExecutionPlan& p);
ojson to_json(const Utterance& u);
ojson to_json(const Transcript& t);

TokenUsage token_usage_from_json(const nlohmann::json& j);
Question question_from_json(const nlohmann::json& j);
PlanStep plan_step_from_json(const nlohmann::json& j);
ExecutionPlan execution_plan_from_json(const nlohmann::json& j);
Utterance utterance_from_json(const nlohmann::json& j);
Transcript transcript_from_json(const nlohmann::json& j);

/// Thrown when a JSON document does not match the expected schema.
class SerializationError : public std::runtime_error {
public:
    explicit SerializationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace belle
