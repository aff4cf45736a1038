#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "belle/operators.hpp"
#include "belle/types.hpp"

namespace belle::exec {

/// Result of executing one plan: step outcomes aligned with plan.steps, the
/// composed final answer, and usage reconciling every backend call made.
struct ExecutionTrace {
    std::vector<ops::OperatorOutcome> steps;
    std::string final_answer;
    TokenUsage aggregation_usage;
    TokenUsage total_usage;  // sum of step usages plus aggregation usage
};

/// Runs the plan steps in order. Each step's prompt carries the judge's
/// directive plus the outcomes of its depends_on steps; a step that fails
/// for a non-backend reason is replaced by a degraded closed-book attempt.
/// A final aggregation call composes the answer unless the plan has a single
/// step or the last step already produced a marker-final answer.
ExecutionTrace execute_plan(const ExecutionPlan& plan, const Question& q,
                            const QuestionType& type, const ops::OperatorEnv& env);

/// The degradation policy: a closed-book chain-of-thought substitute,
/// flagged degraded, at the failed step's index.
ops::OperatorOutcome degrade_step(const PlanStep& step, const Question& q,
                                  const ops::OperatorEnv& env);

nlohmann::ordered_json outcome_to_json(const ops::OperatorOutcome& outcome);
ops::OperatorOutcome outcome_from_json(const nlohmann::json& j);
nlohmann::ordered_json trace_to_json(const ExecutionTrace& trace);
ExecutionTrace trace_from_json(const nlohmann::json& j);

}  // namespace belle::exec
