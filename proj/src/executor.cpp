#include "belle/executor.hpp"

#include <sstream>

#include "belle/retrieval.hpp"
#include "belle/serialization.hpp"

namespace belle::exec {
namespace {

std::string render_dependencies(const ExecutionPlan& plan, const ExecutionTrace& trace,
                                std::size_t step_index) {
    std::ostringstream out;
    for (std::size_t dep : plan.steps[step_index].depends_on) {
        const auto& outcome = trace.steps[dep];
        out << "Result of step " << dep + 1 << " (" << to_string(plan.steps[dep].op)
            << "): " << outcome.answer << "\n";
        if (!outcome.reasoning.empty()) out << outcome.reasoning << "\n";
    }
    return out.str();
}

ops::OperatorOutcome run_step(const PlanStep& step, const Question& q, const QuestionType& type,
                              const ops::OperatorEnv& env) {
    switch (step.op) {
        case OperatorKind::CoT: return ops::run_cot(q, env);
        case OperatorKind::SingleStep: return ops::run_single_step(q, env);
        case OperatorKind::IterativeStep: return ops::run_iterative_step(q, env);
        case OperatorKind::SubStep:
            return ops::run_sub_step(
                q, env, env.retriever ? ops::LeafMode::SingleStep : ops::LeafMode::ClosedBook);
        case OperatorKind::AdaptiveStep: return ops::run_adaptive_step(q, type, env);
    }
    return ops::run_cot(q, env);
}

}  // namespace

ops::OperatorOutcome degrade_step(const PlanStep& step, const Question& q,
                                  const ops::OperatorEnv& env) {
    ops::OperatorEnv cot_env = env;
    cot_env.step_context = "The planned " + to_string(step.op) +
                           " step could not run; answer from your own knowledge instead.\n" +
                           env.step_context;
    auto outcome = ops::run_cot(q, cot_env);
    outcome.degraded = true;
    return outcome;
}

ExecutionTrace execute_plan(const ExecutionPlan& plan, const Question& q,
                            const QuestionType& type, const ops::OperatorEnv& env) {
    ExecutionTrace trace;
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const PlanStep& step = plan.steps[i];
        ops::OperatorEnv step_env = env;
        std::ostringstream context;
        if (!step.directive.empty()) context << "Instruction: " << step.directive << "\n";
        context << render_dependencies(plan, trace, i);
        step_env.step_context = context.str();

        try {
            trace.steps.push_back(run_step(step, q, type, step_env));
        } catch (const llm::GatewayError&) {
            throw;  // backend failures abort; everything else degrades
        } catch (const std::exception&) {
            trace.steps.push_back(degrade_step(step, q, step_env));
        }
        trace.total_usage += trace.steps.back().usage;
    }

    const auto& last = trace.steps.back();
    if (plan.steps.size() == 1 || last.answer_is_final) {
        trace.final_answer = last.answer;
        return trace;
    }

    // Compose the final answer from the per-step results.
    std::ostringstream user;
    user << "Given the question, the sub-questions and their answers below, state the final "
            "answer.\n\nQuestion: "
         << q.text << "\n";
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        user << "Step " << i + 1 << " (" << to_string(plan.steps[i].op)
             << "): " << trace.steps[i].answer << "\n";
        for (const auto& [sub_q, sub_outcome] : trace.steps[i].sub_results)
            user << "  Sub-question: " << sub_q << " -> " << sub_outcome.answer << "\n";
    }
    user << "\nReply with one line of the form 'Answer: <final answer>'.";

    llm::CompletionRequest request;
    request.messages = {{llm::MessageRole::System,
                         "You combine intermediate results into the final answer of a multi-hop "
                         "question."},
                        {llm::MessageRole::User, user.str()}};
    request.temperature = 0.0;
    request.max_output_tokens = 256;
    request.tag = env.tag_prefix + ".aggregate";
    const auto response = env.gateway->complete(request);
    trace.aggregation_usage = response.usage;
    trace.total_usage += response.usage;
    trace.final_answer = ops::extract_answer(response.content).first;
    return trace;
}

nlohmann::ordered_json outcome_to_json(const ops::OperatorOutcome& outcome) {
    nlohmann::ordered_json j;
    j["answer"] = outcome.answer;
    j["reasoning"] = outcome.reasoning;
    j["retrieved_doc_ids"] = outcome.retrieved_doc_ids;
    auto& subs = j["sub_results"] = nlohmann::ordered_json::array();
    for (const auto& [sub_q, sub_outcome] : outcome.sub_results)
        subs.push_back({{"question", sub_q}, {"outcome", outcome_to_json(sub_outcome)}});
    j["usage"] = to_json(outcome.usage);
    j["answer_is_final"] = outcome.answer_is_final;
    j["budget_exhausted"] = outcome.budget_exhausted;
    j["degraded"] = outcome.degraded;
    return j;
}

ops::OperatorOutcome outcome_from_json(const nlohmann::json& j) {
    ops::OperatorOutcome outcome;
    outcome.answer = j.at("answer").get<std::string>();
    outcome.reasoning = j.value("reasoning", std::string{});
    if (j.contains("retrieved_doc_ids"))
        outcome.retrieved_doc_ids = j.at("retrieved_doc_ids").get<std::vector<std::string>>();
    if (j.contains("sub_results"))
        for (const auto& sub : j.at("sub_results"))
            outcome.sub_results.emplace_back(sub.at("question").get<std::string>(),
                                             outcome_from_json(sub.at("outcome")));
    outcome.usage = token_usage_from_json(j.at("usage"));
    outcome.answer_is_final = j.value("answer_is_final", false);
    outcome.budget_exhausted = j.value("budget_exhausted", false);
    outcome.degraded = j.value("degraded", false);
    return outcome;
}

nlohmann::ordered_json trace_to_json(const ExecutionTrace& trace) {
    nlohmann::ordered_json j;
    auto& steps = j["steps"] = nlohmann::ordered_json::array();
    for (const auto& outcome : trace.steps) steps.push_back(outcome_to_json(outcome));
    j["final_answer"] = trace.final_answer;
    j["aggregation_usage"] = to_json(trace.aggregation_usage);
    j["total_usage"] = to_json(trace.total_usage);
    return j;
}

ExecutionTrace trace_from_json(const nlohmann::json& j) {
    ExecutionTrace trace;
    for (const auto& step : j.at("steps")) trace.steps.push_back(outcome_from_json(step));
    trace.final_answer = j.at("final_answer").get<std::string>();
    trace.aggregation_usage = token_usage_from_json(j.at("aggregation_usage"));
    trace.total_usage = token_usage_from_json(j.at("total_usage"));
    return trace;
}

}  // namespace belle::exec
