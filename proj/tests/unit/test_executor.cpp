#include <doctest.h>

#include "belle/executor.hpp"
#include "support/helpers.hpp"

using namespace belle;
using namespace belle::exec;

namespace {

struct ExecHarness {
    std::shared_ptr<llm::MockBackend> backend;
    llm::Gateway gateway;
    ops::Demos demos = test::default_demos();
    std::vector<llm::CompletionRequest> captured;

    explicit ExecHarness(std::vector<llm::MockRule> rules)
        : backend(test::mock_backend(std::move(rules))), gateway(backend) {
        gateway.set_request_observer(
            [this](const llm::CompletionRequest& r) { captured.push_back(r); });
    }

    ops::OperatorEnv env() {
        ops::OperatorEnv e;
        e.gateway = &gateway;
        e.demos = &demos;
        e.tag_prefix = "executor";
        return e;
    }
};

ExecutionPlan single_cot_plan() {
    ExecutionPlan plan;
    plan.steps.push_back({OperatorKind::CoT, "answer directly", {}});
    plan.rounds_used = 1;
    return plan;
}

}  // namespace

TEST_SUITE("executor") {

TEST_CASE("single-step plan: one outcome, no aggregation call") {
    ExecHarness h({{"executor.cot", "", "thinking...\nAnswer: Paris", std::nullopt}});
    auto env = h.env();
    const auto trace = execute_plan(single_cot_plan(), test::make_question("q", "capital?"),
                                    QuestionType{"Null"}, env);
    REQUIRE(trace.steps.size() == 1);
    CHECK(trace.final_answer == "Paris");
    CHECK(trace.aggregation_usage == TokenUsage{0, 0});
    for (const auto& r : h.captured) CHECK(r.tag != "executor.aggregate");
    CHECK(trace.total_usage == trace.steps[0].usage);
}

TEST_CASE("dependent steps receive the directive and upstream outcomes") {
    std::vector<llm::MockRule> rules;
    rules.push_back({"executor.substep", "", "So the final answer is: BRIDGE", std::nullopt});
    rules.push_back({"executor.iterative", "", "So the final answer is: FINAL", std::nullopt});
    ExecHarness h(std::move(rules));
    auto env = h.env();

    ExecutionPlan plan;
    plan.steps.push_back({OperatorKind::SubStep, "decompose into two sub-questions", {}});
    plan.steps.push_back({OperatorKind::IterativeStep, "verify the bridge entity", {0}});
    plan.rounds_used = 2;

    const auto trace = execute_plan(plan, test::make_question("q", "who?"),
                                    QuestionType{"Inference"}, env);
    CHECK(trace.final_answer == "FINAL");

    std::string iterative_prompt;
    for (const auto& r : h.captured)
        if (r.tag == "executor.iterative") iterative_prompt = r.messages.back().content;
    REQUIRE(!iterative_prompt.empty());
    CHECK(iterative_prompt.find("verify the bridge entity") != std::string::npos);
    CHECK(iterative_prompt.find("BRIDGE") != std::string::npos);
    CHECK(iterative_prompt.find("Result of step 1 (SubStep)") != std::string::npos);

    std::string substep_prompt = h.captured[0].messages.back().content;
    CHECK(substep_prompt.find("decompose into two sub-questions") != std::string::npos);
}

TEST_CASE("aggregation runs when the last step lacks a final marker") {
    std::vector<llm::MockRule> rules;
    // Both steps answer without any marker line.
    rules.push_back({"executor.cot", "", "The answer might be Delhi", std::nullopt});
    rules.push_back({"executor.aggregate", "", "Answer: Delhi", std::nullopt});
    ExecHarness h(std::move(rules));
    auto env = h.env();

    ExecutionPlan plan;
    plan.steps.push_back({OperatorKind::CoT, "first pass", {}});
    plan.steps.push_back({OperatorKind::CoT, "second pass", {0}});
    plan.rounds_used = 1;

    const auto trace = execute_plan(plan, test::make_question("q", "capital?"),
                                    QuestionType{"Null"}, env);
    CHECK(trace.final_answer == "Delhi");
    CHECK(trace.aggregation_usage.prompt_tokens > 0);

    std::string aggregate_prompt;
    for (const auto& r : h.captured)
        if (r.tag == "executor.aggregate") aggregate_prompt = r.messages.back().content;
    REQUIRE(!aggregate_prompt.empty());
    CHECK(aggregate_prompt.find("Given the question, the sub-questions and their answers "
                                "below, state the final answer.") != std::string::npos);
    CHECK(trace.total_usage ==
          trace.steps[0].usage + trace.steps[1].usage + trace.aggregation_usage);
}

TEST_CASE("aggregation is skipped when the last step emitted a final marker") {
    std::vector<llm::MockRule> rules;
    rules.push_back({"executor.cot", "second pass", "So the final answer is: Delhi",
                     std::nullopt});
    rules.push_back({"executor.cot", "", "no marker here", std::nullopt});
    ExecHarness h(std::move(rules));
    auto env = h.env();

    ExecutionPlan plan;
    plan.steps.push_back({OperatorKind::CoT, "first pass", {}});
    plan.steps.push_back({OperatorKind::CoT, "second pass", {0}});
    plan.rounds_used = 1;

    const auto trace = execute_plan(plan, test::make_question("q", "capital?"),
                                    QuestionType{"Null"}, env);
    CHECK(trace.final_answer == "Delhi");
    for (const auto& r : h.captured) CHECK(r.tag != "executor.aggregate");
}

TEST_CASE("a failing step degrades to a flagged closed-book substitute") {
    // SingleStep raises EmptyQuery (the question tokenizes to nothing), so
    // the executor substitutes a CoT attempt at the same index.
    std::vector<llm::MockRule> rules;
    rules.push_back({"executor.cot", "", "Answer: recovered", std::nullopt});
    ExecHarness h(std::move(rules));
    auto env = h.env();
    const auto index = test::tiny_index();
    env.retriever = ops::make_index_retriever(index);

    ExecutionPlan plan;
    plan.steps.push_back({OperatorKind::SingleStep, "retrieve once", {}});
    plan.rounds_used = 1;

    const auto trace =
        execute_plan(plan, test::make_question("q", "???"), QuestionType{"Inference"}, env);
    REQUIRE(trace.steps.size() == 1);
    CHECK(trace.steps[0].degraded);
    CHECK(trace.final_answer == "recovered");
    CHECK(trace.total_usage == trace.steps[0].usage);
}

TEST_CASE("backend failures abort instead of degrading") {
    ExecHarness h({});  // empty script: every call is a ScriptMiss
    auto env = h.env();
    CHECK_THROWS_AS(execute_plan(single_cot_plan(), test::make_question("q", "x?"),
                                 QuestionType{"Null"}, env),
                    llm::GatewayError);
}

TEST_CASE("trace usage reconciles with the ledger") {
    std::vector<llm::MockRule> rules;
    rules.push_back({"executor.substep", "Intermediate answer: A1",
                     "So the final answer is: done", std::nullopt});
    rules.push_back({"executor.substep", "", "Follow up: S1?", std::nullopt});
    rules.push_back({"executor.singlestep", "", "Answer: A1", std::nullopt});
    rules.push_back({"executor.iterative", "", "no marker", std::nullopt});
    rules.push_back({"executor.aggregate", "", "Answer: done", std::nullopt});
    ExecHarness h(std::move(rules));
    auto env = h.env();
    const auto index = test::tiny_index();
    env.retriever = ops::make_index_retriever(index);
    env.budget.max_iterations = 2;

    ExecutionPlan plan;
    plan.steps.push_back({OperatorKind::SubStep, "decompose", {}});
    plan.steps.push_back({OperatorKind::IterativeStep, "verify", {0}});
    plan.rounds_used = 1;

    const auto trace = execute_plan(plan, test::make_question("q", "Who directed Lagaan?"),
                                    QuestionType{"Inference"}, env);
    CHECK(trace.total_usage == h.gateway.ledger().report().total);
}

TEST_CASE("trace JSON round trips") {
    ExecHarness h({{"executor.cot", "", "Answer: Paris", std::nullopt}});
    auto env = h.env();
    const auto trace = execute_plan(single_cot_plan(), test::make_question("q", "capital?"),
                                    QuestionType{"Null"}, env);
    const auto j = trace_to_json(trace);
    const auto back = trace_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.final_answer == trace.final_answer);
    CHECK(back.total_usage == trace.total_usage);
    CHECK(back.steps.size() == trace.steps.size());
    CHECK(back.steps[0].answer == trace.steps[0].answer);
}

}  // TEST_SUITE
