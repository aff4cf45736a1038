#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "belle/gateway.hpp"
#include "belle/retrieval.hpp"
#include "belle/types.hpp"

namespace belle::ops {

// Marker strings shared between prompt text and answer parsers so the two
// cannot drift apart.
inline constexpr std::string_view kAnswerMarker = "Answer:";
inline constexpr std::string_view kFinalAnswerMarker = "So the final answer is:";
inline constexpr std::string_view kFollowUpMarker = "Follow up:";

struct OperatorOutcome {
    std::string answer;
    std::string reasoning;
    std::vector<std::string> retrieved_doc_ids;  // deduplicated, first-retrieval order
    std::vector<std::pair<std::string, OperatorOutcome>> sub_results;
    TokenUsage usage;        // aggregate over every backend call this operator made
    bool answer_is_final = false;   // answer came from an explicit marker line
    bool budget_exhausted = false;
    bool degraded = false;          // set by the executor's degradation policy
};

struct OperatorBudget {
    int max_iterations = 4;  // iterative/sub-step loop cap
    int k_docs = 5;          // candidate documents per retrieval, clamped to [3,10]
};

enum class LeafMode { ClosedBook, SingleStep, IterativeStep };

struct CotDemo {
    std::string question;
    std::string reasoning;
    std::string answer;
};

/// Demonstration fixtures: four chain-of-thought examples (one per default
/// question type) and rendered follow-up decomposition examples.
struct Demos {
    std::vector<CotDemo> cot;
    std::vector<std::string> self_ask;

    static Demos load(const std::filesystem::path& path);
};

using RetrieverFn =
    std::function<std::vector<retrieval::ScoredDocument>(const std::string& query, int k)>;

/// Everything an operator invocation needs. `retriever` may be empty, in
/// which case retrieval-augmented operators degrade to closed-book prompts.
struct OperatorEnv {
    llm::Gateway* gateway = nullptr;
    RetrieverFn retriever;
    OperatorBudget budget;
    const Demos* demos = nullptr;
    std::string tag_prefix = "operator";
    std::string step_context;  // directive plus upstream step outcomes
};

/// Wraps an index as the retriever function used by the operators.
RetrieverFn make_index_retriever(const retrieval::RetrievalIndex& index);

/// Extracts the answer from a completion: the text after the last
/// final-answer or answer marker; otherwise falls back to the last sentence.
/// The bool is true when a marker was found.
std::pair<std::string, bool> extract_answer(const std::string& text);

/// Closed-book chain-of-thought with the 4-shot demonstrations.
OperatorOutcome run_cot(const Question& q, const OperatorEnv& env);

/// One retrieval with the full question as the query, then a single answer
/// prompt over the candidate documents.
OperatorOutcome run_single_step(const Question& q, const OperatorEnv& env);

/// Follow-up decomposition: repeatedly asks whether another sub-question is
/// needed, answers each via the leaf mode, and stops at the final-answer
/// marker or when the budget forces an answer.
OperatorOutcome run_sub_step(const Question& q, const OperatorEnv& env, LeafMode leaf);

/// Interleaved retrieve-then-reason rounds; the latest reasoning sentence is
/// the next query.
OperatorOutcome run_iterative_step(const Question& q, const OperatorEnv& env);

/// Routes by question type: Null -> closed-book CoT; Comparison/Temporal ->
/// sub-step with single-step leaves; Inference -> sub-step with
/// iterative-step leaves. Labels outside the default set route by substring,
/// falling back to the single-step-leaf pipeline.
OperatorOutcome run_adaptive_step(const Question& q, const QuestionType& type,
                                  const OperatorEnv& env);

}  // namespace belle::ops
