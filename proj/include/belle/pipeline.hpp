#pragma once

#include <filesystem>
#include <optional>

#include "belle/classifier.hpp"
#include "belle/config.hpp"
#include "belle/debate.hpp"
#include "belle/executor.hpp"
#include "belle/metrics.hpp"
#include "belle/retrieval.hpp"

namespace belle::cli {

/// Wires the full pipeline from a run config: backend + gateway, classifier
/// config, debate templates, operator demos, and the retrieval index (when a
/// corpus or index path is configured).
class Pipeline {
public:
    static Pipeline from_config(RunConfig cfg);

    struct AnswerResult {
        QuestionType type;
        TokenUsage classifier_usage;
        ExecutionPlan plan;
        Transcript transcript;
        exec::ExecutionTrace trace;
    };

    /// classify -> debate -> execute. A declared question type skips the
    /// classifier call.
    AnswerResult answer(const Question& q);

    QuestionType classify_question(const Question& q, TokenUsage* usage = nullptr);
    std::pair<ExecutionPlan, Transcript> debate_question(const Question& q,
                                                         const QuestionType& type);

    /// Writes run.json, transcript.jsonl, plan.json and trace.json.
    void persist(const Question& q, const AnswerResult& result,
                 const std::filesystem::path& run_dir) const;

    /// Timestamped directory under out_dir; never reuses an existing one.
    std::filesystem::path make_run_dir(const std::string& question_id) const;

    llm::Gateway& gateway() { return *gateway_; }
    const RunConfig& config() const { return cfg_; }
    bool has_index() const { return index_.has_value(); }
    const ops::Demos& demos() const { return demos_; }
    ops::OperatorEnv executor_env() const;

private:
    Pipeline() = default;

    RunConfig cfg_;
    std::shared_ptr<llm::Backend> backend_;
    std::unique_ptr<llm::Gateway> gateway_;
    classify::ClassifierConfig classifier_cfg_;
    debate::PromptTemplates templates_;
    ops::Demos demos_;
    std::optional<retrieval::RetrievalIndex> index_;
};

/// Runs the pipeline over a dataset under the configured concurrency bound;
/// per-question failures become failed records and the run continues.
struct EvalOutcome {
    eval::MetricReport report;
    eval::TokenReport tokens;
};
EvalOutcome run_eval(Pipeline& pipeline, const std::vector<Question>& dataset,
                     const std::filesystem::path& artifacts_dir);

}  // namespace belle::cli
