#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "belle/gateway.hpp"
#include "belle/types.hpp"

namespace belle::eval {

enum class EvalErrorKind { NoGold, IdMismatch };

class EvalError : public std::runtime_error {
public:
    EvalError(EvalErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    EvalErrorKind kind() const { return kind_; }

private:
    EvalErrorKind kind_;
};

/// Standard extractive-QA normalization: lowercase, drop punctuation, drop
/// the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view s);

/// 1 iff the normalized prediction equals any normalized gold answer.
int exact_match(const std::string& pred, const std::vector<std::string>& golds);

/// Max over golds of the harmonic mean of token precision/recall on
/// normalized token multisets. Both sides empty scores 1; one side empty
/// scores 0.
double token_f1(const std::string& pred, const std::vector<std::string>& golds);

/// LLM-judged semantic consistency (YES/NO); an unparseable verdict falls
/// back to exact_match.
int acc_llm(const std::string& pred, const std::vector<std::string>& golds, const Question& q,
            llm::Gateway& gateway);

struct PredictionRecord {
    std::string id;
    std::string answer;
    TokenUsage usage;
    bool failed = false;
    std::string error;
};

struct MetricRecord {
    std::string id;
    int em = 0;
    double f1 = 0.0;
    std::optional<int> acc;
    std::string type;         // empty when the dataset carries no label
    std::optional<int> hops;
    TokenUsage usage;
    bool failed = false;
    std::string error;
};

struct MetricAggregate {
    std::size_t count = 0;    // scored records only
    double em = 0.0;
    double f1 = 0.0;
    std::optional<double> acc;
    TokenUsage usage;
};

struct MetricReport {
    std::vector<MetricRecord> records;
    MetricAggregate overall;
    std::map<std::string, MetricAggregate> per_type;
    std::map<int, MetricAggregate> per_hops;
    std::size_t failed_count = 0;

    nlohmann::ordered_json to_json() const;
    std::string to_table() const;
};

/// Scores predictions against the dataset. Every prediction id must exist in
/// the dataset (IdMismatch otherwise). Failed predictions are listed but
/// excluded from the aggregates. Acc is computed only when a gateway is
/// given.
MetricReport evaluate_run(const std::vector<PredictionRecord>& predictions,
                          const std::vector<Question>& dataset,
                          llm::Gateway* acc_gateway = nullptr);

/// Per-phase token consumption (classifier/debate/executor/eval), with
/// per-question averages against the report's record count.
struct TokenReport {
    std::map<std::string, TokenUsage> per_phase;
    TokenUsage total;
    std::size_t question_count = 0;
    double avg_prompt_tokens_per_question = 0.0;

    nlohmann::ordered_json to_json() const;
    std::string to_table() const;
};

TokenReport token_report(const llm::TokenLedger& ledger, const MetricReport& report);

/// Dataset JSONL loader: one {"id","question","answers",...} per line.
std::vector<Question> load_dataset_jsonl(const std::filesystem::path& path);

}  // namespace belle::eval
