#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace belle {

/// Prompt/completion token counts for one or more backend calls.
struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    TokenUsage& operator+=(const TokenUsage& other) {
        prompt_tokens += other.prompt_tokens;
        completion_tokens += other.completion_tokens;
        return *this;
    }
    friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
    friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

/// The five reasoning methods in the operator pool.
enum class OperatorKind { CoT, SingleStep, IterativeStep, SubStep, AdaptiveStep };

inline constexpr int kOperatorCount = 5;

std::string to_string(OperatorKind kind);
std::optional<OperatorKind> operator_kind_from_string(std::string_view name);

/// Lenient matcher used when parsing free-text plans: accepts common
/// spellings like "sub-step", "chain-of-thought", "IRCoT".
std::optional<OperatorKind> operator_kind_from_alias(std::string_view text);

struct Operator {
    OperatorKind kind = OperatorKind::CoT;
    std::string description;  // text injected into the meta prompt's pool

    friend bool operator==(const Operator&, const Operator&) = default;
};

/// Question type label. The label set is configuration data, not an enum,
/// so extended sets (Bridge-comparison, Compositional, ...) need no code
/// change.
struct QuestionType {
    std::string label;

    friend bool operator==(const QuestionType&, const QuestionType&) = default;
};

struct Question {
    std::string id;
    std::string text;
    std::vector<std::string> gold_answers;       // may be empty for unlabeled inference
    std::optional<QuestionType> declared_type;
    std::optional<int> hops;                     // when present, in {2,3,4}

    friend bool operator==(const Question&, const Question&) = default;
};

/// Returns every invariant violation (nonempty trimmed text, hops range).
std::vector<std::string> question_violations(const Question& q);

struct PlanStep {
    OperatorKind op = OperatorKind::CoT;
    std::string directive;                    // free-text instruction from the judge
    std::vector<std::size_t> depends_on;      // indices of strictly earlier steps

    friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

enum class SourceMode { Hard, Soft };

std::string to_string(SourceMode mode);
std::optional<SourceMode> source_mode_from_string(std::string_view name);

struct ExecutionPlan {
    std::vector<PlanStep> steps;
    SourceMode source_mode = SourceMode::Hard;
    std::string judge_rationale;
    int rounds_used = 1;

    friend bool operator==(const ExecutionPlan&, const ExecutionPlan&) = default;
};

/// Debate roles in speaking order within a round.
enum class Role { Affirmative, Negative, Fast, Slow, Judge };

std::string to_string(Role role);
std::optional<Role> role_from_string(std::string_view name);

struct Utterance {
    int round = 1;
    Role role = Role::Affirmative;
    std::string content;
    TokenUsage usage;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

/// Full debate record. histories[role] indexes that role's utterances in
/// round order; append() keeps it consistent.
struct Transcript {
    std::string question_id;
    std::vector<Utterance> utterances;
    std::map<Role, std::vector<std::size_t>> histories;

    void append(Utterance u);

    friend bool operator==(const Transcript&, const Transcript&) = default;
};

/// Checks the per-round speaking order Affirmative < Negative < Fast < Slow
/// < Judge (repeats of a role within a round are allowed, e.g. multi-debater
/// sides) and that histories match the utterance list.
bool transcript_order_ok(const Transcript& t);

enum class DebateLevel { L0, L1, L2, L3 };

std::string to_string(DebateLevel level);
std::optional<DebateLevel> debate_level_from_string(std::string_view name);

/// Shared debate configuration. Lives with the core types because plans are
/// validated against it.
struct DebateConfig {
    int max_rounds = 3;
    int turns_per_side_per_round = 2;   // enforced as prompt text only
    int first_level_debaters = 2;       // split ceil/floor across sides when > 2
    int second_level_debaters = 2;
    DebateLevel level = DebateLevel::L2;
    std::vector<Operator> operator_pool;
};

/// Returns every invariant violation of the plan against the config; the
/// plan is valid iff the result is empty. Violations are data, not failures.
std::vector<std::string> plan_validate(const ExecutionPlan& plan, const DebateConfig& config);

}  // namespace belle
