#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "belle/gateway.hpp"
#include "belle/types.hpp"

namespace belle::debate {

class DebateError : public std::runtime_error {
public:
    explicit DebateError(const std::string& what) : std::runtime_error(what) {}
};

/// Role prompt templates with named slots (<operators pool>, <question type>,
/// <H_ad>, <f_fast>, ...). Shipped as text files under fixtures/templates.
struct PromptTemplates {
    std::string meta;
    std::string affirmative;
    std::string negative;
    std::string fast;
    std::string slow;
    std::string judge_hard;
    std::string judge_soft;
    std::map<DebateLevel, std::string> level_sentences;

    static PromptTemplates load_dir(const std::filesystem::path& dir);
};

/// Mutable state of one debate run.
struct DebateState {
    int round = 1;
    Transcript transcript;
    bool terminated = false;
    std::optional<ExecutionPlan> plan;

    // Fixed context of the run.
    Question question;
    QuestionType type;
    std::string meta_prompt;
};

/// Parses a judge response into a plan: first a fenced (or bare) JSON object
/// {"steps": [...]}, then a numbered-list fallback matched by operator name.
/// Returns nullopt when nothing parseable and pool-valid is found.
std::optional<ExecutionPlan> parse_plan_text(const std::string& text,
                                             const std::vector<Operator>& pool);

/// The adaptive default plan for a question type, used when the soft-mode
/// judge fails twice.
ExecutionPlan fallback_plan(const QuestionType& type, const DebateConfig& cfg);

/// Builds the five default operators with descriptions from a JSON map file.
std::vector<Operator> load_operator_pool(const std::filesystem::path& path);

/// Bi-level debate: affirmative/negative (level 1) and fast/slow memory
/// debaters (level 2) feeding a judge, which terminates in hard mode with a
/// confident plan or soft mode at the round limit.
class DebateEngine {
public:
    DebateEngine(DebateConfig config, PromptTemplates templates, llm::Gateway& gateway);

    std::string assemble_meta_prompt(const QuestionType& type, const Question& q) const;

    DebateState start(const Question& q, const QuestionType& type) const;

    Utterance affirmative_turn(DebateState& state);
    Utterance negative_turn(DebateState& state);
    Utterance fast_turn(DebateState& state);
    Utterance slow_turn(DebateState& state);

    struct JudgeDecision {
        bool stop = false;
        std::optional<ExecutionPlan> plan;
    };
    JudgeDecision judge_decide(DebateState& state);

    /// Runs rounds in strict order affirmative -> negative -> fast -> slow ->
    /// judge until a plan is produced.
    std::pair<ExecutionPlan, Transcript> run(const Question& q, const QuestionType& type);

    const DebateConfig& config() const { return config_; }

private:
    Utterance level_turn(DebateState& state, Role role);
    std::string role_round_content(const DebateState& state, Role role, int round) const;
    std::string role_history(const DebateState& state, Role role, int before_round) const;
    llm::CompletionResponse ask(const DebateState& state, const std::string& user_prompt,
                                const std::string& tag, double temperature);

    DebateConfig config_;
    PromptTemplates templates_;
    llm::Gateway& gateway_;
};

}  // namespace belle::debate
