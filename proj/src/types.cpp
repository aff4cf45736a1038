#include "belle/types.hpp"

#include <algorithm>
#include <cctype>

namespace belle {
namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Strips everything but alphanumerics, for alias matching.
std::string squash(std::string_view s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

}  // namespace

std::string to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::CoT: return "CoT";
        case OperatorKind::SingleStep: return "SingleStep";
        case OperatorKind::IterativeStep: return "IterativeStep";
        case OperatorKind::SubStep: return "SubStep";
        case OperatorKind::AdaptiveStep: return "AdaptiveStep";
    }
    return "CoT";
}

std::optional<OperatorKind> operator_kind_from_string(std::string_view name) {
    if (name == "CoT") return OperatorKind::CoT;
    if (name == "SingleStep") return OperatorKind::SingleStep;
    if (name == "IterativeStep") return OperatorKind::IterativeStep;
    if (name == "SubStep") return OperatorKind::SubStep;
    if (name == "AdaptiveStep") return OperatorKind::AdaptiveStep;
    return std::nullopt;
}

std::optional<OperatorKind> operator_kind_from_alias(std::string_view text) {
    const std::string s = squash(text);
    if (s == "cot" || s == "chainofthought") return OperatorKind::CoT;
    if (s == "singlestep" || s == "singlestepretrieval") return OperatorKind::SingleStep;
    if (s == "iterativestep" || s == "iterativestepretrieval" || s == "ircot")
        return OperatorKind::IterativeStep;
    if (s == "substep" || s == "substepquestion" || s == "selfask") return OperatorKind::SubStep;
    if (s == "adaptivestep") return OperatorKind::AdaptiveStep;
    return std::nullopt;
}

std::string to_string(SourceMode mode) {
    return mode == SourceMode::Hard ? "hard" : "soft";
}

std::optional<SourceMode> source_mode_from_string(std::string_view name) {
    const std::string s = lowercase(name);
    if (s == "hard") return SourceMode::Hard;
    if (s == "soft") return SourceMode::Soft;
    return std::nullopt;
}

std::string to_string(Role role) {
    switch (role) {
        case Role::Affirmative: return "affirmative";
        case Role::Negative: return "negative";
        case Role::Fast: return "fast";
        case Role::Slow: return "slow";
        case Role::Judge: return "judge";
    }
    return "affirmative";
}

std::optional<Role> role_from_string(std::string_view name) {
    const std::string s = lowercase(name);
    if (s == "affirmative") return Role::Affirmative;
    if (s == "negative") return Role::Negative;
    if (s == "fast") return Role::Fast;
    if (s == "slow") return Role::Slow;
    if (s == "judge") return Role::Judge;
    return std::nullopt;
}

std::string to_string(DebateLevel level) {
    switch (level) {
        case DebateLevel::L0: return "L0";
        case DebateLevel::L1: return "L1";
        case DebateLevel::L2: return "L2";
        case DebateLevel::L3: return "L3";
    }
    return "L2";
}

std::optional<DebateLevel> debate_level_from_string(std::string_view name) {
    std::string s = lowercase(name);
    if (!s.empty() && s[0] == 'l') s.erase(0, 1);
    if (s == "0") return DebateLevel::L0;
    if (s == "1") return DebateLevel::L1;
    if (s == "2") return DebateLevel::L2;
    if (s == "3") return DebateLevel::L3;
    return std::nullopt;
}

std::vector<std::string> question_violations(const Question& q) {
    std::vector<std::string> out;
    const auto first = q.text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) out.push_back("text is empty after trimming");
    if (q.hops && (*q.hops < 2 || *q.hops > 4)) out.push_back("hops outside {2,3,4}");
    return out;
}

void Transcript::append(Utterance u) {
    histories[u.role].push_back(utterances.size());
    utterances.push_back(std::move(u));
}

bool transcript_order_ok(const Transcript& t) {
    int prev_round = 0;
    Role prev_role = Role::Affirmative;
    for (const auto& u : t.utterances) {
        if (u.round < prev_round) return false;
        if (u.round == prev_round && static_cast<int>(u.role) < static_cast<int>(prev_role))
            return false;
        if (u.round > prev_round && u.round != prev_round + 1 && prev_round != 0) return false;
        prev_round = u.round;
        prev_role = u.role;
    }
    // histories must index exactly the utterances of each role, in order.
    std::map<Role, std::vector<std::size_t>> rebuilt;
    for (std::size_t i = 0; i < t.utterances.size(); ++i)
        rebuilt[t.utterances[i].role].push_back(i);
    return rebuilt == t.histories;
}

std::vector<std::string> plan_validate(const ExecutionPlan& plan, const DebateConfig& config) {
    std::vector<std::string> violations;
    if (plan.steps.empty()) violations.push_back("empty steps");
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        for (std::size_t dep : plan.steps[i].depends_on) {
            if (dep >= i)
                violations.push_back("forward dependency: step " + std::to_string(i) +
                                     " depends on step " + std::to_string(dep));
        }
        if (!config.operator_pool.empty()) {
            const bool in_pool = std::any_of(
                config.operator_pool.begin(), config.operator_pool.end(),
                [&](const Operator& op) { return op.kind == plan.steps[i].op; });
            if (!in_pool)
                violations.push_back("step " + std::to_string(i) + " uses operator " +
                                     to_string(plan.steps[i].op) + " outside the pool");
        }
    }
    if (plan.rounds_used < 1) violations.push_back("rounds_used < 1");
    if (plan.rounds_used > config.max_rounds)
        violations.push_back("rounds_used exceeds max rounds");
    if (plan.source_mode == SourceMode::Soft && plan.rounds_used != config.max_rounds)
        violations.push_back("soft mode requires rounds_used = max rounds");
    return violations;
}

}  // namespace belle
