#include "belle/debate.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace belle::debate {
namespace {

constexpr double kDebaterTemperature = 0.7;
constexpr double kJudgeTemperature = 0.0;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DebateError("cannot open template file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
}

void replace_all(std::string& text, std::string_view slot, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
}

// Small counts are spelled out so the default meta prompt reads naturally
// ("two times", "three times").
std::string number_word(int n) {
    static const char* words[] = {"zero", "one", "two",   "three", "four", "five",
                                  "six",  "seven", "eight", "nine",  "ten"};
    if (n >= 0 && n <= 10) return words[n];
    return std::to_string(n);
}

std::string render_pool(const std::vector<Operator>& pool) {
    std::ostringstream out;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (i) out << " ";
        out << to_string(pool[i].kind) << ": " << pool[i].description;
    }
    return out.str();
}

std::string pool_names(const std::vector<Operator>& pool) {
    std::ostringstream out;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (i) out << ", ";
        out << to_string(pool[i].kind);
    }
    return out.str();
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool kind_in_pool(OperatorKind kind, const std::vector<Operator>& pool) {
    return std::any_of(pool.begin(), pool.end(),
                       [&](const Operator& op) { return op.kind == kind; });
}

std::optional<ExecutionPlan> plan_from_json_candidate(const std::string& candidate,
                                                      const std::vector<Operator>& pool) {
    nlohmann::json j = nlohmann::json::parse(candidate, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("steps") || !j["steps"].is_array() ||
        j["steps"].empty())
        return std::nullopt;

    ExecutionPlan plan;
    for (const auto& step_json : j["steps"]) {
        if (!step_json.is_object() || !step_json.contains("operator")) return std::nullopt;
        const auto name = step_json["operator"].get<std::string>();
        auto kind = operator_kind_from_string(name);
        if (!kind) kind = operator_kind_from_alias(name);
        if (!kind || !kind_in_pool(*kind, pool)) return std::nullopt;

        PlanStep step;
        step.op = *kind;
        step.directive = step_json.value("directive", std::string{});
        if (step_json.contains("depends_on")) {
            for (const auto& dep : step_json["depends_on"]) {
                if (!dep.is_number_unsigned()) return std::nullopt;
                step.depends_on.push_back(dep.get<std::size_t>());
            }
        } else if (!plan.steps.empty()) {
            step.depends_on.push_back(plan.steps.size() - 1);
        }
        for (std::size_t dep : step.depends_on)
            if (dep >= plan.steps.size()) return std::nullopt;
        plan.steps.push_back(std::move(step));
    }
    return plan;
}

// Spellings the numbered-list fallback recognizes, longest-first per kind.
const std::vector<std::pair<std::string, OperatorKind>> kListAliases = {
    {"chain-of-thought", OperatorKind::CoT},
    {"chain of thought", OperatorKind::CoT},
    {"iterative-step", OperatorKind::IterativeStep},
    {"iterative step", OperatorKind::IterativeStep},
    {"iterativestep", OperatorKind::IterativeStep},
    {"adaptive-step", OperatorKind::AdaptiveStep},
    {"adaptive step", OperatorKind::AdaptiveStep},
    {"adaptivestep", OperatorKind::AdaptiveStep},
    {"single-step", OperatorKind::SingleStep},
    {"single step", OperatorKind::SingleStep},
    {"singlestep", OperatorKind::SingleStep},
    {"sub-step", OperatorKind::SubStep},
    {"sub step", OperatorKind::SubStep},
    {"substep", OperatorKind::SubStep},
    {"self-ask", OperatorKind::SubStep},
    {"ircot", OperatorKind::IterativeStep},
    {"cot", OperatorKind::CoT},
};

std::optional<ExecutionPlan> plan_from_numbered_list(const std::string& text,
                                                     const std::vector<Operator>& pool) {
    ExecutionPlan plan;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        // Only lines that start with a list number count as steps.
        std::size_t i = line.find_first_not_of(" \t");
        if (i == std::string::npos || !std::isdigit(static_cast<unsigned char>(line[i]))) continue;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i < line.size() && (line[i] == '.' || line[i] == ')' || line[i] == ':')) ++i;

        const std::string body = line.substr(i);
        const std::string lower = lowercase(body);
        std::size_t best_pos = std::string::npos;
        std::optional<OperatorKind> kind;
        std::size_t matched_end = 0;
        for (const auto& [alias, alias_kind] : kListAliases) {
            const auto pos = lower.find(alias);
            if (pos != std::string::npos && pos < best_pos && kind_in_pool(alias_kind, pool)) {
                best_pos = pos;
                kind = alias_kind;
                matched_end = pos + alias.size();
            }
        }
        if (!kind) continue;

        PlanStep step;
        step.op = *kind;
        std::string directive = body.substr(matched_end);
        const auto start = directive.find_first_not_of(" :,-\t");
        step.directive = start == std::string::npos ? std::string{} : directive.substr(start);
        if (!plan.steps.empty()) step.depends_on.push_back(plan.steps.size() - 1);
        plan.steps.push_back(std::move(step));
    }
    if (plan.steps.empty()) return std::nullopt;
    return plan;
}

}  // namespace

PromptTemplates PromptTemplates::load_dir(const std::filesystem::path& dir) {
    PromptTemplates t;
    t.meta = read_file(dir / "meta.txt");
    t.affirmative = read_file(dir / "affirmative.txt");
    t.negative = read_file(dir / "negative.txt");
    t.fast = read_file(dir / "fast.txt");
    t.slow = read_file(dir / "slow.txt");
    t.judge_hard = read_file(dir / "judge_hard.txt");
    t.judge_soft = read_file(dir / "judge_soft.txt");

    std::ifstream in(dir / "debate_levels.json");
    if (!in) throw DebateError("cannot open debate_levels.json in " + dir.string());
    nlohmann::json j;
    in >> j;
    for (const auto& [key, value] : j.items()) {
        const auto level = debate_level_from_string(key);
        if (!level) throw DebateError("unknown debate level key '" + key + "'");
        t.level_sentences[*level] = value.get<std::string>();
    }
    for (auto level : {DebateLevel::L0, DebateLevel::L1, DebateLevel::L2, DebateLevel::L3})
        if (!t.level_sentences.count(level))
            throw DebateError("debate_levels.json missing " + to_string(level));
    return t;
}

std::optional<ExecutionPlan> parse_plan_text(const std::string& text,
                                             const std::vector<Operator>& pool) {
    // Candidate JSON payloads, most specific first.
    std::vector<std::string> candidates;
    for (std::string_view fence : {std::string_view{"```json"}, std::string_view{"```"}}) {
        const auto open = text.find(fence);
        if (open == std::string::npos) continue;
        const auto body_start = open + fence.size();
        const auto close = text.find("```", body_start);
        if (close != std::string::npos) {
            candidates.push_back(text.substr(body_start, close - body_start));
            break;
        }
    }
    candidates.push_back(text);
    const auto first_brace = text.find('{');
    const auto last_brace = text.rfind('}');
    if (first_brace != std::string::npos && last_brace != std::string::npos &&
        last_brace > first_brace)
        candidates.push_back(text.substr(first_brace, last_brace - first_brace + 1));

    for (const auto& candidate : candidates)
        if (auto plan = plan_from_json_candidate(candidate, pool)) return plan;
    return plan_from_numbered_list(text, pool);
}

ExecutionPlan fallback_plan(const QuestionType& type, const DebateConfig& cfg) {
    ExecutionPlan plan;
    const std::string label = lowercase(type.label);
    if (label.find("null") != std::string::npos) {
        plan.steps.push_back(
            {OperatorKind::CoT, "Answer directly with step-by-step reasoning.", {}});
    } else if (label.find("inference") != std::string::npos ||
               label.find("compositional") != std::string::npos) {
        plan.steps.push_back(
            {OperatorKind::SubStep, "Decompose the question into sub-questions and answer each one.", {}});
        plan.steps.push_back({OperatorKind::IterativeStep,
                              "Resolve the remaining reasoning gap with iterative retrieval.",
                              {0}});
    } else {
        plan.steps.push_back(
            {OperatorKind::SubStep, "Decompose the question into the parts that must be checked.", {}});
        plan.steps.push_back(
            {OperatorKind::SingleStep, "Verify the decomposed findings with one retrieval.", {0}});
    }
    plan.source_mode = SourceMode::Soft;
    plan.rounds_used = cfg.max_rounds;
    plan.judge_rationale = "fallback: adaptive default plan for type " + type.label;
    return plan;
}

std::vector<Operator> load_operator_pool(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DebateError("cannot open operator pool: " + path.string());
    nlohmann::json j;
    in >> j;
    std::vector<Operator> pool;
    for (auto kind : {OperatorKind::CoT, OperatorKind::SingleStep, OperatorKind::IterativeStep,
                      OperatorKind::SubStep, OperatorKind::AdaptiveStep}) {
        const auto name = to_string(kind);
        if (!j.contains(name)) throw DebateError("operator pool missing " + name);
        const auto description = j.at(name).get<std::string>();
        if (description.empty()) throw DebateError("empty description for " + name);
        pool.push_back(Operator{kind, description});
    }
    return pool;
}

DebateEngine::DebateEngine(DebateConfig config, PromptTemplates templates, llm::Gateway& gateway)
    : config_(std::move(config)), templates_(std::move(templates)), gateway_(gateway) {
    if (config_.max_rounds < 1) throw DebateError("max_rounds must be >= 1");
    if (config_.first_level_debaters < 2 || config_.second_level_debaters < 2)
        throw DebateError("each level needs at least 2 debaters");
    if (config_.operator_pool.empty()) throw DebateError("operator pool is empty");
}

std::string DebateEngine::assemble_meta_prompt(const QuestionType& type,
                                               const Question& q) const {
    std::string meta = templates_.meta;
    replace_all(meta, "<debate level>", templates_.level_sentences.at(config_.level));
    replace_all(meta, "<operators pool>", render_pool(config_.operator_pool));
    replace_all(meta, "<question type>", type.label);

    const int affirmative = (config_.first_level_debaters + 1) / 2;
    const int negative = config_.first_level_debaters - affirmative;
    std::string sides;
    if (affirmative == 1 && negative == 1) {
        sides = "Both sides have one debater each";
    } else {
        sides = "The affirmative side has " + number_word(affirmative) +
                " debaters and the negative side has " + number_word(negative) + " debater" +
                (negative == 1 ? "" : "s");
    }
    replace_all(meta, "<sides>", sides);
    replace_all(meta, "<turns>", number_word(config_.turns_per_side_per_round));
    replace_all(meta, "<max rounds>", number_word(config_.max_rounds));
    replace_all(meta, "<question>", q.text);
    return meta;
}

DebateState DebateEngine::start(const Question& q, const QuestionType& type) const {
    DebateState state;
    state.question = q;
    state.type = type;
    state.transcript.question_id = q.id;
    state.meta_prompt = assemble_meta_prompt(type, q);
    return state;
}

std::string DebateEngine::role_round_content(const DebateState& state, Role role,
                                             int round) const {
    std::string joined;
    for (const auto& u : state.transcript.utterances) {
        if (u.role != role || u.round != round) continue;
        if (!joined.empty()) joined += "\n";
        joined += u.content;
    }
    return joined.empty() ? "Null" : joined;
}

std::string DebateEngine::role_history(const DebateState& state, Role role,
                                       int before_round) const {
    std::string joined;
    for (const auto& u : state.transcript.utterances) {
        if (u.role != role || u.round >= before_round) continue;
        if (!joined.empty()) joined += "\n";
        joined += "Round " + std::to_string(u.round) + ": " + u.content;
    }
    return joined.empty() ? "Null" : joined;
}

llm::CompletionResponse DebateEngine::ask(const DebateState& state,
                                          const std::string& user_prompt, const std::string& tag,
                                          double temperature) {
    llm::CompletionRequest request;
    request.messages = {{llm::MessageRole::System, state.meta_prompt},
                        {llm::MessageRole::User, user_prompt}};
    request.temperature = temperature;
    request.max_output_tokens = 512;
    request.tag = tag;
    return gateway_.complete(request);
}

Utterance DebateEngine::level_turn(DebateState& state, Role role) {
    const int t = state.round;
    std::string prompt;
    switch (role) {
        case Role::Affirmative: {
            prompt = templates_.affirmative;
            replace_all(prompt, "<H_ad>", role_history(state, Role::Affirmative, t));
            replace_all(prompt, "<f_fast>", role_round_content(state, Role::Fast, t - 1));
            replace_all(prompt, "<f_slow>", role_round_content(state, Role::Slow, t - 1));
            break;
        }
        case Role::Negative: {
            prompt = templates_.negative;
            replace_all(prompt, "<H_nd>", role_history(state, Role::Negative, t));
            replace_all(prompt, "<f_ad>", role_round_content(state, Role::Affirmative, t));
            replace_all(prompt, "<f_fast>", role_round_content(state, Role::Fast, t - 1));
            replace_all(prompt, "<f_slow>", role_round_content(state, Role::Slow, t - 1));
            break;
        }
        case Role::Fast: {
            prompt = templates_.fast;
            replace_all(prompt, "<round>", std::to_string(t));
            replace_all(prompt, "<f_ad>", role_round_content(state, Role::Affirmative, t));
            replace_all(prompt, "<f_nd>", role_round_content(state, Role::Negative, t));
            replace_all(prompt, "<H_fast>", role_history(state, Role::Fast, t));
            break;
        }
        case Role::Slow: {
            prompt = templates_.slow;
            replace_all(prompt, "<round>", std::to_string(t));
            replace_all(prompt, "<f_ad>", role_round_content(state, Role::Affirmative, t));
            replace_all(prompt, "<f_nd>", role_round_content(state, Role::Negative, t));
            replace_all(prompt, "<f_fast>", role_round_content(state, Role::Fast, t));
            replace_all(prompt, "<H_slow>", role_history(state, Role::Slow, t));
            break;
        }
        case Role::Judge: throw DebateError("judge is not a level turn");
    }
    const auto response =
        ask(state, prompt, "debate." + to_string(role), kDebaterTemperature);
    Utterance utterance{t, role, response.content, response.usage};
    state.transcript.append(utterance);
    return utterance;
}

Utterance DebateEngine::affirmative_turn(DebateState& state) {
    return level_turn(state, Role::Affirmative);
}
Utterance DebateEngine::negative_turn(DebateState& state) {
    return level_turn(state, Role::Negative);
}
Utterance DebateEngine::fast_turn(DebateState& state) { return level_turn(state, Role::Fast); }
Utterance DebateEngine::slow_turn(DebateState& state) { return level_turn(state, Role::Slow); }

DebateEngine::JudgeDecision DebateEngine::judge_decide(DebateState& state) {
    const int t = state.round;
    const bool soft = t >= config_.max_rounds;

    if (!soft) {
        std::string prompt = templates_.judge_hard;
        replace_all(prompt, "<f_ad>", role_round_content(state, Role::Affirmative, t));
        replace_all(prompt, "<f_nd>", role_round_content(state, Role::Negative, t));
        replace_all(prompt, "<f_fast>", role_round_content(state, Role::Fast, t));
        replace_all(prompt, "<f_slow>", role_round_content(state, Role::Slow, t));
        replace_all(prompt, "<question type>", state.type.label);
        replace_all(prompt, "<operator names>", pool_names(config_.operator_pool));

        const auto response = ask(state, prompt, "debate.judge", kJudgeTemperature);
        state.transcript.append(Utterance{t, Role::Judge, response.content, response.usage});

        if (auto plan = parse_plan_text(response.content, config_.operator_pool)) {
            plan->source_mode = SourceMode::Hard;
            plan->rounds_used = t;
            plan->judge_rationale = response.content;
            state.plan = *plan;
            state.terminated = true;
            return {true, std::move(plan)};
        }
        return {false, std::nullopt};
    }

    // Soft mode at the round limit: extract from the slow debater's history
    // (all rounds including the current one).
    std::string prompt = templates_.judge_soft;
    replace_all(prompt, "<H_slow>", role_history(state, Role::Slow, t + 1));
    replace_all(prompt, "<question type>", state.type.label);
    replace_all(prompt, "<operator names>", pool_names(config_.operator_pool));

    llm::CompletionRequest request;
    request.messages = {{llm::MessageRole::System, state.meta_prompt},
                        {llm::MessageRole::User, prompt}};
    request.temperature = kJudgeTemperature;
    request.max_output_tokens = 512;
    request.tag = "debate.judge";

    std::optional<ExecutionPlan> plan;
    for (int attempt = 0; attempt < 2 && !plan; ++attempt) {
        const auto response = gateway_.complete(request);
        state.transcript.append(Utterance{t, Role::Judge, response.content, response.usage});
        plan = parse_plan_text(response.content, config_.operator_pool);
        if (plan) {
            plan->judge_rationale = response.content;
        } else {
            request.messages.push_back({llm::MessageRole::Assistant, response.content});
            request.messages.push_back(
                {llm::MessageRole::User,
                 "Your previous response could not be parsed. Output only the fenced JSON object "
                 "with the execution plan."});
        }
    }
    if (!plan) plan = fallback_plan(state.type, config_);
    plan->source_mode = SourceMode::Soft;
    plan->rounds_used = config_.max_rounds;
    state.plan = *plan;
    state.terminated = true;
    return {true, std::move(plan)};
}

std::pair<ExecutionPlan, Transcript> DebateEngine::run(const Question& q,
                                                       const QuestionType& type) {
    DebateState state = start(q, type);
    const int affirmative_count = (config_.first_level_debaters + 1) / 2;
    const int negative_count = config_.first_level_debaters - affirmative_count;
    const int fast_count = (config_.second_level_debaters + 1) / 2;
    const int slow_count = config_.second_level_debaters - fast_count;

    for (state.round = 1; state.round <= config_.max_rounds; ++state.round) {
        for (int i = 0; i < affirmative_count; ++i) affirmative_turn(state);
        for (int i = 0; i < std::max(negative_count, 1); ++i) negative_turn(state);
        for (int i = 0; i < fast_count; ++i) fast_turn(state);
        for (int i = 0; i < std::max(slow_count, 1); ++i) slow_turn(state);
        const auto decision = judge_decide(state);
        if (decision.stop) return {*decision.plan, state.transcript};
    }
    throw DebateError("debate ended without a plan");  // unreachable: soft mode always stops
}

}  // namespace belle::debate
