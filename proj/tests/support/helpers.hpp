#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "belle/debate.hpp"
#include "belle/mock_backend.hpp"
#include "belle/operators.hpp"
#include "belle/retrieval.hpp"

namespace belle::test {

inline std::string fixtures_dir() {
#ifdef BELLE_DEFAULT_FIXTURES_DIR
    return BELLE_DEFAULT_FIXTURES_DIR;
#else
    return "fixtures";
#endif
}

inline std::shared_ptr<llm::MockBackend> mock_backend(std::vector<llm::MockRule> rules) {
    return std::make_shared<llm::MockBackend>(std::move(rules));
}

inline std::vector<Operator> default_pool() {
    return debate::load_operator_pool(fixtures_dir() + "/operator_pool.json");
}

inline debate::PromptTemplates default_templates() {
    return debate::PromptTemplates::load_dir(fixtures_dir() + "/templates");
}

inline ops::Demos default_demos() { return ops::Demos::load(fixtures_dir() + "/demos.json"); }

inline Question make_question(const std::string& id, const std::string& text) {
    Question q;
    q.id = id;
    q.text = text;
    return q;
}

inline std::string sentinel(const std::string& role, int round) {
    return "SENT_" + role + "_R" + std::to_string(round);
}

/// Deterministic filler so randomized scripts differ across seeds.
inline std::string filler(std::mt19937& rng, int words = 4) {
    static const char* vocab[] = {"retrieve", "decompose", "verify", "bridge", "entity",
                                  "operator", "evidence", "iterate", "compare", "plan"};
    std::string out;
    std::uniform_int_distribution<std::size_t> pick(0, std::size(vocab) - 1);
    for (int i = 0; i < words; ++i) out += std::string(" ") + vocab[pick(rng)];
    return out;
}

/// Builds a sentinel-tagged debate script for `max_rounds` rounds. The
/// hard-mode judge replies CONTINUE except at `hard_plan_round` (0 = never);
/// the soft-mode judge emits a valid plan, or garbage twice when
/// `soft_malformed` is set (exercising the fallback).
inline std::vector<llm::MockRule> sentinel_debate_script(std::mt19937& rng, int max_rounds,
                                                         int hard_plan_round = 0,
                                                         bool soft_malformed = false) {
    std::vector<llm::MockRule> rules;
    const std::string plan_json =
        "```json\n{\"steps\": [{\"operator\": \"SubStep\", \"directive\": \"decompose\", "
        "\"depends_on\": []}, {\"operator\": \"IterativeStep\", \"directive\": \"verify\", "
        "\"depends_on\": [0]}]}\n```";

    // Later rounds first: their content keys are more specific.
    for (int t = max_rounds; t >= 1; --t) {
        llm::MockRule aff;
        aff.tag = "debate.affirmative";
        if (t > 1) aff.content_contains = sentinel("FAST", t - 1);
        aff.response = sentinel("AFF", t) + filler(rng);
        rules.push_back(aff);

        llm::MockRule neg;
        neg.tag = "debate.negative";
        neg.content_contains = sentinel("AFF", t);
        neg.response = sentinel("NEG", t) + filler(rng);
        rules.push_back(neg);

        llm::MockRule fast;
        fast.tag = "debate.fast";
        fast.content_contains = sentinel("NEG", t);
        fast.response = sentinel("FAST", t) + filler(rng);
        rules.push_back(fast);

        llm::MockRule slow;
        slow.tag = "debate.slow";
        slow.content_contains = sentinel("FAST", t);
        slow.response = sentinel("SLOW", t) + filler(rng);
        rules.push_back(slow);

        if (hard_plan_round == t) {
            llm::MockRule judge;
            judge.tag = "debate.judge";
            judge.content_contains = sentinel("SLOW", t);
            judge.response = plan_json;
            rules.push_back(judge);
        }
    }

    // The soft-mode judge prompt is recognizable by its extraction wording.
    llm::MockRule soft;
    soft.tag = "debate.judge";
    soft.content_contains = "extract the solution from the slow debater";
    soft.response = soft_malformed ? "no plan here" + filler(rng) : plan_json;
    rules.push_back(soft);

    llm::MockRule hard_default;
    hard_default.tag = "debate.judge";
    hard_default.response = "CONTINUE";
    rules.push_back(hard_default);
    return rules;
}

inline DebateConfig default_debate_config(int max_rounds = 3) {
    DebateConfig cfg;
    cfg.max_rounds = max_rounds;
    cfg.operator_pool = default_pool();
    return cfg;
}

/// Retriever wrapper that counts calls, for retrieval-accounting checks.
struct CountingRetriever {
    ops::RetrieverFn inner;
    std::shared_ptr<int> calls = std::make_shared<int>(0);

    std::vector<retrieval::ScoredDocument> operator()(const std::string& query, int k) const {
        ++*calls;
        return inner ? inner(query, k) : std::vector<retrieval::ScoredDocument>{};
    }
};

inline retrieval::RetrievalIndex tiny_index() {
    return retrieval::RetrievalIndex::build(
        retrieval::load_corpus_jsonl(fixtures_dir() + "/golden/corpus.jsonl"));
}

}  // namespace belle::test
