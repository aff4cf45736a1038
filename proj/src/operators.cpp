#include "belle/operators.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace belle::ops {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Text after `marker` up to the end of its line, or nullopt if absent.
std::optional<std::string> after_marker(const std::string& text, std::string_view marker) {
    const auto pos = text.rfind(marker);
    if (pos == std::string::npos) return std::nullopt;
    const auto start = pos + marker.size();
    const auto end = text.find('\n', start);
    return trim(text.substr(start, end == std::string::npos ? std::string::npos : end - start));
}

std::string last_sentence(const std::string& text) {
    const std::string trimmed = trim(text);
    if (trimmed.empty()) return {};
    // Split on sentence terminators and take the last nonempty piece.
    std::size_t start = 0;
    std::string last = trimmed;
    for (std::size_t i = 0; i < trimmed.size(); ++i) {
        if (trimmed[i] == '.' || trimmed[i] == '!' || trimmed[i] == '?') {
            const auto piece = trim(trimmed.substr(start, i - start));
            if (!piece.empty()) last = piece;
            start = i + 1;
        }
    }
    const auto tail = trim(trimmed.substr(start));
    return tail.empty() ? last : tail;
}

std::string last_nonempty_line(const std::string& text) {
    std::istringstream in(text);
    std::string line, last;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (!t.empty()) last = t;
    }
    return last;
}

std::string render_docs(const std::vector<retrieval::ScoredDocument>& docs) {
    std::ostringstream out;
    for (const auto& d : docs) out << "[Doc " << d.doc.id << "] " << d.doc.title << ": "
                                   << d.doc.text << "\n";
    return out.str();
}

void merge_doc_ids(OperatorOutcome& outcome, const std::vector<retrieval::ScoredDocument>& docs) {
    for (const auto& d : docs) {
        if (std::find(outcome.retrieved_doc_ids.begin(), outcome.retrieved_doc_ids.end(),
                      d.doc.id) == outcome.retrieved_doc_ids.end())
            outcome.retrieved_doc_ids.push_back(d.doc.id);
    }
}

llm::CompletionResponse call(const OperatorEnv& env, const std::string& tag_suffix,
                             std::vector<llm::ChatMessage> messages, double temperature = 0.0) {
    llm::CompletionRequest request;
    request.messages = std::move(messages);
    request.temperature = temperature;
    request.max_output_tokens = 512;
    request.tag = env.tag_prefix + "." + tag_suffix;
    return env.gateway->complete(request);
}

std::string context_block(const OperatorEnv& env) {
    return env.step_context.empty() ? std::string{} : env.step_context + "\n\n";
}

// Retrieves for a query, treating retrieval failures (empty query, no index)
// as an empty candidate set so the caller can fall back to closed-book
// prompting. `propagate_empty_query` preserves the single-step contract,
// which surfaces EmptyQuery to its caller.
std::vector<retrieval::ScoredDocument> try_retrieve(const OperatorEnv& env,
                                                    const std::string& query,
                                                    bool propagate_empty_query = false) {
    if (!env.retriever) return {};
    try {
        return env.retriever(query, retrieval::clamp_k_docs(env.budget.k_docs));
    } catch (const retrieval::RetrievalError& e) {
        if (propagate_empty_query && e.kind() == retrieval::RetrievalErrorKind::EmptyQuery) throw;
        return {};
    }
}

OperatorOutcome answer_leaf_closed_book(const Question& sub, const OperatorEnv& env) {
    OperatorOutcome outcome;
    std::vector<llm::ChatMessage> messages{
        {llm::MessageRole::System,
         "Answer the question concisely from your own knowledge. Finish with one line of the "
         "form 'Answer: <final answer>'."},
        {llm::MessageRole::User, "Question: " + sub.text}};
    const auto response = call(env, "closedbook", std::move(messages));
    outcome.usage += response.usage;
    outcome.reasoning = response.content;
    std::tie(outcome.answer, outcome.answer_is_final) = extract_answer(response.content);
    return outcome;
}

OperatorOutcome answer_sub_question(const std::string& sub_question, const OperatorEnv& env,
                                    LeafMode leaf) {
    Question sub;
    sub.id = "sub";
    sub.text = sub_question;
    switch (leaf) {
        case LeafMode::ClosedBook: return answer_leaf_closed_book(sub, env);
        case LeafMode::SingleStep: return run_single_step(sub, env);
        case LeafMode::IterativeStep: return run_iterative_step(sub, env);
    }
    return answer_leaf_closed_book(sub, env);
}

}  // namespace

Demos Demos::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open demos file: " + path.string());
    nlohmann::json j;
    in >> j;
    Demos demos;
    for (const auto& d : j.at("cot"))
        demos.cot.push_back(CotDemo{d.at("question").get<std::string>(),
                                    d.at("reasoning").get<std::string>(),
                                    d.at("answer").get<std::string>()});
    for (const auto& s : j.at("self_ask")) demos.self_ask.push_back(s.get<std::string>());
    return demos;
}

RetrieverFn make_index_retriever(const retrieval::RetrievalIndex& index) {
    return [&index](const std::string& query, int k) { return retrieval::retrieve_docs(index, query, k); };
}

std::pair<std::string, bool> extract_answer(const std::string& text) {
    if (const auto final = after_marker(text, kFinalAnswerMarker); final && !final->empty())
        return {*final, true};
    if (const auto answer = after_marker(text, kAnswerMarker); answer && !answer->empty())
        return {*answer, true};
    return {last_sentence(text), false};
}

OperatorOutcome run_cot(const Question& q, const OperatorEnv& env) {
    if (!env.demos || env.demos->cot.empty())
        throw std::runtime_error("chain-of-thought demonstrations are not loaded");

    std::ostringstream user;
    for (const auto& demo : env.demos->cot)
        user << "Question: " << demo.question << "\n" << demo.reasoning << "\n"
             << kAnswerMarker << " " << demo.answer << "\n\n";
    user << context_block(env);
    user << "Question: " << q.text << "\nLet's think step by step.";

    std::vector<llm::ChatMessage> messages{
        {llm::MessageRole::System,
         "You are a careful reasoner for multi-hop questions. Think step by step, then give the "
         "final answer on its own line in the form 'Answer: <final answer>'."},
        {llm::MessageRole::User, user.str()}};

    const auto response = call(env, "cot", std::move(messages));
    OperatorOutcome outcome;
    outcome.usage += response.usage;
    outcome.reasoning = response.content;
    std::tie(outcome.answer, outcome.answer_is_final) = extract_answer(response.content);
    return outcome;
}

OperatorOutcome run_single_step(const Question& q, const OperatorEnv& env) {
    OperatorOutcome outcome;
    const auto docs = try_retrieve(env, q.text, /*propagate_empty_query=*/true);
    merge_doc_ids(outcome, docs);

    std::ostringstream user;
    if (!docs.empty()) user << render_docs(docs) << "\n";
    user << context_block(env);
    user << "Question: " << q.text;

    const char* system_text =
        docs.empty()
            ? "No documents were retrieved. Answer the multi-hop question from your own "
              "knowledge. Finish with one line of the form 'Answer: <final answer>'."
            : "Answer the multi-hop question using the retrieved documents above your question. "
              "Finish with one line of the form 'Answer: <final answer>'.";

    std::vector<llm::ChatMessage> messages{{llm::MessageRole::System, system_text},
                                           {llm::MessageRole::User, user.str()}};
    const auto response = call(env, "singlestep", std::move(messages));
    outcome.usage += response.usage;
    outcome.reasoning = response.content;
    std::tie(outcome.answer, outcome.answer_is_final) = extract_answer(response.content);
    return outcome;
}

OperatorOutcome run_sub_step(const Question& q, const OperatorEnv& env, LeafMode leaf) {
    OperatorOutcome outcome;

    std::ostringstream system;
    system << "You solve a multi-hop question by asking follow-up sub-questions one at a time. "
              "Are follow-up questions needed? If yes, reply with one line '"
           << kFollowUpMarker << " <sub-question>'. If no, reply with one line '"
           << kFinalAnswerMarker << " <answer>'.";
    std::ostringstream demos;
    if (env.demos)
        for (const auto& example : env.demos->self_ask) demos << example << "\n\n";

    std::string transcript = context_block(env) + "Question: " + q.text;

    const auto main_call = [&](bool force_final) {
        std::string user = demos.str() + transcript;
        if (force_final)
            user += std::string("\nNo more follow-up questions are allowed. Reply now with one "
                                "line '") +
                    std::string(kFinalAnswerMarker) + " <answer>'.";
        std::vector<llm::ChatMessage> messages{{llm::MessageRole::System, system.str()},
                                               {llm::MessageRole::User, user}};
        return call(env, "substep", std::move(messages));
    };

    int follow_ups = 0;
    while (true) {
        const bool budget_reached = follow_ups >= env.budget.max_iterations;
        const auto response = main_call(budget_reached);
        outcome.usage += response.usage;
        outcome.reasoning += response.content + "\n";

        if (const auto final = after_marker(response.content, kFinalAnswerMarker)) {
            outcome.answer = *final;
            outcome.answer_is_final = true;
            outcome.budget_exhausted = budget_reached;
            break;
        }
        const auto follow_up =
            budget_reached ? std::nullopt : after_marker(response.content, kFollowUpMarker);
        if (!follow_up || follow_up->empty()) {
            // Neither marker (or the budget forbids further follow-ups):
            // treat the response as the answer attempt.
            std::tie(outcome.answer, outcome.answer_is_final) =
                extract_answer(response.content);
            outcome.budget_exhausted = budget_reached;
            break;
        }

        OperatorEnv leaf_env = env;
        leaf_env.step_context.clear();
        auto sub_outcome = answer_sub_question(*follow_up, leaf_env, leaf);
        outcome.usage += sub_outcome.usage;
        for (const auto& id : sub_outcome.retrieved_doc_ids)
            if (std::find(outcome.retrieved_doc_ids.begin(), outcome.retrieved_doc_ids.end(),
                          id) == outcome.retrieved_doc_ids.end())
                outcome.retrieved_doc_ids.push_back(id);
        transcript += "\n" + std::string(kFollowUpMarker) + " " + *follow_up +
                      "\nIntermediate answer: " + sub_outcome.answer;
        outcome.sub_results.emplace_back(*follow_up, std::move(sub_outcome));
        ++follow_ups;
    }
    return outcome;
}

OperatorOutcome run_iterative_step(const Question& q, const OperatorEnv& env) {
    OperatorOutcome outcome;
    std::vector<retrieval::ScoredDocument> accumulated;
    std::vector<std::string> seen_ids;
    std::string reasoning_so_far;
    std::string next_query = q.text;

    const auto reason_call = [&](bool force_final) {
        std::ostringstream user;
        if (!accumulated.empty()) user << render_docs(accumulated) << "\n";
        user << context_block(env);
        user << "Question: " << q.text << "\n";
        if (!reasoning_so_far.empty()) user << "Reasoning so far:\n" << reasoning_so_far;
        if (force_final)
            user << "\nThe retrieval budget is spent. Reply now with one line '"
                 << kFinalAnswerMarker << " <answer>'.";
        std::vector<llm::ChatMessage> messages{
            {llm::MessageRole::System,
             std::string("You answer a multi-hop question by interleaving retrieval and "
                         "reasoning. Using the documents and your reasoning so far, write the "
                         "next single reasoning sentence. When the answer is known, reply with "
                         "one line '") +
                 std::string(kFinalAnswerMarker) + " <answer>'."},
            {llm::MessageRole::User, user.str()}};
        return call(env, "iterative", std::move(messages));
    };

    for (int round = 1; round <= env.budget.max_iterations; ++round) {
        const auto docs = try_retrieve(env, next_query);
        for (const auto& d : docs) {
            if (std::find(seen_ids.begin(), seen_ids.end(), d.doc.id) == seen_ids.end()) {
                seen_ids.push_back(d.doc.id);
                accumulated.push_back(d);
            }
        }
        merge_doc_ids(outcome, docs);

        const auto response = reason_call(false);
        outcome.usage += response.usage;
        outcome.reasoning += response.content + "\n";

        if (const auto final = after_marker(response.content, kFinalAnswerMarker)) {
            outcome.answer = *final;
            outcome.answer_is_final = true;
            return outcome;
        }
        const std::string sentence = last_nonempty_line(response.content);
        reasoning_so_far += sentence + "\n";
        next_query = sentence.empty() ? q.text : sentence;
    }

    // Round cap reached without a final answer: force one.
    outcome.budget_exhausted = true;
    const auto response = reason_call(true);
    outcome.usage += response.usage;
    outcome.reasoning += response.content + "\n";
    std::tie(outcome.answer, outcome.answer_is_final) = extract_answer(response.content);
    return outcome;
}

OperatorOutcome run_adaptive_step(const Question& q, const QuestionType& type,
                                  const OperatorEnv& env) {
    const std::string label = lowercase(type.label);

    std::string route;
    OperatorOutcome outcome;
    if (label == "null" || label.find("null") != std::string::npos) {
        route = "closed-book chain-of-thought";
        outcome = run_cot(q, env);
    } else if (label.find("inference") != std::string::npos ||
               label.find("compositional") != std::string::npos) {
        route = "sub-step + iterative-step";
        outcome = run_sub_step(q, env, LeafMode::IterativeStep);
    } else {
        // Comparison, Temporal and unmapped labels take the lighter pipeline.
        route = "sub-step + single-step";
        outcome = run_sub_step(q, env, LeafMode::SingleStep);
    }
    outcome.reasoning =
        "[adaptive routing: " + type.label + " -> " + route + "]\n" + outcome.reasoning;
    return outcome;
}

}  // namespace belle::ops
