#include "belle/attitude.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <sstream>

namespace belle::eval {
namespace {

AttitudeMatrix weighted_sum(const AttitudeMatrix& a, const AttitudeMatrix& b,
                            const AttitudeMatrix& c, const AttitudeMatrix& d, double w_ab,
                            double w_cd) {
    AttitudeMatrix out;
    for (int i = 0; i < kOperatorCount; ++i)
        for (int j = 0; j < kOperatorCount; ++j)
            out[i][j] = w_ab * (a[i][j] + b[i][j]) + w_cd * (c[i][j] + d[i][j]);
    return out;
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Longest phrase appearing in the response wins, so "very similar" is not
// shadowed by "similar".
double map_phrase(const std::string& response, const AnalysisConfig& cfg) {
    const std::string haystack = lowercase(response);
    const std::string* best = nullptr;
    double best_score = 0.0;
    std::size_t best_len = 0;
    for (const auto& [phrase, score] : cfg.similarity_phrase_map) {
        if (haystack.find(lowercase(phrase)) == std::string::npos) continue;
        if (phrase.size() > best_len) {
            best = &phrase;
            best_len = phrase.size();
            best_score = score;
        }
    }
    if (!best) {
        std::cerr << "warning: unmapped similarity phrase, scoring 0: " << response << "\n";
        return 0.0;
    }
    return best_score;
}

std::string combined_round_content(const Transcript& t, Role role, int round) {
    std::string joined;
    for (const auto& u : t.utterances) {
        if (u.role != role || u.round != round) continue;
        if (!joined.empty()) joined += "\n";
        joined += u.content;
    }
    return joined;
}

}  // namespace

AttitudeMatrix zero_matrix() {
    AttitudeMatrix m{};
    for (auto& row : m) row.fill(0.0);
    return m;
}

AttitudeMatrix combine_first_to_second(const AttitudeMatrix& f_ad, const AttitudeMatrix& f_nd,
                                       const AttitudeMatrix& f_fast, const AttitudeMatrix& f_slow,
                                       double alpha) {
    return weighted_sum(f_ad, f_nd, f_fast, f_slow, alpha, 1.0 - alpha);
}

AttitudeMatrix combine_second_to_first(const AttitudeMatrix& f_ad, const AttitudeMatrix& f_nd,
                                       const AttitudeMatrix& f_fast_prev,
                                       const AttitudeMatrix& f_slow_prev, double beta) {
    return weighted_sum(f_ad, f_nd, f_fast_prev, f_slow_prev, beta, 1.0 - beta);
}

AttitudeMatrix debater_matrix(const std::string& utterance_content,
                              const std::vector<Operator>& pool, const AnalysisConfig& cfg,
                              llm::Gateway& scorer) {
    if (pool.size() != kOperatorCount)
        throw std::invalid_argument("attitude scoring needs the full 5-operator pool");

    std::ostringstream phrases;
    {
        bool first = true;
        for (const auto& [phrase, _] : cfg.similarity_phrase_map) {
            if (!first) phrases << ", ";
            phrases << "'" << phrase << "'";
            first = false;
        }
    }

    AttitudeMatrix m = zero_matrix();
    for (int i = 0; i < kOperatorCount; ++i) {
        for (int j = 0; j < kOperatorCount; ++j) {
            std::ostringstream user;
            user << "Debater viewpoint:\n" << utterance_content << "\n\n"
                 << "Combined-operator template: first apply " << to_string(pool[i].kind) << " ("
                 << pool[i].description << "), then apply " << to_string(pool[j].kind) << " ("
                 << pool[j].description << ").\n\n"
                 << "How similar is the viewpoint to this operator combination? Reply with "
                    "exactly one of: "
                 << phrases.str() << ".";
            llm::CompletionRequest request;
            request.messages = {{llm::MessageRole::System,
                                 "You rate the similarity between a debate viewpoint and an "
                                 "operator combination."},
                                {llm::MessageRole::User, user.str()}};
            request.temperature = 0.0;
            request.max_output_tokens = 8;
            request.tag = "eval.attitude";
            m[i][j] = map_phrase(scorer.complete(request).content, cfg);
        }
    }
    return m;
}

std::vector<RoundAttitude> attitude_scores(const Transcript& transcript,
                                           const std::vector<Operator>& pool,
                                           const AnalysisConfig& cfg, llm::Gateway& scorer) {
    int max_round = 0;
    for (const auto& u : transcript.utterances) max_round = std::max(max_round, u.round);

    // Per-debater matrices per round; same-role co-debaters are scored as
    // one concatenated utterance, matching how the engine feeds level 2.
    std::map<int, std::map<Role, AttitudeMatrix>> per_round;
    for (int t = 1; t <= max_round; ++t) {
        for (Role role : {Role::Affirmative, Role::Negative, Role::Fast, Role::Slow}) {
            const auto content = combined_round_content(transcript, role, t);
            per_round[t][role] =
                content.empty() ? zero_matrix() : debater_matrix(content, pool, cfg, scorer);
        }
    }

    std::vector<RoundAttitude> out;
    for (int t = 1; t <= max_round; ++t) {
        RoundAttitude round;
        round.round = t;
        const auto& current = per_round[t];
        round.first_to_second =
            combine_first_to_second(current.at(Role::Affirmative), current.at(Role::Negative),
                                    current.at(Role::Fast), current.at(Role::Slow), cfg.alpha);
        const AttitudeMatrix fast_prev =
            t > 1 ? per_round[t - 1].at(Role::Fast) : zero_matrix();
        const AttitudeMatrix slow_prev =
            t > 1 ? per_round[t - 1].at(Role::Slow) : zero_matrix();
        round.second_to_first =
            combine_second_to_first(current.at(Role::Affirmative), current.at(Role::Negative),
                                    fast_prev, slow_prev, cfg.beta);
        out.push_back(round);
    }
    return out;
}

}  // namespace belle::eval
