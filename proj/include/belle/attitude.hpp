#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "belle/gateway.hpp"
#include "belle/types.hpp"

namespace belle::eval {

/// 5x5 operator-pair score matrix, rows and columns indexed by OperatorKind.
using AttitudeMatrix = std::array<std::array<double, kOperatorCount>, kOperatorCount>;

AttitudeMatrix zero_matrix();

struct AnalysisConfig {
    double alpha = 0.8;
    double beta = 0.8;
    std::map<std::string, double> similarity_phrase_map = {
        {"identical", 1.0},      {"very similar", 0.7}, {"similar", 0.5},
        {"somewhat related", 0.3}, {"unrelated", 0.0},
    };
};

/// alpha*(F_ad + F_nd) + (1-alpha)*(F_fast + F_slow): how the same-round
/// first level moves the second level.
AttitudeMatrix combine_first_to_second(const AttitudeMatrix& f_ad, const AttitudeMatrix& f_nd,
                                       const AttitudeMatrix& f_fast, const AttitudeMatrix& f_slow,
                                       double alpha);

/// beta*(F_ad + F_nd) + (1-beta)*(F_fast_prev + F_slow_prev): how the
/// previous round's second level moves the current first level.
AttitudeMatrix combine_second_to_first(const AttitudeMatrix& f_ad, const AttitudeMatrix& f_nd,
                                       const AttitudeMatrix& f_fast_prev,
                                       const AttitudeMatrix& f_slow_prev, double beta);

/// Scores one utterance against every operator pair: the scorer backend is
/// asked to rate the similarity between the utterance and a template naming
/// the pair, and the returned phrase is mapped through
/// similarity_phrase_map (unmapped phrases score 0 with a warning on
/// stderr).
AttitudeMatrix debater_matrix(const std::string& utterance_content,
                              const std::vector<Operator>& pool, const AnalysisConfig& cfg,
                              llm::Gateway& scorer);

struct RoundAttitude {
    int round = 1;
    AttitudeMatrix first_to_second;  // F_{f^t -> s^t}
    AttitudeMatrix second_to_first;  // F_{s^{t-1} -> f^t}
};

/// Per-round combined matrices for one transcript. Round 1 uses zero
/// matrices for the nonexistent round-0 second level.
std::vector<RoundAttitude> attitude_scores(const Transcript& transcript,
                                           const std::vector<Operator>& pool,
                                           const AnalysisConfig& cfg, llm::Gateway& scorer);

}  // namespace belle::eval
