#pragma once

#include <vector>

#include "gramevo/grammar.hpp"
#include "gramevo/mapper.hpp"

namespace gramevo {

/// Smooths per-generation probability adjustments; 0 freezes the grammar,
/// 1 moves it as far as one generation's counters allow.
struct LearningFactor {
    double value = 0.01;

    LearningFactor() = default;
    explicit LearningFactor(double v);
};

/// Equal-share renormalization: repeatedly add (1 - sum)/k to every entry,
/// clamping to [0,1] after each pass, until the sum is 1 within 1e-9.
/// Throws std::runtime_error if 100 passes are not enough (degenerate input).
std::vector<double> renormalize(std::vector<double> probs);

/// Returns a new PCFG adjusted toward the expansion counts of one individual:
/// productions it used gain probability proportional to their share of the
/// nonterminal's selections, unused ones decay by the learning factor, and
/// every nonterminal's distribution is renormalized. The input is not touched.
/// Throws std::invalid_argument when counters do not match the grammar shape.
PCFG update_probabilities(const PCFG& pcfg, const ExpansionCounters& counters,
                          LearningFactor lambda);

}  // namespace gramevo
