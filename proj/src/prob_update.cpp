#include "gramevo/prob_update.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gramevo {

LearningFactor::LearningFactor(double v) : value(v) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("learning factor must lie in [0,1]");
}

std::vector<double> renormalize(std::vector<double> probs) {
    if (probs.empty()) return probs;
    const double j = static_cast<double>(probs.size());
    for (int pass = 0; pass < 100; ++pass) {
        double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
        if (std::abs(sum - 1.0) <= 1e-9) return probs;
        double extra = (1.0 - sum) / j;
        for (double& p : probs) p = std::clamp(p + extra, 0.0, 1.0);
    }
    throw std::runtime_error("renormalize did not converge in 100 passes");
}

PCFG update_probabilities(const PCFG& pcfg, const ExpansionCounters& counters,
                          LearningFactor lambda) {
    const Grammar& g = pcfg.grammar;
    if (counters.counts.size() != g.productions.size())
        throw std::invalid_argument("counter table does not match grammar");

    PCFG out = pcfg;
    for (std::size_t nt = 0; nt < g.productions.size(); ++nt) {
        const std::vector<int>& row = counters.counts[nt];
        std::vector<double>& probs = out.probs[nt];
        if (row.size() != probs.size())
            throw std::invalid_argument("counter row does not match productions of <" +
                                        g.nonterminals[nt] + ">");

        long long total = std::accumulate(row.begin(), row.end(), 0LL);
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (row[i] > 0)
                probs[i] = std::min(
                    probs[i] + lambda.value * static_cast<double>(row[i]) /
                                   static_cast<double>(total),
                    1.0);
            else
                probs[i] = probs[i] - lambda.value * probs[i];
        }
        probs = renormalize(std::move(probs));
    }
    return out;
}

}  // namespace gramevo
