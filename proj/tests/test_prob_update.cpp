#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "gramevo/prob_update.hpp"
#include "gramevo/rng.hpp"
#include "support.hpp"

using namespace gramevo;

namespace {

ExpansionCounters counters_for(const Grammar& g, std::vector<std::vector<int>> counts) {
    ExpansionCounters c = ExpansionCounters::zeros(g);
    c.counts = std::move(counts);
    return c;
}

}  // namespace

TEST_CASE("learning factor domain") {
    CHECK(LearningFactor{}.value == 0.01);
    CHECK(LearningFactor(0.0).value == 0.0);
    CHECK(LearningFactor(1.0).value == 1.0);
    CHECK_THROWS_AS(LearningFactor(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(LearningFactor(1.01), std::invalid_argument);
}

TEST_CASE("worked single-generation update lands on the hand-computed 3-decimal values") {
    PCFG pcfg = testsupport::small_pcfg();
    const Grammar& g = pcfg.grammar;
    auto nt = [&](const char* name) { return static_cast<std::size_t>(g.index_of(name)); };

    // The reference walkthrough starts the 3-way operator at 0.33 per
    // alternative rather than 1/3; replicate that starting state.
    pcfg.probs[nt("op")] = {0.33, 0.33, 0.33};

    ExpansionCounters counters = counters_for(
        g, {{1},          // start
            {1, 2},       // expr: one recursion, two variable expansions
            {0, 1, 0},    // op: one '*'
            {2, 0}});     // var: two 'x'
    PCFG updated = update_probabilities(pcfg, counters, LearningFactor(0.01));

    const double tol = 2e-3;
    CHECK(updated.probs[nt("start")][0] == 1.0);
    CHECK(std::abs(updated.probs[nt("expr")][0] - 0.498) <= tol);
    CHECK(std::abs(updated.probs[nt("expr")][1] - 0.502) <= tol);
    CHECK(std::abs(updated.probs[nt("op")][0] - 0.329) <= tol);
    CHECK(std::abs(updated.probs[nt("op")][1] - 0.342) <= tol);
    CHECK(std::abs(updated.probs[nt("op")][2] - 0.329) <= tol);
    CHECK(std::abs(updated.probs[nt("var")][0] - 0.508) <= tol);
    CHECK(std::abs(updated.probs[nt("var")][1] - 0.493) <= tol);

    // Exact arithmetic for the same scenario, before tolerances.
    CHECK(updated.probs[nt("expr")][0] == doctest::Approx(0.4983333333333333).epsilon(1e-12));
    CHECK(updated.probs[nt("expr")][1] == doctest::Approx(0.5016666666666667).epsilon(1e-12));
    CHECK(updated.probs[nt("var")][0] == doctest::Approx(0.5075).epsilon(1e-12));
    CHECK(updated.probs[nt("var")][1] == doctest::Approx(0.4925).epsilon(1e-12));
    CHECK(validate(updated).empty());
}

TEST_CASE("a used single-production nonterminal keeps probability exactly 1") {
    Grammar g = parse_bnf("<s> ::= a <t> | b\n<t> ::= c\n");
    PCFG pcfg = to_pcfg(g);
    for (int uses : {1, 3, 100}) {
        PCFG updated =
            update_probabilities(pcfg, counters_for(g, {{1, 0}, {uses}}), LearningFactor(0.25));
        CHECK(updated.probs[1][0] == 1.0);
    }
}

TEST_CASE("an entirely unused nonterminal keeps its uniform distribution") {
    PCFG pcfg = testsupport::small_pcfg();
    const Grammar& g = pcfg.grammar;
    ExpansionCounters untouched = ExpansionCounters::zeros(g);
    PCFG updated = update_probabilities(pcfg, untouched, LearningFactor(0.01));
    for (std::size_t nt = 0; nt < updated.probs.size(); ++nt)
        for (std::size_t i = 0; i < updated.probs[nt].size(); ++i)
            CHECK(updated.probs[nt][i] ==
                  doctest::Approx(pcfg.probs[nt][i]).epsilon(1e-12));
}

TEST_CASE("zero learning factor is an exact fixed point") {
    PCFG pcfg = testsupport::small_pcfg();
    pcfg.probs[1] = {0.125, 0.875};
    ExpansionCounters counters = counters_for(pcfg.grammar, {{3}, {5, 2}, {1, 0, 4}, {2, 2}});
    PCFG updated = update_probabilities(pcfg, counters, LearningFactor(0.0));
    CHECK(updated.probs == pcfg.probs);
}

TEST_CASE("used productions gain probability at the expense of unused ones") {
    PCFG pcfg = testsupport::small_pcfg();
    std::size_t op = static_cast<std::size_t>(pcfg.grammar.index_of("op"));
    PCFG updated = update_probabilities(
        pcfg, counters_for(pcfg.grammar, {{0}, {0, 0}, {4, 0, 0}, {0, 0}}), LearningFactor(0.05));
    CHECK(updated.probs[op][0] > pcfg.probs[op][0]);
    CHECK(updated.probs[op][1] < pcfg.probs[op][1]);
    CHECK(updated.probs[op][2] < pcfg.probs[op][2]);
}

TEST_CASE("repeated adaptation toward one production saturates near 1") {
    Grammar g = parse_bnf("<s> ::= a | b | c\n");
    PCFG pcfg = to_pcfg(g);
    for (int step = 0; step < 2000; ++step)
        pcfg = update_probabilities(pcfg, counters_for(g, {{5, 0, 0}}), LearningFactor(0.05));
    CHECK(pcfg.probs[0][0] > 0.95);
    double sum = std::accumulate(pcfg.probs[0].begin(), pcfg.probs[0].end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("randomized update cycles keep distributions normalized") {
    Rng rng(555);
    Grammar g = testsupport::small_pcfg().grammar;
    PCFG pcfg = to_pcfg(g);
    for (int cycle = 0; cycle < 1000; ++cycle) {
        ExpansionCounters counters = ExpansionCounters::zeros(g);
        for (auto& row : counters.counts)
            for (int& c : row) c = static_cast<int>(rng.below(6));
        double lambda = rng.uniform01();
        pcfg = update_probabilities(pcfg, counters, LearningFactor(lambda));
        for (std::size_t nt = 0; nt < pcfg.probs.size(); ++nt) {
            double sum = 0.0;
            for (double p : pcfg.probs[nt]) {
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
                sum += p;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("shape mismatches are rejected") {
    PCFG pcfg = testsupport::small_pcfg();
    ExpansionCounters wrong_rows = ExpansionCounters::zeros(pcfg.grammar);
    wrong_rows.counts.pop_back();
    CHECK_THROWS_AS(update_probabilities(pcfg, wrong_rows, LearningFactor(0.01)),
                    std::invalid_argument);

    ExpansionCounters wrong_cols = ExpansionCounters::zeros(pcfg.grammar);
    wrong_cols.counts[1].push_back(0);
    CHECK_THROWS_AS(update_probabilities(pcfg, wrong_cols, LearningFactor(0.01)),
                    std::invalid_argument);
}

TEST_CASE("renormalize nudges sums back to one") {
    std::vector<double> fixed = renormalize({0.25, 0.25, 0.5});
    CHECK(fixed == std::vector<double>{0.25, 0.25, 0.5});  // already normalized: untouched

    std::vector<double> lifted = renormalize({0.2, 0.2});
    CHECK(lifted[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lifted[1] == doctest::Approx(0.5).epsilon(1e-12));

    std::vector<double> clamped = renormalize({1.0, 1.0, 0.0});
    double sum = std::accumulate(clamped.begin(), clamped.end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    for (double p : clamped) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    CHECK(renormalize({}).empty());
}
