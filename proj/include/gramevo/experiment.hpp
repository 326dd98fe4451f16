#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gramevo/engine.hpp"
#include "gramevo/problems.hpp"

namespace gramevo {

enum class ProblemKind { Pagie, Boston };

struct ExperimentSpec {
    Algorithm algorithm = Algorithm::PGE;
    ProblemKind problem = ProblemKind::Pagie;
    std::string grammar_path;
    int runs = 1;
    std::uint64_t base_seed = 0;  // run r uses seed base_seed + r
    EngineConfig engine;          // engine.seed is overwritten per run
    std::string output_dir = "out";
    PagieGrid pagie_grid = PagieGrid::Paper;
    std::string boston_csv = "data/boston.csv";
    // Housing train/test split: fixed seed for every run when set, otherwise
    // each run reshuffles with its own seed.
    std::optional<std::uint64_t> split_seed;
    int threads = 1;  // runs are independent; results are ordered by run index
};

struct RunResult {
    int run = 0;
    std::uint64_t seed = 0;
    RunTrace trace;
    double train_fitness = kWorstFitness;
    std::optional<double> test_fitness;  // present when the problem has a test split
    std::string phenotype;               // empty when no valid individual was found
};

struct SummaryRecord {
    int runs = 0;
    double mean_train = 0.0;
    double std_train = 0.0;  // population standard deviation
    std::optional<double> mean_test;
    std::optional<double> std_test;
};

struct ExperimentResult {
    std::vector<RunResult> runs;
    SummaryRecord summary;
};

/// Executes spec.runs independent seeded runs and writes fitness.csv,
/// probs.csv (PGE only), summary.csv, and best.txt into spec.output_dir
/// (created if missing). Output bytes depend only on the spec.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Mean and population standard deviation of each run's final best-ever
/// fitness across one or more fitness.csv files.
SummaryRecord summarize(const std::vector<std::string>& fitness_csv_paths);

struct ProductionProbability {
    int production_index = 0;
    std::string production_text;
    double mean_probability = 0.0;
};

/// Averages the final-generation probabilities of one nonterminal's
/// productions across all runs in the given probs.csv files, sorted by
/// descending probability. Throws when the nonterminal never appears.
std::vector<ProductionProbability> dump_final_probs(
    const std::vector<std::string>& probs_csv_paths, const std::string& nonterminal);

}  // namespace gramevo
