#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gramevo/grammar.hpp"
#include "gramevo/mapper.hpp"
#include "gramevo/prob_update.hpp"
#include "gramevo/rng.hpp"

namespace gramevo {

/// Fitness sentinel assigned to individuals whose mapping failed. Strictly
/// worse than any reachable error value, since expression evaluation clamps
/// intermediates to +/-1e100 and keeps all fitnesses far below DBL_MAX.
inline constexpr double kWorstFitness = std::numeric_limits<double>::max();

enum class Algorithm { GE, PGE };

struct Individual {
    Genotype genotype;
    MappingResult mapping;
    double fitness = kWorstFitness;
};

struct EngineConfig {
    Algorithm algorithm = Algorithm::PGE;
    int population_size = 1000;
    int generations = 50;
    double elitism_fraction = 0.10;
    double mutation_prob = 0.05;   // per codon
    double crossover_prob = 0.90;  // per pair
    int tournament_size = 3;
    int genotype_length = 128;
    int max_wraps = 0;
    LearningFactor lambda{};
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument naming the first field out of range.
    void check() const;
};

struct GenerationStats {
    int generation = 0;
    double best_fitness = kWorstFitness;       // best of this generation
    double best_ever_fitness = kWorstFitness;  // best seen up to and including it
    double mean_fitness = kWorstFitness;       // over valid individuals only
    int invalid_count = 0;
};

/// Best individual seen so far, frozen at the moment of discovery. Under
/// grammar adaptation the same genotype may later map differently, so the
/// phenotype, fitness, and expansion counters are all captured here.
struct BestSnapshot {
    bool set = false;
    bool valid = false;
    std::string phenotype;  // empty when not valid
    double fitness = kWorstFitness;
    ExpansionCounters counters;
    int generation = -1;
};

struct RunTrace {
    std::vector<GenerationStats> per_generation;
    // Probabilities in effect when each generation was mapped (same shape as
    // PCFG::probs); empty for GE.
    std::vector<std::vector<std::vector<double>>> prob_snapshots;
    std::optional<PCFG> final_pcfg;  // grammar after the last adaptation; PGE only
    BestSnapshot best_ever;
};

using FitnessFn = std::function<double(const std::string& phenotype)>;

std::vector<Genotype> init_population(const EngineConfig& config, Rng& rng);

/// Samples tournament_size individuals uniformly with replacement and returns
/// the one with the lowest fitness; ties go to the earliest-sampled.
const Individual& tournament_select(const std::vector<Individual>& population,
                                    int tournament_size, Rng& rng);

/// With probability crossover_prob swaps the tails of the two genotypes at a
/// cut point drawn uniformly from [1, length-1]; otherwise (or when the
/// genotypes are too short to cut) returns plain copies.
std::pair<Genotype, Genotype> one_point_crossover(const Genotype& a, const Genotype& b,
                                                  double crossover_prob, Rng& rng);

/// Replaces each codon independently with probability mutation_prob by a
/// fresh uniform draw from the codon domain.
void mutate(Genotype& genotype, double mutation_prob, Rng& rng);

/// Grammar-adaptation alternation: even generations adapt towards the best
/// individual of the generation, odd ones towards the best found overall.
const BestSnapshot& choose_adaptation_individual(int generation, const BestSnapshot& best_of_gen,
                                                 const BestSnapshot& best_overall);

/// Runs the generational loop and returns its trace. Generation 0 is the
/// initial random population; `generations` reproduction steps follow, so the
/// trace holds generations+1 records. The fitness function receives mapped
/// phenotypes; invalid individuals get kWorstFitness without a call.
RunTrace run(const EngineConfig& config, const Grammar& grammar, const FitnessFn& fitness_fn);

}  // namespace gramevo
