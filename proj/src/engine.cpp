#include "gramevo/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace gramevo {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

int elite_count(const EngineConfig& config) {
    // Nudge before flooring so fractions like 0.3*10 land on the intended count.
    return static_cast<int>(config.elitism_fraction * config.population_size + 1e-9);
}

Genotype random_genotype(Algorithm algorithm, int length, Rng& rng) {
    Genotype g;
    if (algorithm == Algorithm::GE) {
        g.mode = CodonMode::GE;
        g.int_codons.reserve(static_cast<std::size_t>(length));
        for (int i = 0; i < length; ++i)
            g.int_codons.push_back(static_cast<int>(rng.below(256)));
    } else {
        g.mode = CodonMode::PGE;
        g.float_codons.reserve(static_cast<std::size_t>(length));
        for (int i = 0; i < length; ++i) g.float_codons.push_back(rng.uniform01());
    }
    return g;
}

// Indices of the population sorted best-first; stable so equal fitnesses
// keep their population order.
std::vector<int> ranked_indices(const std::vector<Individual>& population) {
    std::vector<int> order(population.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return population[static_cast<std::size_t>(a)].fitness <
               population[static_cast<std::size_t>(b)].fitness;
    });
    return order;
}

}  // namespace

void EngineConfig::check() const {
    require(population_size >= 1, "population_size must be >= 1");
    require(tournament_size >= 1, "tournament_size must be >= 1");
    require(tournament_size <= population_size, "tournament_size must not exceed population_size");
    require(generations >= 0, "generations must be >= 0");
    require(elitism_fraction >= 0.0 && elitism_fraction <= 1.0,
            "elitism_fraction must be in [0,1]");
    require(mutation_prob >= 0.0 && mutation_prob <= 1.0, "mutation_prob must be in [0,1]");
    require(crossover_prob >= 0.0 && crossover_prob <= 1.0, "crossover_prob must be in [0,1]");
    require(genotype_length >= 1, "genotype_length must be >= 1");
    require(max_wraps >= 0, "max_wraps must be >= 0");
}

std::vector<Genotype> init_population(const EngineConfig& config, Rng& rng) {
    config.check();
    std::vector<Genotype> population;
    population.reserve(static_cast<std::size_t>(config.population_size));
    for (int i = 0; i < config.population_size; ++i)
        population.push_back(random_genotype(config.algorithm, config.genotype_length, rng));
    return population;
}

const Individual& tournament_select(const std::vector<Individual>& population,
                                    int tournament_size, Rng& rng) {
    if (population.empty()) throw std::invalid_argument("tournament over empty population");
    std::size_t best = rng.below(population.size());
    for (int i = 1; i < tournament_size; ++i) {
        std::size_t contender = rng.below(population.size());
        if (population[contender].fitness < population[best].fitness) best = contender;
    }
    return population[best];
}

std::pair<Genotype, Genotype> one_point_crossover(const Genotype& a, const Genotype& b,
                                                  double crossover_prob, Rng& rng) {
    if (a.mode != b.mode) throw std::invalid_argument("crossover requires matching codon modes");
    if (a.size() != b.size())
        throw std::invalid_argument("crossover requires equal genotype lengths");

    std::pair<Genotype, Genotype> children{a, b};
    bool cross = rng.uniform01() < crossover_prob;
    if (!cross || a.size() < 2) return children;

    std::size_t cut = 1 + rng.below(a.size() - 1);
    auto swap_tails = [cut](auto& x, auto& y) {
        std::swap_ranges(x.begin() + static_cast<std::ptrdiff_t>(cut), x.end(),
                         y.begin() + static_cast<std::ptrdiff_t>(cut));
    };
    if (a.mode == CodonMode::GE)
        swap_tails(children.first.int_codons, children.second.int_codons);
    else
        swap_tails(children.first.float_codons, children.second.float_codons);
    return children;
}

void mutate(Genotype& genotype, double mutation_prob, Rng& rng) {
    if (genotype.mode == CodonMode::GE) {
        for (int& codon : genotype.int_codons)
            if (rng.uniform01() < mutation_prob) codon = static_cast<int>(rng.below(256));
    } else {
        for (double& codon : genotype.float_codons)
            if (rng.uniform01() < mutation_prob) codon = rng.uniform01();
    }
}

const BestSnapshot& choose_adaptation_individual(int generation, const BestSnapshot& best_of_gen,
                                                 const BestSnapshot& best_overall) {
    return generation % 2 == 0 ? best_of_gen : best_overall;
}

RunTrace run(const EngineConfig& config, const Grammar& grammar, const FitnessFn& fitness_fn) {
    config.check();

    Rng rng(config.seed);
    std::vector<Genotype> genotypes = init_population(config, rng);
    std::vector<Individual> population(genotypes.size());

    PCFG pcfg;
    if (config.algorithm == Algorithm::PGE) pcfg = to_pcfg(grammar);

    RunTrace trace;
    trace.per_generation.reserve(static_cast<std::size_t>(config.generations) + 1);

    // A phenotype's fitness is independent of the grammar that produced it,
    // so one cache serves the whole run even as PGE probabilities shift.
    std::unordered_map<std::string, double> fitness_cache;

    for (int gen = 0; gen <= config.generations; ++gen) {
        for (std::size_t i = 0; i < genotypes.size(); ++i) {
            Individual& ind = population[i];
            ind.genotype = std::move(genotypes[i]);
            ind.mapping = config.algorithm == Algorithm::GE
                              ? map_ge(ind.genotype, grammar, config.max_wraps)
                              : map_pge(ind.genotype, pcfg, config.max_wraps);
            if (ind.mapping.valid) {
                auto [it, fresh] = fitness_cache.try_emplace(*ind.mapping.phenotype, 0.0);
                if (fresh) it->second = fitness_fn(it->first);
                ind.fitness = it->second;
            } else {
                ind.fitness = kWorstFitness;
            }
        }

        int best_index = 0;
        GenerationStats stats;
        stats.generation = gen;
        double valid_sum = 0.0;
        int valid_count = 0;
        for (std::size_t i = 0; i < population.size(); ++i) {
            const Individual& ind = population[i];
            if (ind.fitness < stats.best_fitness) {
                stats.best_fitness = ind.fitness;
                best_index = static_cast<int>(i);
            }
            if (ind.mapping.valid) {
                valid_sum += ind.fitness;
                ++valid_count;
            } else {
                ++stats.invalid_count;
            }
        }
        if (valid_count > 0) stats.mean_fitness = valid_sum / valid_count;

        const Individual& gen_best = population[static_cast<std::size_t>(best_index)];
        BestSnapshot snapshot;
        snapshot.set = true;
        snapshot.valid = gen_best.mapping.valid;
        snapshot.phenotype = gen_best.mapping.valid ? *gen_best.mapping.phenotype : "";
        snapshot.fitness = gen_best.fitness;
        snapshot.counters = gen_best.mapping.counters;
        snapshot.generation = gen;
        if (!trace.best_ever.set || snapshot.fitness < trace.best_ever.fitness)
            trace.best_ever = snapshot;

        stats.best_ever_fitness = trace.best_ever.fitness;
        trace.per_generation.push_back(stats);

        if (config.algorithm == Algorithm::PGE) {
            trace.prob_snapshots.push_back(pcfg.probs);
            const BestSnapshot& adapt =
                choose_adaptation_individual(gen, snapshot, trace.best_ever);
            pcfg = update_probabilities(pcfg, adapt.counters, config.lambda);
        }

        if (gen == config.generations) break;

        std::vector<Genotype> next;
        next.reserve(population.size());
        std::vector<int> order = ranked_indices(population);
        int elites = elite_count(config);
        for (int e = 0; e < elites && next.size() < population.size(); ++e)
            next.push_back(population[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])]
                               .genotype);
        while (next.size() < population.size()) {
            const Individual& p1 = tournament_select(population, config.tournament_size, rng);
            const Individual& p2 = tournament_select(population, config.tournament_size, rng);
            auto [c1, c2] = one_point_crossover(p1.genotype, p2.genotype, config.crossover_prob,
                                                rng);
            mutate(c1, config.mutation_prob, rng);
            mutate(c2, config.mutation_prob, rng);
            next.push_back(std::move(c1));
            if (next.size() < population.size()) next.push_back(std::move(c2));
        }
        genotypes = std::move(next);
    }

    if (config.algorithm == Algorithm::PGE) trace.final_pcfg = std::move(pcfg);
    return trace;
}

}  // namespace gramevo
