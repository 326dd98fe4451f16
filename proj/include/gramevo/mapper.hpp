#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gramevo/grammar.hpp"

namespace gramevo {

enum class CodonMode { GE, PGE };

/// Linear chromosome. Exactly one codon vector is populated, matching mode:
/// integers in [0,255] for GE, reals in [0,1] for PGE.
struct Genotype {
    CodonMode mode = CodonMode::GE;
    std::vector<int> int_codons;
    std::vector<double> float_codons;

    static Genotype ge(std::vector<int> codons);
    static Genotype pge(std::vector<double> codons);

    std::size_t size() const {
        return mode == CodonMode::GE ? int_codons.size() : float_codons.size();
    }
};

/// Per-nonterminal, per-production selection counts harvested during one
/// mapping. Parallel in shape to Grammar::productions.
struct ExpansionCounters {
    std::vector<std::vector<int>> counts;

    static ExpansionCounters zeros(const Grammar& grammar);
    int total(int nt) const;
};

struct MappingResult {
    std::optional<std::string> phenotype;  // absent when invalid
    ExpansionCounters counters;
    std::vector<std::pair<int, int>> selections;  // (nonterminal, rule) in derivation order
    int codons_used = 0;
    int wraps_used = 0;
    bool valid = false;
};

/// Phenotype serialization: terminal tokens joined by single spaces, except
/// "tight" tokens which attach to their neighbours without a space.
struct PhenotypeFormat {
    std::vector<std::string> tight_tokens = {"(", ")"};

    std::string join(const std::vector<std::string>& tokens) const;
};

// Both mappers perform the leftmost derivation and differ only in how codons
// select alternatives:
//
//   GE   selects alternative (codon mod k) and consumes no codon when a
//        nonterminal has a single alternative;
//   PGE  consumes one codon per expansion (even forced ones) and selects the
//        first alternative whose cumulative probability exceeds the codon.
//
// When codons run out, reading restarts at codon 0 up to max_wraps times;
// a derivation still holding nonterminals after that is invalid (partial
// counters kept, phenotype absent). Invalidity is a result state, not an
// error.

MappingResult map_ge(const Genotype& genotype, const Grammar& grammar, int max_wraps,
                     const PhenotypeFormat& format = {});

MappingResult map_pge(const Genotype& genotype, const PCFG& pcfg, int max_wraps,
                      const PhenotypeFormat& format = {});

}  // namespace gramevo
