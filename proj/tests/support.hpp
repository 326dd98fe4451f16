#pragma once

// Shared test fixtures and deliberately naive reference interpreters. The
// oracles re-derive phenotypes with plain string splicing so they share no
// logic with the production mapper; tests compare the two implementations.

#include <string>
#include <utility>
#include <vector>

#include "gramevo/grammar.hpp"

namespace testsupport {

struct OracleResult {
    bool valid = false;
    std::vector<std::string> tokens;  // terminal tokens, only meaningful when valid
    std::vector<std::pair<std::string, int>> selections;  // (nonterminal, alternative)
    int codons_used = 0;
    int wraps_used = 0;
};

namespace detail {

inline std::size_t leftmost_nonterminal(const std::vector<std::string>& sentence) {
    for (std::size_t i = 0; i < sentence.size(); ++i)
        if (!sentence[i].empty() && sentence[i].front() == '<') return i;
    return sentence.size();
}

inline void splice(std::vector<std::string>& sentence, std::size_t at,
                   const gramevo::ProductionRule& rule) {
    std::vector<std::string> replacement;
    for (const gramevo::Symbol& sym : rule.symbols)
        replacement.push_back(sym.is_nonterminal() ? "<" + sym.text + ">" : sym.text);
    sentence.erase(sentence.begin() + static_cast<std::ptrdiff_t>(at));
    sentence.insert(sentence.begin() + static_cast<std::ptrdiff_t>(at), replacement.begin(),
                    replacement.end());
}

}  // namespace detail

// Reference integer-codon mapping: modulo choice, no codon for single-rule
// nonterminals, wrap up to max_wraps.
inline OracleResult oracle_ge(const std::vector<int>& codons, const gramevo::Grammar& g,
                              int max_wraps) {
    OracleResult r;
    std::vector<std::string> sentence{"<" + g.axiom + ">"};
    std::size_t pos = 0;
    for (int guard = 0; guard < 200000; ++guard) {
        std::size_t at = detail::leftmost_nonterminal(sentence);
        if (at == sentence.size()) {
            r.valid = true;
            r.tokens = sentence;
            return r;
        }
        std::string name = sentence[at].substr(1, sentence[at].size() - 2);
        const auto& alternatives = g.rules(name);
        std::size_t choice = 0;
        if (alternatives.size() > 1) {
            if (pos == codons.size()) {
                if (codons.empty() || r.wraps_used == max_wraps) return r;
                ++r.wraps_used;
                pos = 0;
            }
            int codon = codons[pos++];
            ++r.codons_used;
            choice = static_cast<std::size_t>(codon) % alternatives.size();
        }
        r.selections.emplace_back(name, static_cast<int>(choice));
        detail::splice(sentence, at, alternatives[choice]);
    }
    return r;  // runaway derivation counts as invalid
}

// Reference float-codon mapping: one codon per expansion, cumulative-interval
// choice with strict comparison and last-alternative fallback.
inline OracleResult oracle_pge(const std::vector<double>& codons, const gramevo::PCFG& pcfg,
                               int max_wraps) {
    const gramevo::Grammar& g = pcfg.grammar;
    OracleResult r;
    std::vector<std::string> sentence{"<" + g.axiom + ">"};
    std::size_t pos = 0;
    for (;;) {
        std::size_t at = detail::leftmost_nonterminal(sentence);
        if (at == sentence.size()) {
            r.valid = true;
            r.tokens = sentence;
            return r;
        }
        std::string name = sentence[at].substr(1, sentence[at].size() - 2);
        int nt = g.index_of(name);
        const auto& alternatives = g.rules(nt);

        if (pos == codons.size()) {
            if (codons.empty() || r.wraps_used == max_wraps) return r;
            ++r.wraps_used;
            pos = 0;
        }
        double codon = codons[pos++];
        ++r.codons_used;

        std::size_t choice = alternatives.size() - 1;
        double cumulative = 0.0;
        for (std::size_t i = 0; i < alternatives.size(); ++i) {
            cumulative += pcfg.probs[static_cast<std::size_t>(nt)][i];
            if (codon < cumulative) {
                choice = i;
                break;
            }
        }
        r.selections.emplace_back(name, static_cast<int>(choice));
        detail::splice(sentence, at, alternatives[choice]);
    }
}

// Toy expression grammar: a two-way <expr> (recurse or emit a variable), a
// four-way operator, and three variables. The smallest grammar that exercises
// skipped codons (single-rule <start>), modulo wrap-around, and invalidity.
inline gramevo::Grammar tiny_expr_grammar() {
    return gramevo::parse_bnf(
        "<start> ::= <expr>\n"
        "<expr> ::= <expr> <op> <expr> | <var>\n"
        "<op> ::= + | - | * | /\n"
        "<var> ::= x | y | 1.0\n");
}

// Toy PCFG with a three-way operator and two variables; uniform priors.
inline gramevo::PCFG small_pcfg() {
    return gramevo::to_pcfg(gramevo::parse_bnf(
        "<start> ::= <expr>\n"
        "<expr> ::= <expr> <op> <expr> | <var>\n"
        "<op> ::= + | * | -\n"
        "<var> ::= x | 1.0\n"));
}

// Two-nonterminal grammar (3-way and 2-way choices) for exhaustive
// genotype sweeps against the oracle.
inline gramevo::Grammar sweep_grammar() {
    return gramevo::parse_bnf(
        "<s> ::= <a> <s> | <a> | c <a>\n"
        "<a> ::= a | b <s>\n");
}

}  // namespace testsupport
