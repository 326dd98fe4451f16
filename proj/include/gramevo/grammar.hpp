#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gramevo {

enum class SymbolKind { Terminal, Nonterminal };

struct Symbol {
    SymbolKind kind = SymbolKind::Terminal;
    std::string text;   // nonterminals: name without angle brackets; terminals: the literal token
    int nt_index = -1;  // resolved index into Grammar::nonterminals, -1 for terminals

    bool is_nonterminal() const { return kind == SymbolKind::Nonterminal; }
    bool operator==(const Symbol& other) const {
        return kind == other.kind && text == other.text;
    }
};

struct ProductionRule {
    std::vector<Symbol> symbols;  // never empty

    bool operator==(const ProductionRule& other) const { return symbols == other.symbols; }
};

/// Context-free grammar with insertion-ordered nonterminals and alternatives.
/// The order of alternatives is semantically significant for mapping, so it is
/// preserved exactly as written in the source BNF. nonterminals[0] is the axiom.
struct Grammar {
    std::vector<std::string> nonterminals;
    std::vector<std::string> terminals;  // first-appearance order
    std::string axiom;
    std::vector<std::vector<ProductionRule>> productions;  // parallel to nonterminals

    int index_of(const std::string& nonterminal) const {
        auto it = nt_index_.find(nonterminal);
        return it == nt_index_.end() ? -1 : it->second;
    }
    const std::vector<ProductionRule>& rules(int nt) const { return productions.at(nt); }
    const std::vector<ProductionRule>& rules(const std::string& nonterminal) const;

    void rebuild_index();  // call after filling the public fields by hand

private:
    std::unordered_map<std::string, int> nt_index_;
};

/// Probabilistic extension: one probability per production, parallel lists.
struct PCFG {
    Grammar grammar;
    std::vector<std::vector<double>> probs;  // [nt][alternative]
};

class BnfParseError : public std::runtime_error {
public:
    BnfParseError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

/// Parses the line-oriented BNF dialect used by the grammar files:
///   <name> ::= alt1 | alt2
///   | alt3
/// Tokens wrapped in <...> are nonterminals, everything else is a terminal.
/// A leading `|` continues the previous rule. The first left-hand side is the
/// axiom. Throws BnfParseError (with line number) on malformed input,
/// undefined nonterminals, or duplicate definitions.
Grammar parse_bnf(const std::string& text);
Grammar parse_bnf_file(const std::string& path);

/// Inverse of parse_bnf up to whitespace: one rule per line, alternatives
/// joined by ` | `.
std::string serialize_bnf(const Grammar& grammar);

/// Uniform prior: a nonterminal with k alternatives gets probability 1/k each.
PCFG to_pcfg(const Grammar& grammar);

/// Empty iff all PCFG invariants hold; otherwise one message per violation,
/// each naming the offending nonterminal.
std::vector<std::string> validate(const PCFG& pcfg);

/// Source text of one production, tokens joined by single spaces and
/// nonterminals wrapped in angle brackets.
std::string production_text(const ProductionRule& rule);

}  // namespace gramevo
