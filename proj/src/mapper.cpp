#include "gramevo/mapper.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gramevo {

namespace {

// Bounds non-consuming expansion loops (cycles of single-production
// nonterminals in GE derive forever without using a codon). A derivation
// still incomplete after this many expansions is reported invalid.
constexpr int kMaxExpansions = 1 << 20;

// Sequential codon reader with wrapping.
template <typename Codon>
class CodonStream {
public:
    CodonStream(const std::vector<Codon>& codons, int max_wraps)
        : codons_(codons), max_wraps_(max_wraps) {}

    bool next(Codon& out) {
        if (codons_.empty()) return false;
        if (pos_ == codons_.size()) {
            if (wraps_ == max_wraps_) return false;
            ++wraps_;
            pos_ = 0;
        }
        out = codons_[pos_++];
        ++used_;
        return true;
    }

    int used() const { return used_; }
    int wraps() const { return wraps_; }

private:
    const std::vector<Codon>& codons_;
    int max_wraps_;
    std::size_t pos_ = 0;
    int used_ = 0;
    int wraps_ = 0;
};

struct Derivation {
    std::vector<Symbol> sentential;
    std::size_t cursor = 0;  // everything before it is terminal

    explicit Derivation(const Grammar& g) {
        Symbol axiom;
        axiom.kind = SymbolKind::Nonterminal;
        axiom.text = g.axiom;
        axiom.nt_index = g.index_of(g.axiom);
        sentential.push_back(std::move(axiom));
    }

    // Index of the leftmost nonterminal, or -1 when the derivation is done.
    int leftmost_nt() {
        while (cursor < sentential.size() && !sentential[cursor].is_nonterminal()) ++cursor;
        return cursor == sentential.size() ? -1 : static_cast<int>(cursor);
    }

    void expand(std::size_t at, const ProductionRule& rule) {
        sentential.erase(sentential.begin() + static_cast<std::ptrdiff_t>(at));
        sentential.insert(sentential.begin() + static_cast<std::ptrdiff_t>(at),
                          rule.symbols.begin(), rule.symbols.end());
    }

    std::vector<std::string> terminal_tokens() const {
        std::vector<std::string> out;
        out.reserve(sentential.size());
        for (const Symbol& s : sentential) out.push_back(s.text);
        return out;
    }
};

MappingResult finish(Derivation& d, MappingResult r, int used, int wraps, bool complete,
                     const PhenotypeFormat& format) {
    r.codons_used = used;
    r.wraps_used = wraps;
    r.valid = complete;
    if (complete) r.phenotype = format.join(d.terminal_tokens());
    return r;
}

}  // namespace

Genotype Genotype::ge(std::vector<int> codons) {
    for (int c : codons)
        if (c < 0 || c > 255) throw std::invalid_argument("GE codon outside [0,255]");
    Genotype g;
    g.mode = CodonMode::GE;
    g.int_codons = std::move(codons);
    return g;
}

Genotype Genotype::pge(std::vector<double> codons) {
    for (double c : codons)
        if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("PGE codon outside [0,1]");
    Genotype g;
    g.mode = CodonMode::PGE;
    g.float_codons = std::move(codons);
    return g;
}

ExpansionCounters ExpansionCounters::zeros(const Grammar& grammar) {
    ExpansionCounters c;
    c.counts.reserve(grammar.productions.size());
    for (const auto& rules : grammar.productions)
        c.counts.emplace_back(rules.size(), 0);
    return c;
}

int ExpansionCounters::total(int nt) const {
    const auto& row = counts.at(static_cast<size_t>(nt));
    return std::accumulate(row.begin(), row.end(), 0);
}

std::string PhenotypeFormat::join(const std::vector<std::string>& tokens) const {
    auto tight = [&](const std::string& t) {
        return std::find(tight_tokens.begin(), tight_tokens.end(), t) != tight_tokens.end();
    };
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0 && !tight(tokens[i]) && !tight(tokens[i - 1])) out += ' ';
        out += tokens[i];
    }
    return out;
}

MappingResult map_ge(const Genotype& genotype, const Grammar& grammar, int max_wraps,
                     const PhenotypeFormat& format) {
    if (genotype.mode != CodonMode::GE)
        throw std::invalid_argument("map_ge requires a GE genotype");

    Derivation d(grammar);
    MappingResult r;
    r.counters = ExpansionCounters::zeros(grammar);
    CodonStream<int> codons(genotype.int_codons, max_wraps);

    for (int steps = 0; steps < kMaxExpansions; ++steps) {
        int at = d.leftmost_nt();
        if (at < 0)
            return finish(d, std::move(r), codons.used(), codons.wraps(), true, format);

        int nt = d.sentential[static_cast<size_t>(at)].nt_index;
        const auto& rules = grammar.rules(nt);
        std::size_t choice = 0;
        if (rules.size() > 1) {
            int codon;
            if (!codons.next(codon))
                return finish(d, std::move(r), codons.used(), codons.wraps(), false, format);
            choice = static_cast<std::size_t>(codon) % rules.size();
        }
        ++r.counters.counts[static_cast<size_t>(nt)][choice];
        r.selections.emplace_back(nt, static_cast<int>(choice));
        d.expand(static_cast<size_t>(at), rules[choice]);
    }
    return finish(d, std::move(r), codons.used(), codons.wraps(), false, format);
}

MappingResult map_pge(const Genotype& genotype, const PCFG& pcfg, int max_wraps,
                      const PhenotypeFormat& format) {
    if (genotype.mode != CodonMode::PGE)
        throw std::invalid_argument("map_pge requires a PGE genotype");

    const Grammar& grammar = pcfg.grammar;
    Derivation d(grammar);
    MappingResult r;
    r.counters = ExpansionCounters::zeros(grammar);
    CodonStream<double> codons(genotype.float_codons, max_wraps);

    for (;;) {
        int at = d.leftmost_nt();
        if (at < 0)
            return finish(d, std::move(r), codons.used(), codons.wraps(), true, format);

        int nt = d.sentential[static_cast<size_t>(at)].nt_index;
        const auto& rules = grammar.rules(nt);
        const auto& probs = pcfg.probs[static_cast<size_t>(nt)];

        double codon;
        if (!codons.next(codon))
            return finish(d, std::move(r), codons.used(), codons.wraps(), false, format);

        // First alternative whose cumulative probability exceeds the codon;
        // if rounding leaves the total below the codon, take the last one.
        std::size_t choice = rules.size() - 1;
        double cum_prob = 0.0;
        for (std::size_t i = 0; i < rules.size(); ++i) {
            cum_prob += probs[i];
            if (codon < cum_prob) {
                choice = i;
                break;
            }
        }
        ++r.counters.counts[static_cast<size_t>(nt)][choice];
        r.selections.emplace_back(nt, static_cast<int>(choice));
        d.expand(static_cast<size_t>(at), rules[choice]);
    }
}

}  // namespace gramevo
