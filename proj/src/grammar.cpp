#include "gramevo/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gramevo {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Token {
    enum Kind { NontermTok, TermTok, PipeTok } kind;
    std::string text;
};

// Splits one side of a rule into tokens. `<` always opens a nonterminal name,
// `|` is the alternative separator, everything else is a whitespace-delimited
// terminal.
std::vector<Token> tokenize(const std::string& s, int line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (c == ' ' || c == '\t') {
            ++i;
        } else if (c == '<') {
            size_t close = s.find('>', i + 1);
            if (close == std::string::npos)
                throw BnfParseError(line, "unterminated '<...>' in \"" + s + "\"");
            std::string name = s.substr(i + 1, close - i - 1);
            if (name.empty()) throw BnfParseError(line, "empty nonterminal name '<>'");
            if (name.find('<') != std::string::npos)
                throw BnfParseError(line, "nested '<' in nonterminal name");
            out.push_back({Token::NontermTok, name});
            i = close + 1;
        } else if (c == '|') {
            out.push_back({Token::PipeTok, "|"});
            ++i;
        } else {
            size_t j = i;
            while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '<' && s[j] != '|') ++j;
            std::string tok = s.substr(i, j - i);
            if (tok.find('>') != std::string::npos)
                throw BnfParseError(line, "stray '>' outside a nonterminal");
            out.push_back({Token::TermTok, tok});
            i = j;
        }
    }
    return out;
}

}  // namespace

BnfParseError::BnfParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

const std::vector<ProductionRule>& Grammar::rules(const std::string& nonterminal) const {
    int idx = index_of(nonterminal);
    if (idx < 0) throw std::out_of_range("unknown nonterminal <" + nonterminal + ">");
    return productions[static_cast<size_t>(idx)];
}

void Grammar::rebuild_index() {
    nt_index_.clear();
    for (size_t i = 0; i < nonterminals.size(); ++i)
        nt_index_[nonterminals[i]] = static_cast<int>(i);
}

Grammar parse_bnf(const std::string& text) {
    if (trim(text).empty()) throw BnfParseError(1, "empty grammar");

    Grammar g;
    std::unordered_map<std::string, int> nt_of;
    std::vector<std::string> term_seen;

    // Raw alternatives per nonterminal, resolved to Symbols after all
    // left-hand sides are known.
    struct RawAlt {
        std::vector<Token> tokens;
        int line;
    };
    std::vector<std::vector<RawAlt>> alts;

    int current_nt = -1;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty()) continue;

        std::string rhs;
        size_t def = line.find("::=");
        if (def != std::string::npos) {
            std::vector<Token> lhs = tokenize(line.substr(0, def), line_no);
            if (lhs.size() != 1 || lhs[0].kind != Token::NontermTok)
                throw BnfParseError(line_no, "left-hand side must be a single '<name>'");
            const std::string& name = lhs[0].text;
            if (nt_of.count(name))
                throw BnfParseError(line_no, "duplicate definition of <" + name + ">");
            current_nt = static_cast<int>(g.nonterminals.size());
            nt_of[name] = current_nt;
            g.nonterminals.push_back(name);
            alts.emplace_back();
            rhs = line.substr(def + 3);
        } else if (line[0] == '|') {
            if (current_nt < 0)
                throw BnfParseError(line_no, "continuation '|' before any rule");
            rhs = line.substr(1);
        } else {
            throw BnfParseError(line_no, "expected '::=' in \"" + line + "\"");
        }

        std::vector<Token> toks = tokenize(rhs, line_no);
        std::vector<RawAlt>& dst = alts[static_cast<size_t>(current_nt)];
        dst.push_back({{}, line_no});
        for (Token& t : toks) {
            if (t.kind == Token::PipeTok) {
                if (dst.back().tokens.empty())
                    throw BnfParseError(line_no, "empty alternative");
                dst.push_back({{}, line_no});
            } else {
                dst.back().tokens.push_back(std::move(t));
            }
        }
        if (dst.back().tokens.empty()) throw BnfParseError(line_no, "empty alternative");
    }

    g.axiom = g.nonterminals.front();
    g.rebuild_index();

    std::unordered_map<std::string, bool> term_known;
    g.productions.resize(g.nonterminals.size());
    for (size_t nt = 0; nt < alts.size(); ++nt) {
        for (RawAlt& alt : alts[nt]) {
            ProductionRule rule;
            for (Token& t : alt.tokens) {
                Symbol sym;
                sym.text = t.text;
                if (t.kind == Token::NontermTok) {
                    auto it = nt_of.find(t.text);
                    if (it == nt_of.end())
                        throw BnfParseError(alt.line, "undefined nonterminal <" + t.text + ">");
                    sym.kind = SymbolKind::Nonterminal;
                    sym.nt_index = it->second;
                } else {
                    sym.kind = SymbolKind::Terminal;
                    if (!term_known[t.text]) {
                        term_known[t.text] = true;
                        term_seen.push_back(t.text);
                    }
                }
                rule.symbols.push_back(std::move(sym));
            }
            g.productions[nt].push_back(std::move(rule));
        }
    }
    g.terminals = std::move(term_seen);
    return g;
}

Grammar parse_bnf_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open grammar file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_bnf(buf.str());
}

std::string production_text(const ProductionRule& rule) {
    std::string out;
    for (const Symbol& s : rule.symbols) {
        if (!out.empty()) out += ' ';
        if (s.is_nonterminal())
            out += '<' + s.text + '>';
        else
            out += s.text;
    }
    return out;
}

std::string serialize_bnf(const Grammar& grammar) {
    std::string out;
    for (size_t nt = 0; nt < grammar.nonterminals.size(); ++nt) {
        out += '<' + grammar.nonterminals[nt] + "> ::= ";
        const auto& rules = grammar.productions[nt];
        for (size_t a = 0; a < rules.size(); ++a) {
            if (a) out += " | ";
            out += production_text(rules[a]);
        }
        out += '\n';
    }
    return out;
}

PCFG to_pcfg(const Grammar& grammar) {
    PCFG p;
    p.grammar = grammar;
    p.probs.reserve(grammar.productions.size());
    for (const auto& rules : grammar.productions)
        p.probs.emplace_back(rules.size(), 1.0 / static_cast<double>(rules.size()));
    return p;
}

std::vector<std::string> validate(const PCFG& pcfg) {
    std::vector<std::string> violations;
    const Grammar& g = pcfg.grammar;
    if (pcfg.probs.size() != g.productions.size()) {
        violations.push_back("probability table has " + std::to_string(pcfg.probs.size()) +
                             " nonterminal entries, grammar has " +
                             std::to_string(g.productions.size()));
        return violations;
    }
    for (size_t nt = 0; nt < g.productions.size(); ++nt) {
        const std::string& name = g.nonterminals[nt];
        const std::vector<double>& probs = pcfg.probs[nt];
        if (probs.size() != g.productions[nt].size()) {
            violations.push_back("<" + name + ">: " + std::to_string(probs.size()) +
                                 " probabilities for " + std::to_string(g.productions[nt].size()) +
                                 " productions");
            continue;
        }
        double sum = 0.0;
        bool in_range = true;
        for (double p : probs) {
            sum += p;
            if (p < 0.0 || p > 1.0) in_range = false;
        }
        if (!in_range)
            violations.push_back("<" + name + ">: probability outside [0,1]");
        if (std::abs(sum - 1.0) > 1e-9)
            violations.push_back("<" + name + ">: probabilities sum to " + std::to_string(sum));
    }
    return violations;
}

}  // namespace gramevo
