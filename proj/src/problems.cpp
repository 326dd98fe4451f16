#include "gramevo/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gramevo/rng.hpp"
#include "num_format.hpp"

namespace gramevo {

namespace {

inline double sanitize(double v) {
    if (std::isnan(v)) return kValueClamp;
    if (v > kValueClamp) return kValueClamp;
    if (v < -kValueClamp) return -kValueClamp;
    return v;
}

inline double protected_div(double a, double b) { return b == 0.0 ? 1.0 : a / b; }
inline double protected_log(double v) { return v <= 0.0 ? 0.0 : std::log(v); }
inline double protected_inv(double v) { return v == 0.0 ? 1.0 : 1.0 / v; }

bool parse_number(const std::string& word, double& out) {
    const char* begin = word.data();
    const char* end = begin + word.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

struct PhenotypeLexer {
    std::vector<std::string> tokens;
    std::size_t pos = 0;

    explicit PhenotypeLexer(const std::string& text) {
        std::size_t i = 0;
        while (i < text.size()) {
            char c = text[i];
            if (c == ' ' || c == '\t') {
                ++i;
            } else if (c == '(' || c == ')' || c == '+' || c == '-' || c == '*' || c == '/') {
                tokens.emplace_back(1, c);
                ++i;
            } else {
                std::size_t j = i;
                while (j < text.size() && std::string(" \t()+-*/").find(text[j]) == std::string::npos)
                    ++j;
                tokens.push_back(text.substr(i, j - i));
                i = j;
            }
        }
    }

    bool done() const { return pos == tokens.size(); }
    const std::string& peek() const {
        static const std::string empty;
        return done() ? empty : tokens[pos];
    }
    std::string take() {
        if (done()) throw PhenotypeError("unexpected end of phenotype");
        return tokens[pos++];
    }
    void expect(const std::string& t) {
        if (peek() != t) throw PhenotypeError("expected '" + t + "', got '" + peek() + "'");
        ++pos;
    }
};

bool is_binary_op(const std::string& t) {
    return t == "+" || t == "-" || t == "*" || t == "/";
}

ExprOp unary_op_of(const std::string& name) {
    if (name == "sin") return ExprOp::Sin;
    if (name == "cos") return ExprOp::Cos;
    if (name == "exp") return ExprOp::Exp;
    if (name == "log") return ExprOp::Log;
    return ExprOp::Inv;
}

bool is_unary_name(const std::string& name) {
    return name == "sin" || name == "cos" || name == "exp" || name == "log" || name == "inv";
}

struct PhenotypeParser {
    PhenotypeLexer lex;
    const std::vector<std::string>& features;
    std::vector<ExprInstr>& code;

    PhenotypeParser(const std::string& text, const std::vector<std::string>& names,
                    std::vector<ExprInstr>& out)
        : lex(text), features(names), code(out) {}

    void parse() {
        expr();
        if (!lex.done()) throw PhenotypeError("trailing token '" + lex.peek() + "'");
    }

    // expr := term { op term }, all operators at one precedence, left-assoc
    void expr() {
        term();
        while (is_binary_op(lex.peek())) {
            std::string op = lex.take();
            term();
            ExprInstr instr;
            instr.op = op == "+"   ? ExprOp::Add
                       : op == "-" ? ExprOp::Sub
                       : op == "*" ? ExprOp::Mul
                                   : ExprOp::Div;
            code.push_back(instr);
        }
    }

    void term() {
        std::string t = lex.take();
        if (t == "(") {
            expr();
            lex.expect(")");
            return;
        }
        if (is_unary_name(t) && lex.peek() == "(") {
            lex.expect("(");
            expr();
            lex.expect(")");
            code.push_back({unary_op_of(t), 0, 0.0});
            return;
        }
        double value;
        if (parse_number(t, value)) {
            code.push_back({ExprOp::Const, 0, value});
            return;
        }
        code.push_back({ExprOp::Var, resolve_variable(t), 0.0});
    }

    int resolve_variable(const std::string& t) const {
        auto it = std::find(features.begin(), features.end(), t);
        if (it != features.end()) return static_cast<int>(it - features.begin());
        // x[k] indexes the k-th feature, 1-based
        if (t.size() > 3 && t.compare(0, 2, "x[") == 0 && t.back() == ']') {
            int k = 0;
            const char* b = t.data() + 2;
            const char* e = t.data() + t.size() - 1;
            auto [ptr, ec] = std::from_chars(b, e, k);
            if (ec == std::errc() && ptr == e && k >= 1 &&
                k <= static_cast<int>(features.size()))
                return k - 1;
        }
        throw PhenotypeError("unknown variable '" + t + "'");
    }
};

}  // namespace

CompiledExpression compile(const std::string& phenotype,
                           const std::vector<std::string>& feature_names) {
    CompiledExpression out;
    PhenotypeParser parser(phenotype, feature_names, out.code_);
    parser.parse();

    std::size_t depth = 0;
    for (const ExprInstr& instr : out.code_) {
        switch (instr.op) {
            case ExprOp::Const:
            case ExprOp::Var:
                ++depth;
                out.max_depth_ = std::max(out.max_depth_, depth);
                break;
            case ExprOp::Add:
            case ExprOp::Sub:
            case ExprOp::Mul:
            case ExprOp::Div:
                --depth;
                break;
            default:
                break;  // unary: depth unchanged
        }
    }
    return out;
}

double CompiledExpression::eval(std::span<const double> row, double* stack) const {
    double* sp = stack;
    for (const ExprInstr& instr : code_) {
        switch (instr.op) {
            case ExprOp::Const: *sp++ = instr.value; break;
            case ExprOp::Var: *sp++ = row[static_cast<std::size_t>(instr.var)]; break;
            case ExprOp::Add: sp[-2] = sanitize(sp[-2] + sp[-1]); --sp; break;
            case ExprOp::Sub: sp[-2] = sanitize(sp[-2] - sp[-1]); --sp; break;
            case ExprOp::Mul: sp[-2] = sanitize(sp[-2] * sp[-1]); --sp; break;
            case ExprOp::Div: sp[-2] = sanitize(protected_div(sp[-2], sp[-1])); --sp; break;
            case ExprOp::Sin: sp[-1] = sanitize(std::sin(sp[-1])); break;
            case ExprOp::Cos: sp[-1] = sanitize(std::cos(sp[-1])); break;
            case ExprOp::Exp: sp[-1] = sanitize(std::exp(sp[-1])); break;
            case ExprOp::Log: sp[-1] = sanitize(protected_log(sp[-1])); break;
            case ExprOp::Inv: sp[-1] = sanitize(protected_inv(sp[-1])); break;
        }
    }
    return sp[-1];
}

double CompiledExpression::eval(std::span<const double> row) const {
    std::vector<double> stack(std::max<std::size_t>(max_depth_, 1));
    return eval(row, stack.data());
}

double evaluate(const CompiledExpression& expr, std::span<const double> row) {
    return expr.eval(row);
}

Dataset pagie_dataset(PagieGrid grid) {
    const int points = grid == PagieGrid::Paper ? 27 : 26;
    auto pow4 = [](double v) { return ((v * v) * v) * v; };
    auto half = [&](double v) { return protected_div(1.0, 1.0 + protected_div(1.0, pow4(v))); };

    Dataset d;
    d.feature_names = {"x", "y"};
    d.rows.reserve(static_cast<std::size_t>(points) * points);
    for (int xi = 0; xi < points; ++xi) {
        double x = -5.0 + 0.4 * xi;
        for (int yi = 0; yi < points; ++yi) {
            double y = -5.0 + 0.4 * yi;
            d.rows.push_back({x, y});
            d.targets.push_back(half(x) + half(y));
        }
    }
    d.train_rows.resize(d.rows.size());
    std::iota(d.train_rows.begin(), d.train_rows.end(), 0);
    return d;
}

Dataset load_boston(const std::string& path, std::uint64_t split_seed) {
    static const std::vector<std::string> kColumns = {
        "CRIM", "ZN",  "INDUS", "CHAS",    "NOX", "RM",    "AGE",
        "DIS",  "RAD", "TAX",   "PTRATIO", "B",   "LSTAT", "MEDV"};

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    auto split = [](const std::string& line) {
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                return fields;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
    };

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split(line);
    if (header != kColumns)
        throw std::runtime_error(path + ": line 1: header does not match the canonical " +
                                 std::to_string(kColumns.size()) + "-column schema");

    Dataset d;
    d.feature_names.assign(kColumns.begin(), kColumns.end() - 1);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split(line);
        if (fields.size() != kColumns.size())
            throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(kColumns.size()) + " columns, got " +
                                     std::to_string(fields.size()));
        std::vector<double> row(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (!parse_number(fields[i], row[i]))
                throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                         ": malformed value '" + fields[i] + "'");
        }
        d.targets.push_back(row.back());
        row.pop_back();
        d.rows.push_back(std::move(row));
    }
    if (d.rows.empty()) throw std::runtime_error(path + ": no data rows");

    std::vector<int> order(d.rows.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(split_seed);
    for (std::size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(i + 1)]);

    std::size_t train_count = static_cast<std::size_t>(0.9 * static_cast<double>(order.size()));
    d.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
    d.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
    std::sort(d.train_rows.begin(), d.train_rows.end());
    std::sort(d.test_rows.begin(), d.test_rows.end());
    return d;
}

double rrse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size() || targets.empty())
        throw std::invalid_argument("rrse needs equal, non-zero prediction/target lengths");

    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= static_cast<double>(targets.size());

    double num = 0.0, denom = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        double pe = predictions[i] - targets[i];
        double te = targets[i] - mean;
        num += pe * pe;
        denom += te * te;
    }
    if (denom == 0.0) throw std::domain_error("rrse undefined: all targets identical");
    return std::sqrt(num / denom);
}

double fitness(const CompiledExpression& expr, const Dataset& dataset, Partition part) {
    const std::vector<int>& idx = dataset.partition(part);
    std::vector<double> stack(std::max<std::size_t>(expr.stack_depth(), 1));
    std::vector<double> preds, targets;
    preds.reserve(idx.size());
    targets.reserve(idx.size());
    for (int i : idx) {
        preds.push_back(expr.eval(dataset.rows[static_cast<std::size_t>(i)], stack.data()));
        targets.push_back(dataset.targets[static_cast<std::size_t>(i)]);
    }
    return rrse(preds, targets);
}

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    for (std::size_t i = 0; i < dataset.feature_names.size(); ++i)
        out << dataset.feature_names[i] << ',';
    out << "target\n";
    for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
        for (double v : dataset.rows[r]) out << detail::fmt_double(v) << ',';
        out << detail::fmt_double(dataset.targets[r]) << '\n';
    }
}

}  // namespace gramevo
