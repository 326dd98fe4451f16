#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gramevo {

enum class Partition { Train, Test };

/// Immutable regression dataset: named features, one target per row, and a
/// train/test partition over row indices (every row in exactly one side).
struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;  // |feature_names| values each
    std::vector<double> targets;
    std::vector<int> train_rows;
    std::vector<int> test_rows;

    std::size_t row_count() const { return rows.size(); }
    const std::vector<int>& partition(Partition p) const {
        return p == Partition::Train ? train_rows : test_rows;
    }
};

// Expression trees over {+, -, *, protected /, sin, cos, exp, protected log,
// protected inv, variables, numeric constants}, stored as a postfix program.
// Protection totalizes evaluation: division by zero and inv(0) yield 1,
// log of a non-positive value yields 0, and every intermediate is clamped
// into [-kValueClamp, kValueClamp] so no row can produce a non-finite value.

inline constexpr double kValueClamp = 1e100;

enum class ExprOp : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Sin, Cos, Exp, Log, Inv };

struct ExprInstr {
    ExprOp op;
    int var = 0;        // ExprOp::Var
    double value = 0.0; // ExprOp::Const
};

class CompiledExpression {
public:
    double eval(std::span<const double> row) const;
    std::size_t size() const { return code_.size(); }
    std::size_t stack_depth() const { return max_depth_; }

    // Evaluation with caller-owned scratch of at least stack_depth() doubles.
    double eval(std::span<const double> row, double* stack) const;

private:
    friend CompiledExpression compile(const std::string&, const std::vector<std::string>&);
    std::vector<ExprInstr> code_;  // postfix order
    std::size_t max_depth_ = 0;
};

class PhenotypeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a phenotype produced by the benchmark grammars into an expression
/// tree. Operator chains have a single precedence level and associate left:
/// `a op b op c` groups as `(a op b) op c`. Parentheses override. Variables
/// resolve by exact feature name, or by the 1-based `x[k]` convention.
/// Throws PhenotypeError on malformed input (which would signal a mapper bug).
CompiledExpression compile(const std::string& phenotype,
                           const std::vector<std::string>& feature_names);

double evaluate(const CompiledExpression& expr, std::span<const double> row);

enum class PagieGrid {
    Paper,        // x, y in {-5, -4.6, ..., 5.4}: 27 points per axis, 729 rows
    Conventional  // stop at 5.0: 26 points per axis, 676 rows
};

/// Two-variable benchmark surface 1/(1+x^-4) + 1/(1+y^-4) sampled on a step
/// 0.4 grid; all rows are training data.
Dataset pagie_dataset(PagieGrid grid = PagieGrid::Paper);

/// Loads the housing CSV (canonical 14-column schema, MEDV last), then
/// shuffles with split_seed and partitions 90/10 into train/test.
/// Throws std::runtime_error naming the line on any malformed input.
Dataset load_boston(const std::string& path, std::uint64_t split_seed);

/// Root relative squared error: sqrt(sum (p-t)^2 / sum (t - mean(t))^2).
/// Throws std::invalid_argument on length mismatch or empty input and
/// std::domain_error when all targets are identical.
double rrse(std::span<const double> predictions, std::span<const double> targets);

/// RRSE of the expression over one partition of the dataset.
double fitness(const CompiledExpression& expr, const Dataset& dataset, Partition part);

/// Writes the dataset as CSV with a `target` column last.
void write_dataset_csv(const Dataset& dataset, const std::string& path);

}  // namespace gramevo
