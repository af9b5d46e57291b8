#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diffcert/errors.hpp"

namespace diffcert::dsl {

enum class NodeKind : std::uint8_t {
    Constant, // value
    Coord,    // index (0-based)
    Param,    // index into param slot table
    Norm,     // |x|
    NormC,    // |x - x0|
    Neg,
    Add, Sub, Mul, Div, Pow,
    Abs, Cos, Sin, Exp, Ln, Sqrt,
};

struct ExprNode {
    NodeKind kind;
    double value = 0.0;
    int index = -1;
    int a = -1, b = -1;
};

/// Immutable scalar coefficient expression over coordinates x1..xd, the radial
/// symbols abs(x) / abs(x-x0), and named parameters.
class Expr {
public:
    Expr() = default;
    Expr(std::vector<ExprNode> nodes, int root, int dimension, std::vector<std::string> param_slots)
        : nodes_(std::move(nodes)), root_(root), d_(dimension), params_(std::move(param_slots)) {}

    const std::vector<ExprNode>& nodes() const { return nodes_; }
    int root() const { return root_; }
    int dimension() const { return d_; }
    /// Parameter slot order; eval takes values in this order.
    const std::vector<std::string>& param_slots() const { return params_; }

    /// Canonical text form; parse(pretty()) reproduces the same tree.
    std::string pretty() const;
    bool equal(const Expr& other) const;

    /// Checked scalar evaluation: finite result or DomainError, never NaN.
    double eval(std::span<const double> x, std::span<const double> params,
                std::span<const double> x0) const;

private:
    std::vector<ExprNode> nodes_;
    int root_ = -1;
    int d_ = 0;
    std::vector<std::string> params_;
};

/// Parses `text` against dimension `d` and the declared parameter names.
/// Throws ParseError (with byte offset) on malformed input, unknown
/// identifiers, or out-of-range coordinate indices.
Expr parse_expr(std::string_view text, int d, std::span<const std::string> param_names);

// ---------------------------------------------------------------------------
// Compiled programs: parameters bound to values, constants folded, integer
// powers strength-reduced. One program evaluates either a single point
// (checked) or a batch of points laid out structure-of-arrays (unchecked,
// domain violations surface as non-finite lanes the caller screens).
// ---------------------------------------------------------------------------

enum class Op : std::uint8_t {
    Const, Coord, Norm, NormC,
    Neg, Add, Sub, Mul, Div, Pow, PowInt,
    Abs, Cos, Sin, Exp, Ln, Sqrt,
};

struct Instr {
    Op op;
    std::int32_t arg = 0;
    double c = 0.0;
};

class Program {
public:
    static Program compile(const Expr& e, std::span<const double> param_values,
                           std::span<const double> x0);

    /// Checked evaluation at one point.
    double eval_checked(std::span<const double> x) const;

    /// Unchecked batch evaluation: coords[i] points at n values of coordinate i.
    /// scratch must hold at least scratch_size(n) doubles.
    void eval_batch(const double* const* coords, std::size_t n, double* out,
                    double* scratch) const;
    std::size_t scratch_size(std::size_t n) const {
        return static_cast<std::size_t>(max_stack_ + 1) * n;
    }

    bool is_constant() const { return code_.size() == 1 && code_[0].op == Op::Const; }
    double constant() const { return code_[0].c; }
    int dimension() const { return d_; }

private:
    std::vector<Instr> code_;
    std::vector<double> x0_;
    int d_ = 0;
    int max_stack_ = 0;
};

} // namespace diffcert::dsl
