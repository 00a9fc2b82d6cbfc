#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace nq {

/// Uniform 1D grid on [a, b] with n interior nodes and zero Dirichlet data.
class GridDomain {
public:
    /// Validating factory; throws InvalidDomain unless b > a and n >= 2.
    static GridDomain build(double a, double b, int n);

    /// Unit-spaced index space of the given dimension, used by the matrix
    /// model where nodal values are plain vector components.
    static GridDomain index_space(int dim);

    double a() const { return a_; }
    double b() const { return b_; }
    int n() const { return n_; }
    double h() const { return h_; }
    double node(int i) const { return a_ + (i + 1) * h_; }
    std::vector<double> nodes() const;

    friend bool operator==(const GridDomain&, const GridDomain&) = default;

private:
    GridDomain(double a, double b, int n);
    double a_ = 0, b_ = 1, h_ = 0.5;
    int n_ = 1;
};

inline GridDomain build_grid(double a, double b, int n) { return GridDomain::build(a, b, n); }

/// Interior nodal values of one unknown.
class DiscreteField {
public:
    DiscreteField(GridDomain domain, std::vector<double> values);
    explicit DiscreteField(GridDomain domain);  // zero field

    const GridDomain& domain() const { return domain_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    bool is_zero() const;

private:
    GridDomain domain_;
    std::vector<double> values_;
};

/// Two unknowns (u, v) on one shared grid.
struct FieldPair {
    FieldPair(DiscreteField u_, DiscreteField v_);
    DiscreteField u;
    DiscreteField v;
};

/// A scalar field or a pair; the arity must match the model problem.
using State = std::variant<DiscreteField, FieldPair>;

bool is_pair(const State& s);
const GridDomain& domain_of(const State& s);
bool is_zero(const State& s);

/// Flat view helpers: a pair is treated as the concatenation [u; v].
std::size_t flat_size(const State& s);
std::vector<double> flatten(const State& s);
State unflatten(const State& like, std::span<const double> flat);

State scaled(const State& s, double c);
/// u + c * d, same shape.
State axpy(const State& u, double c, const State& d);

/// Scales u and v independently (vector fibering).
FieldPair scaled(const FieldPair& s, double t, double sv);

}  // namespace nq
