#include "nq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nq/errors.hpp"

namespace nq {

GridDomain::GridDomain(double a, double b, int n) : a_(a), b_(b), h_((b - a) / (n + 1)), n_(n) {}

GridDomain GridDomain::build(double a, double b, int n) {
    if (!(std::isfinite(a) && std::isfinite(b)) || !(b > a))
        fail(ErrorKind::InvalidDomain, "need b > a, got a=" + std::to_string(a) + " b=" + std::to_string(b));
    if (n < 2) fail(ErrorKind::InvalidDomain, "need n >= 2, got " + std::to_string(n));
    return GridDomain(a, b, n);
}

GridDomain GridDomain::index_space(int dim) {
    if (dim < 1) fail(ErrorKind::InvalidDomain, "index space needs dim >= 1");
    return GridDomain(0.0, dim + 1.0, dim);
}

std::vector<double> GridDomain::nodes() const {
    std::vector<double> x(n_);
    for (int i = 0; i < n_; ++i) x[i] = node(i);
    return x;
}

DiscreteField::DiscreteField(GridDomain domain, std::vector<double> values)
    : domain_(domain), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(domain_.n()))
        fail(ErrorKind::InvalidDomain, "field length " + std::to_string(values_.size()) +
                                           " does not match grid n=" + std::to_string(domain_.n()));
    for (double v : values_)
        if (!std::isfinite(v)) fail(ErrorKind::InvalidDomain, "field entries must be finite");
}

DiscreteField::DiscreteField(GridDomain domain) : domain_(domain), values_(domain.n(), 0.0) {}

bool DiscreteField::is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

FieldPair::FieldPair(DiscreteField u_, DiscreteField v_) : u(std::move(u_)), v(std::move(v_)) {
    if (!(u.domain() == v.domain())) fail(ErrorKind::InvalidDomain, "pair components must share one grid");
}

bool is_pair(const State& s) { return std::holds_alternative<FieldPair>(s); }

const GridDomain& domain_of(const State& s) {
    if (const auto* f = std::get_if<DiscreteField>(&s)) return f->domain();
    return std::get<FieldPair>(s).u.domain();
}

bool is_zero(const State& s) {
    if (const auto* f = std::get_if<DiscreteField>(&s)) return f->is_zero();
    const auto& p = std::get<FieldPair>(s);
    return p.u.is_zero() && p.v.is_zero();
}

std::size_t flat_size(const State& s) {
    if (const auto* f = std::get_if<DiscreteField>(&s)) return f->size();
    return 2 * std::get<FieldPair>(s).u.size();
}

std::vector<double> flatten(const State& s) {
    if (const auto* f = std::get_if<DiscreteField>(&s)) return {f->values().begin(), f->values().end()};
    const auto& p = std::get<FieldPair>(s);
    std::vector<double> out(p.u.values().begin(), p.u.values().end());
    out.insert(out.end(), p.v.values().begin(), p.v.values().end());
    return out;
}

State unflatten(const State& like, std::span<const double> flat) {
    const GridDomain& g = domain_of(like);
    const std::size_t n = g.n();
    if (!is_pair(like)) return DiscreteField(g, std::vector<double>(flat.begin(), flat.begin() + n));
    return FieldPair(DiscreteField(g, std::vector<double>(flat.begin(), flat.begin() + n)),
                     DiscreteField(g, std::vector<double>(flat.begin() + n, flat.begin() + 2 * n)));
}

State scaled(const State& s, double c) {
    auto flat = flatten(s);
    for (double& x : flat) x *= c;
    return unflatten(s, flat);
}

State axpy(const State& u, double c, const State& d) {
    auto a = flatten(u);
    auto b = flatten(d);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
    return unflatten(u, a);
}

FieldPair scaled(const FieldPair& s, double t, double sv) {
    std::vector<double> u(s.u.values().begin(), s.u.values().end());
    std::vector<double> v(s.v.values().begin(), s.v.values().end());
    for (double& x : u) x *= t;
    for (double& x : v) x *= sv;
    return FieldPair(DiscreteField(s.u.domain(), std::move(u)), DiscreteField(s.v.domain(), std::move(v)));
}

}  // namespace nq
