#pragma once

#include <span>
#include <vector>

namespace nq {

/// Dense real symmetric matrix, row-major.
class SymmetricMatrix {
public:
    /// Throws InvalidSpec when dim < 1, the entry count is wrong, or
    /// |A_ij - A_ji| > 1e-12 for some pair.
    SymmetricMatrix(int dim, std::vector<double> entries);

    static SymmetricMatrix identity(int dim, double scale = 1.0);
    static SymmetricMatrix diagonal(std::span<const double> d);

    int dim() const { return dim_; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
    std::span<const double> entries() const { return a_; }

    std::vector<double> apply(std::span<const double> x) const;

private:
    int dim_;
    std::vector<double> a_;
};

}  // namespace nq
