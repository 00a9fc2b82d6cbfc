#include "nq/symmetric_matrix.hpp"

#include <cmath>
#include <string>

#include "nq/errors.hpp"

namespace nq {

SymmetricMatrix::SymmetricMatrix(int dim, std::vector<double> entries) : dim_(dim), a_(std::move(entries)) {
    if (dim_ < 1) fail(ErrorKind::InvalidSpec, "matrix dimension must be >= 1");
    if (a_.size() != static_cast<std::size_t>(dim_) * dim_)
        fail(ErrorKind::InvalidSpec, "matrix needs " + std::to_string(dim_ * dim_) + " entries");
    for (double x : a_)
        if (!std::isfinite(x)) fail(ErrorKind::InvalidSpec, "matrix entries must be finite");
    for (int i = 0; i < dim_; ++i)
        for (int j = i + 1; j < dim_; ++j)
            if (std::abs((*this)(i, j) - (*this)(j, i)) > 1e-12)
                fail(ErrorKind::InvalidSpec, "matrix is not symmetric at (" + std::to_string(i) + "," +
                                                 std::to_string(j) + ")");
}

SymmetricMatrix SymmetricMatrix::identity(int dim, double scale) {
    std::vector<double> a(static_cast<std::size_t>(dim) * dim, 0.0);
    for (int i = 0; i < dim; ++i) a[static_cast<std::size_t>(i) * dim + i] = scale;
    return SymmetricMatrix(dim, std::move(a));
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> d) {
    const int dim = static_cast<int>(d.size());
    std::vector<double> a(d.size() * d.size(), 0.0);
    for (int i = 0; i < dim; ++i) a[static_cast<std::size_t>(i) * dim + i] = d[i];
    return SymmetricMatrix(dim, std::move(a));
}

std::vector<double> SymmetricMatrix::apply(std::span<const double> x) const {
    std::vector<double> y(dim_, 0.0);
    for (int i = 0; i < dim_; ++i) {
        double acc = 0;
        for (int j = 0; j < dim_; ++j) acc += (*this)(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

}  // namespace nq
