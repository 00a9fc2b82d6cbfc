#pragma once

#include <cstdint>
#include <vector>

#include "nq/optimizer.hpp"
#include "nq/problem.hpp"

namespace nq {

/// Preconditioner matching the principal part of the model: the (linearized)
/// p-Laplacian stiffness per component, identity for matrices.
opt::Preconditioner preconditioner_for(const ProblemSpec& spec);

/// Flat vector -> state of the model's arity.
State to_state(const ProblemSpec& spec, std::span<const double> x);

/// Deterministic start directions: a positive sine bump first, then seeded
/// random smooth fields (random vectors for matrices).
std::vector<std::vector<double>> seeded_starts(const ProblemSpec& spec, int count, std::uint64_t seed);

/// Nodal hat functions (pairs use the same hat in both slots).
std::vector<std::vector<double>> hat_probes(const ProblemSpec& spec);

}  // namespace nq
