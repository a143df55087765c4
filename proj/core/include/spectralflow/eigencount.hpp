#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "spectralflow/hamiltonian.hpp"

namespace spectralflow {

/// Threshold landed on (or numerically indistinguishable from) an
/// eigenvalue. Counts are strict, so the caller must perturb the threshold.
class SpectrumCollision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InertiaResult {
  Eigen::Index negatives = 0;
  Eigen::Index zeros = 0;
  Eigen::Index positives = 0;
};

/// Relative tolerance (w.r.t. the matrix sup norm) below which a pivot or an
/// eigenvalue-threshold distance counts as a spectrum collision.
inline constexpr double kCollisionTol = 1e-9;

/// Matrices smaller than this go through a dense eigensolve, which doubles
/// as the oracle path.
inline constexpr Eigen::Index kDenseCutoff = 512;

/// Signs of the diagonal of an LDL^T factorization of T (Sylvester inertia).
/// Sturm recurrence when T is tridiagonal, sparse LDL^T otherwise with a
/// dense fallback on factorization breakdown.
InertiaResult inertia(const LatticeOperator& T, double shift);

/// Number of eigenvalues of T strictly below lambda. Throws
/// SpectrumCollision when lambda is within tolerance of the spectrum.
Eigen::Index count_below(const LatticeOperator& T, double lambda);

/// All eigenvalues in the open window (a, b), found by bisection on
/// count_below and refined to 1e-10.
std::vector<double> eigenvalues_in_window(const LatticeOperator& T, double a, double b);

/// Number of eigenvalues of a dense symmetric matrix strictly greater than
/// s > 0.
Eigen::Index n_plus(const Eigen::MatrixXd& X, double s);

}  // namespace spectralflow
