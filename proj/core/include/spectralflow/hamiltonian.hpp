#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "spectralflow/lattice_domain.hpp"
#include "spectralflow/model.hpp"

namespace spectralflow {

/// Finite-volume Hamiltonian on the lattice points of a bounded domain:
/// nearest-neighbor hopping -1 (couplings to outside sites dropped) and
/// diagonal 2d + f(n) - alpha*V(n). Sites are ordered lexicographically so
/// assembly is reproducible.
struct LatticeOperator {
  Eigen::SparseMatrix<double> matrix;  // symmetric, both triangles stored
  std::vector<Site> sites;             // row i <-> sites[i]
  int dim = 1;

  Eigen::Index size() const { return matrix.rows(); }

  /// True when every off-diagonal entry sits on the first off-diagonals
  /// (always holds for d=1 lexicographic ordering).
  bool is_tridiagonal() const;
};

LatticeOperator assemble(const LatticeDomain& domain, const ModelSpec& model);

/// assemble(domain, model) with alpha*V subtracted from the diagonal.
LatticeOperator assemble_perturbed(const LatticeDomain& domain, const ModelSpec& model,
                                   double alpha);

}  // namespace spectralflow
