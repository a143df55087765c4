#include "spectralflow/hamiltonian.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace spectralflow {

namespace {

struct SiteHash {
  std::size_t operator()(const Site& n) const {
    std::uint64_t h = 1469598103934665603ull;
    for (int c : n) {
      h ^= std::uint64_t(std::uint32_t(c));
      h *= 1099511628211ull;
    }
    return std::size_t(h);
  }
};

LatticeOperator assemble_impl(const LatticeDomain& domain, const ModelSpec& model,
                              double alpha) {
  if (domain.dim() != model.dim())
    throw std::invalid_argument("domain and model dimensions differ");
  if (alpha < 0) throw std::invalid_argument("alpha must be nonnegative");

  LatticeOperator op;
  op.dim = domain.dim();
  op.sites = domain.enumerate_sites();
  const Eigen::Index n = Eigen::Index(op.sites.size());

  std::unordered_map<Site, Eigen::Index, SiteHash> index;
  index.reserve(op.sites.size());
  for (Eigen::Index i = 0; i < n; ++i) index.emplace(op.sites[i], i);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(n) * (2 * op.dim + 1));
  const double twod = 2.0 * op.dim;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Site& s = op.sites[i];
    double diag = twod + model.f(s);
    if (alpha > 0) diag -= alpha * model.V(s);
    trip.emplace_back(i, i, diag);
    for (int ax = 0; ax < op.dim; ++ax) {
      for (int dir : {-1, 1}) {
        Site m = s;
        m[ax] += dir;
        auto it = index.find(m);
        if (it != index.end()) trip.emplace_back(i, it->second, -1.0);
      }
    }
  }
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  return op;
}

}  // namespace

bool LatticeOperator::is_tridiagonal() const {
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, k); it; ++it)
      if (std::abs(it.row() - it.col()) > 1) return false;
  return true;
}

LatticeOperator assemble(const LatticeDomain& domain, const ModelSpec& model) {
  return assemble_impl(domain, model, 0.0);
}

LatticeOperator assemble_perturbed(const LatticeDomain& domain, const ModelSpec& model,
                                   double alpha) {
  return assemble_impl(domain, model, alpha);
}

}  // namespace spectralflow
