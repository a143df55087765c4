#include "spectralflow/eigencount.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <Eigen/SparseCholesky>

namespace spectralflow {

namespace {

double sup_norm(const Eigen::SparseMatrix<double>& m) {
  double best = 0.0;
  Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      rowsum[it.row()] += std::abs(it.value());
  for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, rowsum[i]);
  return best;
}

// Eigenvalue count below lambda for a symmetric tridiagonal matrix, by the
// Sturm pivot recurrence. Tiny pivots are replaced by -pivmin (LAPACK dstebz
// convention); the two-sided probe in count_below turns genuine collisions
// into errors.
Eigen::Index sturm_count(const Eigen::SparseMatrix<double>& m, double lambda,
                         double pivmin) {
  const Eigen::Index n = m.rows();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n > 0 ? n - 1 : 0);
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
      if (it.row() == it.col())
        a[it.row()] = it.value();
      else if (it.row() == it.col() + 1)
        b[it.col()] = it.value();
    }
  Eigen::Index count = 0;
  double d = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double off = i > 0 ? b[i - 1] : 0.0;
    d = (a[i] - lambda) - (i > 0 ? off * off / d : 0.0);
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0) ++count;
  }
  return count;
}

// General sparse route: inertia of T - lambda*I via simplicial LDL^T.
// Returns false on factorization breakdown.
bool ldlt_count(const Eigen::SparseMatrix<double>& m, double lambda, double pivmin,
                Eigen::Index& count) {
  Eigen::SparseMatrix<double> shifted = m;
  Eigen::SparseMatrix<double> ident(m.rows(), m.cols());
  ident.setIdentity();
  shifted -= lambda * ident;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.compute(shifted);
  if (ldlt.info() != Eigen::Success) return false;
  const auto& dvec = ldlt.vectorD();
  count = 0;
  for (Eigen::Index i = 0; i < dvec.size(); ++i) {
    const double d = dvec[i];
    // a pivot at noise level means the factorization cannot certify inertia
    if (!std::isfinite(d) || std::abs(d) < pivmin) return false;
    if (d < 0) ++count;
  }
  return true;
}

Eigen::VectorXd dense_spectrum(const Eigen::SparseMatrix<double>& m) {
  Eigen::MatrixXd dense = Eigen::MatrixXd(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// Count strictly below lambda with no collision semantics.
Eigen::Index raw_count(const LatticeOperator& T, double lambda, double pivmin) {
  if (T.size() == 0) return 0;
  if (T.is_tridiagonal()) return sturm_count(T.matrix, lambda, pivmin);
  if (T.size() < kDenseCutoff) {
    const Eigen::VectorXd ev = dense_spectrum(T.matrix);
    return std::lower_bound(ev.data(), ev.data() + ev.size(), lambda) - ev.data();
  }
  Eigen::Index c = 0;
  if (ldlt_count(T.matrix, lambda, pivmin, c)) return c;
  // factorization breakdown: fall back to a dense solve when affordable
  if (T.size() <= 8192) {
    const Eigen::VectorXd ev = dense_spectrum(T.matrix);
    return std::lower_bound(ev.data(), ev.data() + ev.size(), lambda) - ev.data();
  }
  throw std::runtime_error(
      "inertia factorization breakdown; perturb the threshold or reduce the domain");
}

}  // namespace

InertiaResult inertia(const LatticeOperator& T, double shift) {
  const double norm = std::max(sup_norm(T.matrix), 1.0);
  const double delta = kCollisionTol * norm;
  const double pivmin = 1e-14 * norm;
  InertiaResult r;
  const Eigen::Index below = raw_count(T, shift - delta, pivmin);
  const Eigen::Index below_hi = raw_count(T, shift + delta, pivmin);
  r.negatives = below;
  r.zeros = below_hi - below;
  r.positives = T.size() - below_hi;
  return r;
}

Eigen::Index count_below(const LatticeOperator& T, double lambda) {
  const InertiaResult r = inertia(T, lambda);
  if (r.zeros > 0)
    throw SpectrumCollision("threshold hits spectrum at lambda=" + std::to_string(lambda));
  return r.negatives;
}

std::vector<double> eigenvalues_in_window(const LatticeOperator& T, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("window requires a < b");
  const double norm = std::max(sup_norm(T.matrix), 1.0);
  const double pivmin = 1e-14 * norm;

  if (!T.is_tridiagonal() && T.size() < kDenseCutoff) {
    const Eigen::VectorXd ev = dense_spectrum(T.matrix);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev[i] > a && ev[i] < b) out.push_back(ev[i]);
    return out;
  }

  struct Cell {
    double lo, hi;
    Eigen::Index clo, chi;
  };
  std::deque<Cell> work;
  work.push_back({a, b, raw_count(T, a, pivmin), raw_count(T, b, pivmin)});
  std::vector<double> out;
  std::size_t cells = 0;
  const double tol = 1e-10;
  while (!work.empty()) {
    if (++cells > 1000000) throw std::runtime_error("window too wide");
    Cell c = work.front();
    work.pop_front();
    const Eigen::Index k = c.chi - c.clo;
    if (k == 0) continue;
    if (c.hi - c.lo < tol) {
      const double mid = 0.5 * (c.lo + c.hi);
      for (Eigen::Index i = 0; i < k; ++i) out.push_back(mid);
      continue;
    }
    const double mid = 0.5 * (c.lo + c.hi);
    const Eigen::Index cmid = raw_count(T, mid, pivmin);
    work.push_back({c.lo, mid, c.clo, cmid});
    work.push_back({mid, c.hi, cmid, c.chi});
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::Index n_plus(const Eigen::MatrixXd& X, double s) {
  if (!(s > 0)) throw std::invalid_argument("n_plus requires s > 0");
  if (X.rows() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double norm = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  const double delta = kCollisionTol * std::max(norm, 1.0);
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i] - s) <= delta)
      throw SpectrumCollision("threshold hits spectrum at s=" + std::to_string(s));
    if (ev[i] > s) ++count;
  }
  return count;
}

}  // namespace spectralflow
