#include "spectralflow/birman_schwinger.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/SparseLU>

#include "spectralflow/eigencount.hpp"

namespace spectralflow {

double default_v_cutoff(const ModelSpec& model) { return 1e-12 * model.V_sup_norm(); }

BSOperator build_bs(const ModelSpec& model, const LatticeDomain& domain, double lambda,
                    double v_cutoff) {
  const LatticeOperator op = assemble(domain, model);
  if (inertia(op, lambda).zeros > 0)
    throw std::runtime_error("resolvent singular -- enlarge domain or perturb lambda");

  BSOperator bs{lambda, {}, {}, domain};
  std::vector<Eigen::Index> rows;
  std::vector<double> v;
  for (Eigen::Index i = 0; i < op.size(); ++i) {
    const double vi = model.V(op.sites[i]);
    if (vi >= v_cutoff && vi > 0) {
      bs.support_sites.push_back(op.sites[i]);
      rows.push_back(i);
      v.push_back(vi);
    }
  }
  const Eigen::Index m = Eigen::Index(rows.size());
  bs.matrix.resize(m, m);
  if (m == 0) return bs;

  Eigen::SparseMatrix<double> shifted = op.matrix;
  Eigen::SparseMatrix<double> ident(op.size(), op.size());
  ident.setIdentity();
  shifted -= lambda * ident;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("resolvent singular -- enlarge domain or perturb lambda");

  // columns of the resolvent block on the support, scaled by sqrt(V) twice
  Eigen::MatrixXd gblock(op.size(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(op.size());
    e[rows[j]] = 1.0;
    gblock.col(j) = lu.solve(e);
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double x = std::sqrt(v[i]) * std::sqrt(v[j]) * gblock(rows[i], j);
      bs.matrix(i, j) = x;
      bs.matrix(j, i) = x;
    }
  }
  return bs;
}

std::vector<BSVerificationRow> verify_bs_principle(const ModelSpec& model,
                                                   const LatticeDomain& domain,
                                                   double lambda,
                                                   const std::vector<double>& alpha_list,
                                                   double v_cutoff) {
  if (v_cutoff < 0) v_cutoff = default_v_cutoff(model);
  const BSOperator bs = build_bs(model, domain, lambda, v_cutoff);
  Eigen::VectorXd bs_eigs;
  if (bs.matrix.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bs.matrix, Eigen::EigenvaluesOnly);
    bs_eigs = es.eigenvalues();
  }
  const double bs_norm =
      bs_eigs.size() > 0 ? std::max(1.0, bs_eigs.cwiseAbs().maxCoeff()) : 1.0;

  const LatticeOperator a0 = assemble(domain, model);

  std::vector<BSVerificationRow> rows;
  rows.reserve(alpha_list.size());
  for (double alpha : alpha_list) {
    BSVerificationRow row;
    row.alpha = alpha;
    if (alpha == 0.0) {
      row.n_plus_value = 0;
      row.flow_count = 0;
      row.equal = true;
      rows.push_back(row);
      continue;
    }
    const double s = 1.0 / alpha;
    bool flagged = false;
    Eigen::Index nplus = 0;
    for (Eigen::Index i = 0; i < bs_eigs.size(); ++i) {
      if (std::abs(bs_eigs[i] - s) <= kCollisionTol * bs_norm) flagged = true;
      if (bs_eigs[i] > s) ++nplus;
    }
    Eigen::Index flow = 0;
    if (!flagged) {
      try {
        const LatticeOperator ap = assemble_perturbed(domain, model, alpha);
        flow = count_below(ap, lambda) - count_below(a0, lambda);
      } catch (const SpectrumCollision&) {
        flagged = true;
      }
    }
    row.flagged = flagged;
    if (!flagged) {
      row.n_plus_value = nplus;
      row.flow_count = flow;
      row.equal = nplus == flow;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_bs_report_csv(const std::vector<BSVerificationRow>& rows,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "alpha,n_plus,flow_count,equal,flagged\n";
  char buf[40];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.alpha);
    out << buf << ',' << r.n_plus_value << ',' << r.flow_count << ','
        << (r.equal ? 1 : 0) << ',' << (r.flagged ? 1 : 0) << '\n';
  }
}

}  // namespace spectralflow
