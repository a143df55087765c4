#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectralflow/hamiltonian.hpp"

namespace spectralflow {

/// Finite truncation of sqrt(V) (A - lambda)^{-1} sqrt(V): a dense symmetric
/// matrix living on the sites where V exceeds the support cutoff.
struct BSOperator {
  double lambda = 0.0;
  std::vector<Site> support_sites;
  Eigen::MatrixXd matrix;  // symmetric by construction
  LatticeDomain truncation_domain;
};

/// Sites with V below cutoff are dropped from the sqrt(V) support. Default
/// cutoff is 1e-12 * ||V||_inf.
double default_v_cutoff(const ModelSpec& model);

/// Builds the Birman-Schwinger matrix on the truncation domain. Resolvent
/// columns come from a sparse LU factorization of A - lambda*I; throws when
/// lambda sits on the truncated operator's spectrum.
BSOperator build_bs(const ModelSpec& model, const LatticeDomain& domain, double lambda,
                    double v_cutoff);

struct BSVerificationRow {
  double alpha = 0.0;
  Eigen::Index n_plus_value = 0;
  Eigen::Index flow_count = 0;
  bool equal = false;
  bool flagged = false;  // threshold collision on either side; row skipped
};

/// Checks the counting identity: eigenvalues of X(lambda) above 1/alpha
/// against the count_below difference of the perturbed and unperturbed
/// Hamiltonians, per alpha.
std::vector<BSVerificationRow> verify_bs_principle(const ModelSpec& model,
                                                   const LatticeDomain& domain,
                                                   double lambda,
                                                   const std::vector<double>& alpha_list,
                                                   double v_cutoff = -1.0);

/// CSV with header "alpha,n_plus,flow_count,equal,flagged".
void write_bs_report_csv(const std::vector<BSVerificationRow>& rows,
                         const std::string& path);

}  // namespace spectralflow
