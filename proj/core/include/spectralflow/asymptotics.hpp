#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spectralflow/bloch_dos.hpp"
#include "spectralflow/hamiltonian.hpp"
#include "spectralflow/lattice_domain.hpp"

namespace spectralflow {

/// alpha^{d/p}-scaled limit of the flow count: the integral over R^d of
/// rho(lambda + Psi(theta)|x|^{-p}) - rho(lambda). The integrand vanishes
/// once the shifted argument drops back into the gap, so the radial support
/// per direction is r <= (Psi(theta)/(gap_upper - lambda))^{1/p}.
struct TheoreticalIntegral {
  double lambda = 0.0;
  double value = 0.0;
  double quadrature_error = 0.0;
  int direction_samples = 0;
  double radial_tolerance = 0.0;
};

TheoreticalIntegral theoretical_integral(const DosTable& dos, const ModelSpec& model,
                                         double lambda, const GapInterval& gap,
                                         int direction_samples = 0);

/// Same quadrature restricted to the annulus eps1 < |x| < eps2.
TheoreticalIntegral theoretical_integral_annulus(const DosTable& dos,
                                                 const ModelSpec& model, double lambda,
                                                 const GapInterval& gap, double eps1,
                                                 double eps2, int direction_samples = 0);

struct FlowCount {
  Eigen::Index count = 0;
  double lambda_used = 0.0;  // differs from the request only after a collision shift
};

/// Eigenvalues of A - tV driven past lambda as t grows to alpha, realized on
/// a finite domain as the difference of the two counting functions. When
/// lambda collides with either spectrum it is shifted by
/// 1e-7 * gap_width once (recorded in lambda_used).
FlowCount flow_count(const ModelSpec& model, double lambda, double alpha,
                     const LatticeDomain& domain, double gap_width);

/// Admissibility floor for eps2 at this lambda: below it the shifted
/// density-of-states argument can escape the gap inside the annulus.
double eps2_admissible_bound(const ModelSpec& model, double lambda,
                             const GapInterval& gap);

struct RegionSplitCounts {
  Eigen::Index N1 = 0;
  Eigen::Index N2 = 0;
  Eigen::Index N3_check = 0;  // must be 0 above the threshold coupling
  std::int64_t links_r = 0;   // cut links across the two splitting spheres
  double lambda_used = 0.0;
};

RegionSplitCounts region_split_counts(const ModelSpec& model, double lambda, double alpha,
                                      const RegionSplit& split, const GapInterval& gap,
                                      double trunc_factor = 1.5);

struct RiemannSandwich {
  double lower_sum = 0.0;  // sum of (rho(lambda + V_min) - rho(lambda)) * vol(cell)
  double upper_sum = 0.0;  // same with the cell max of V
  double N2_scaled = 0.0;  // measured N2 / alpha^{d/p}
  int cell_count = 0;
};

/// Cell partition of the annulus eps1 < |x| < eps2 into cubes of side
/// cell_size; per-cell extrema of the impurity law bracket the scaled count.
RiemannSandwich riemann_sandwich(const ModelSpec& model, double lambda, double alpha,
                                 const RegionSplit& split, double cell_size,
                                 const DosTable& dos, const GapInterval& gap);

struct FlowRecord {
  double alpha = 0.0;
  Eigen::Index N = 0;
  Eigen::Index N1 = 0;
  Eigen::Index N2 = 0;
  Eigen::Index N3_check = 0;
  std::int64_t links_r = 0;
  double ratio = 0.0;  // N / (alpha^{d/p} * integral)
  double lambda_shift = 0.0;
};

struct ExperimentReport {
  double lambda = 0.0;
  GapInterval gap;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double domain_radius_rule = 1.5;
  double integral_value = 0.0;
  double integral_error = 0.0;
  std::vector<FlowRecord> records;
  double n1_envelope_coeff = 0.0;  // 2 * omega_d * eps1^d
  bool trend_toward_1 = false;
  double final_deviation = 0.0;

  nlohmann::json to_json() const;
  /// "alpha,N,N1,N2,ratio,links_r,lambda_shift"
  void write_csv(const std::string& path) const;
  /// Self-contained SVG of ratio vs alpha (log-x).
  void write_svg(const std::string& path) const;
};

/// Runs the whole ladder: per-alpha flow counts on the truncated lattice,
/// region splits, and the ratio against the theoretical integral.
ExperimentReport convergence_study(const ModelSpec& model, double lambda,
                                   const std::vector<double>& alpha_grid,
                                   const RegionSplit& split_template, const DosTable& dos,
                                   const GapInterval& gap, double trunc_factor = 1.5);

/// Unit-ball volume in dimension d (exact constants).
double unit_ball_volume(int d);

}  // namespace spectralflow
