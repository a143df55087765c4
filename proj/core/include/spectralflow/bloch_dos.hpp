#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectralflow/lattice_domain.hpp"
#include "spectralflow/model.hpp"

namespace spectralflow {

struct GapInterval {
  double lower = 0.0;  // lambda_-
  double upper = 0.0;  // lambda_+
  double width() const { return upper - lower; }
  double midpoint() const { return 0.5 * (lower + upper); }
};

struct BandStructure {
  std::vector<std::vector<double>> k_samples;   // quasimomentum per sample
  std::vector<std::vector<double>> bands;       // sorted eigenvalues per sample
  std::vector<GapInterval> gap_list;            // bounded gaps, ascending
};

/// Bloch reduction of the periodic operator: Hermitian matrix of size
/// q_1*...*q_d on one period cell; hops that wrap around the cell in axis j
/// pick up a phase e^{+-i k_j}. Sweeping k over [0,2pi)^d exhausts the
/// spectrum of the full periodic operator.
Eigen::MatrixXcd bloch_matrix(const ModelSpec& model, const std::vector<double>& k);

/// Sorted Bloch eigenvalues at one quasimomentum.
std::vector<double> bloch_bands_at(const ModelSpec& model, const std::vector<double>& k);

/// Bands on a uniform k-grid (k_per_axis points per axis, endpoints
/// included via k = 2*pi*i/K) with local refinement of each band's extrema,
/// plus the gaps read off the per-band ranges.
BandStructure band_structure(const ModelSpec& model, int k_per_axis);

/// Widest bounded spectral gap, or nullopt when the bands cover the whole
/// spectrum interval.
std::optional<GapInterval> find_gap(const ModelSpec& model, int k_per_axis = 0);

/// Integrated density of states at lambda by Brillouin-zone quadrature:
/// the k-measure of the sublevel set of each band, normalized per site.
/// d=1 locates band crossings of lambda by bisection; d>=2 refines
/// quadrature cells where the sublevel count changes.
double ids_bloch(const ModelSpec& model, double lambda, int k_per_axis = 0);

struct FiniteVolumeIds {
  std::vector<double> betas;
  std::vector<double> ratios;  // N(A_{beta*Omega}, lambda) / (beta^d vol Omega)
  double extrapolated = 0.0;   // last ratio
  double error_estimate = 0.0; // |last - previous|
};

/// The defining finite-volume limit of the density of states.
FiniteVolumeIds ids_finite_volume(const ModelSpec& model, double lambda,
                                  const std::vector<double>& beta_sequence,
                                  const LatticeDomain& base_domain);

struct DosTable {
  std::vector<double> lambda_grid;  // sorted
  std::vector<double> rho_values;   // nondecreasing, in [0,1]
  std::string provenance;           // "bloch" or "finite_volume(b1,b2,...)"
  std::uint64_t model_hash = 0;

  /// Piecewise-linear interpolation, clamped to [0,1] outside the grid.
  double rho(double lambda) const;

  void write_csv(const std::string& path) const;
  static DosTable read_csv(const std::string& path);
};

/// Uniformly spaced lambda grid from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, int points);

/// rho sampled by the Bloch route on the given grid. Looks for a cached
/// table under $SPECTRAL_FLOW_CACHE (if set) keyed by the model hash and
/// grid; writes one back via atomic replace after computing.
DosTable build_dos_table_bloch(const ModelSpec& model, const std::vector<double>& grid,
                               int k_per_axis = 0);

/// rho by the finite-volume definition on the given grid.
DosTable build_dos_table_finite_volume(const ModelSpec& model,
                                       const std::vector<double>& grid,
                                       const std::vector<double>& beta_sequence,
                                       const LatticeDomain& base_domain);

/// Default k-grid resolution per the dimension (256 for d=1, 64 for d=2,
/// 24 for d=3).
int default_k_per_axis(int dim);

}  // namespace spectralflow
