#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spectralflow/lattice_domain.hpp"

namespace spectralflow {

/// Angular profile of the impurity on the unit sphere. Either a constant or
/// a piecewise-linear interpolation over tabulated direction samples
/// (d=1: the two values at +1 and -1; d=2: values at increasing angles in
/// [0, 2pi), interpolated periodically). Must be nonnegative.
struct PsiProfile {
  enum class Kind { Constant, Tabulated };
  Kind kind = Kind::Constant;
  double constant = 1.0;
  std::vector<double> angles;  // d=2 only, strictly increasing in [0, 2pi)
  std::vector<double> values;  // d=1: {psi(+1), psi(-1)}; d=2: per angle

  static PsiProfile make_constant(double c);
  static PsiProfile make_tabulated_1d(double psi_plus, double psi_minus);
  static PsiProfile make_tabulated_2d(std::vector<double> angles, std::vector<double> values);

  /// Evaluate at a unit direction theta (first dim components used).
  double operator()(const std::array<double, 3>& theta, int dim) const;

  double max_value() const;

  nlohmann::json to_json() const;
  static PsiProfile from_json(const nlohmann::json& j);
};

/// Periodic background f plus the decaying impurity law
/// V(n) = Psi(n/|n|) |n|^{-p} for n != 0, V(0) = near_field_cap.
class ModelSpec {
 public:
  ModelSpec(int dim, std::array<int, 3> period, std::vector<double> cell_values,
            PsiProfile psi, double p, double near_field_cap);

  int dim() const { return dim_; }
  const std::array<int, 3>& period() const { return period_; }
  const std::vector<double>& cell_values() const { return cell_values_; }
  const PsiProfile& psi() const { return psi_; }
  double p() const { return p_; }
  double near_field_cap() const { return near_field_cap_; }

  /// f(n) by periodic extension of the cell values.
  double f(const Site& n) const;
  double f_sup_norm() const;

  /// Impurity value at a lattice site.
  double V(const Site& n) const;
  /// Impurity law at a continuum point (used by the cell partition
  /// arguments; requires x != 0).
  double V_at(const std::array<double, 3>& x) const;

  double psi_sup_norm() const { return psi_.max_value(); }
  /// sup over Z^d of V (the law is radially decreasing, so the sup is
  /// attained at |n| = 1 or at the origin cap).
  double V_sup_norm() const;

  /// Number of sites in one period cell.
  int cell_size() const;
  /// Row-major index of a site folded into the period cell.
  int cell_index(const Site& n) const;

  nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);

  /// FNV-1a of the canonical JSON encoding; keys DOS caches.
  std::uint64_t hash() const;

  /// d=1 free lattice (f = 0), unit constant impurity with exponent p.
  static ModelSpec free_1d(double p = 2.0, double near_field_cap = 0.0);

 private:
  int dim_;
  std::array<int, 3> period_;
  std::vector<double> cell_values_;
  PsiProfile psi_;
  double p_;
  double near_field_cap_;
};

std::uint64_t fnv1a64(const std::string& s);

}  // namespace spectralflow
