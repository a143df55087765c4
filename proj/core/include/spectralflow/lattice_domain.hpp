#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace spectralflow {

// Lattice site in Z^d, d <= 3. Unused trailing components stay zero so
// lexicographic comparison of the whole array is the site ordering.
using Site = std::array<int, 3>;

constexpr int kMaxDim = 3;

double site_norm(const Site& n, int dim);

/// Bounded region of R^d whose integer points carry the finite-volume
/// operators. Each shape stores its defining inequalities; membership is a
/// raw floating-point comparison (no tolerance).
class LatticeDomain {
 public:
  enum class Shape { Ball, Annulus, Box, CubeCell };

  // |x| < radius (strict).
  static LatticeDomain ball(int dim, double radius);
  // inner (<= or <) |x| (<= or <) outer, closedness per flag.
  static LatticeDomain annulus(int dim, double r_inner, double r_outer,
                               bool inner_closed = true, bool outer_closed = true);
  // |x_i| <= half_widths[i] per axis.
  static LatticeDomain box(int dim, std::vector<double> half_widths);
  // half-open cell side*([0,1)^d + corner).
  static LatticeDomain cube_cell(int dim, Site corner, double side);

  Shape shape() const { return shape_; }
  int dim() const { return dim_; }

  bool contains(const Site& n) const;
  bool contains_point(const std::array<double, 3>& x) const;

  /// All lattice points of the region in lexicographic order.
  std::vector<Site> enumerate_sites() const;

  std::size_t site_count() const { return enumerate_sites().size(); }

  /// beta*Omega: every defining length multiplied by beta. beta must be > 0.
  LatticeDomain scale(double beta) const;

  /// Number of nearest-neighbor pairs (n, m), |n-m|=1, with exactly one
  /// endpoint inside the region. Bounds the rank of the cut between the
  /// region and its complement.
  std::int64_t boundary_links() const;

  /// Euclidean volume of the region (exact, from the shape parameters).
  double volume() const;

  // Shape parameters (valid fields depend on shape()).
  double radius() const { return r_outer_; }
  double r_inner() const { return r_inner_; }
  double r_outer() const { return r_outer_; }
  const std::vector<double>& half_widths() const { return half_widths_; }
  const Site& corner() const { return corner_; }
  double side() const { return side_; }

  nlohmann::json to_json() const;
  static LatticeDomain from_json(const nlohmann::json& j);

 private:
  LatticeDomain(Shape s, int dim) : shape_(s), dim_(dim) {}

  // Smallest integer box certain to contain all sites.
  void bounding_box(Site& lo, Site& hi) const;

  Shape shape_;
  int dim_;
  double r_inner_ = 0.0;
  double r_outer_ = 0.0;
  bool inner_closed_ = true;
  bool outer_closed_ = true;
  std::vector<double> half_widths_;
  Site corner_ = {0, 0, 0};
  double side_ = 0.0;
};

/// Three-way split of R^d at radii eps1*alpha^(1/p) and eps2*alpha^(1/p).
/// Region 2 is the closed annulus; regions 1 and 3 are open, so every point
/// lands in exactly one region.
struct RegionSplit {
  double eps1;
  double eps2;
  double alpha;
  double p;

  RegionSplit(double e1, double e2, double a, double pp);

  double inner_radius() const;  // eps1 * alpha^(1/p)
  double outer_radius() const;  // eps2 * alpha^(1/p)

  /// 1, 2, or 3.
  int region_of(const std::array<double, 3>& x, int dim) const;
  int region_of_site(const Site& n, int dim) const;

  LatticeDomain omega1(int dim) const;
  LatticeDomain omega2(int dim) const;
  /// Omega3 is unbounded; this is its truncation to outer radius
  /// trunc_radius (inner boundary open, matching Omega3).
  LatticeDomain omega3_truncated(int dim, double trunc_radius) const;
};

}  // namespace spectralflow
