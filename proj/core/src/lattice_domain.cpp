#include "spectralflow/lattice_domain.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace spectralflow {

double site_norm(const Site& n, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += double(n[i]) * double(n[i]);
  return std::sqrt(s);
}

LatticeDomain LatticeDomain::ball(int dim, double radius) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  if (!(radius > 0)) throw std::invalid_argument("ball radius must be positive");
  LatticeDomain d(Shape::Ball, dim);
  d.r_outer_ = radius;
  d.outer_closed_ = false;  // strict |x| < r
  return d;
}

LatticeDomain LatticeDomain::annulus(int dim, double r_inner, double r_outer,
                                     bool inner_closed, bool outer_closed) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  if (!(0 <= r_inner && r_inner < r_outer))
    throw std::invalid_argument("annulus radii must satisfy 0 <= inner < outer");
  LatticeDomain d(Shape::Annulus, dim);
  d.r_inner_ = r_inner;
  d.r_outer_ = r_outer;
  d.inner_closed_ = inner_closed;
  d.outer_closed_ = outer_closed;
  return d;
}

LatticeDomain LatticeDomain::box(int dim, std::vector<double> half_widths) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  if (int(half_widths.size()) != dim)
    throw std::invalid_argument("box needs one half-width per axis");
  for (double h : half_widths)
    if (!(h >= 0)) throw std::invalid_argument("box half-widths must be nonnegative");
  LatticeDomain d(Shape::Box, dim);
  d.half_widths_ = std::move(half_widths);
  return d;
}

LatticeDomain LatticeDomain::cube_cell(int dim, Site corner, double side) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  if (!(side > 0)) throw std::invalid_argument("cell side must be positive");
  LatticeDomain d(Shape::CubeCell, dim);
  d.corner_ = corner;
  d.side_ = side;
  return d;
}

bool LatticeDomain::contains(const Site& n) const {
  std::array<double, 3> x = {double(n[0]), double(n[1]), double(n[2])};
  return contains_point(x);
}

bool LatticeDomain::contains_point(const std::array<double, 3>& x) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += x[i] * x[i];
  const double r = std::sqrt(s);
  switch (shape_) {
    case Shape::Ball:
      return outer_closed_ ? r <= r_outer_ : r < r_outer_;
    case Shape::Annulus: {
      const bool in_ok = inner_closed_ ? r >= r_inner_ : r > r_inner_;
      const bool out_ok = outer_closed_ ? r <= r_outer_ : r < r_outer_;
      return in_ok && out_ok;
    }
    case Shape::Box:
      for (int i = 0; i < dim_; ++i)
        if (std::abs(x[i]) > half_widths_[i]) return false;
      return true;
    case Shape::CubeCell:
      for (int i = 0; i < dim_; ++i) {
        const double lo = side_ * corner_[i];
        const double hi = side_ * (corner_[i] + 1);
        if (!(x[i] >= lo && x[i] < hi)) return false;
      }
      return true;
  }
  return false;
}

void LatticeDomain::bounding_box(Site& lo, Site& hi) const {
  lo = {0, 0, 0};
  hi = {0, 0, 0};
  auto set_sym = [&](double r) {
    for (int i = 0; i < dim_; ++i) {
      lo[i] = int(std::floor(-r)) - 1;
      hi[i] = int(std::ceil(r)) + 1;
    }
  };
  switch (shape_) {
    case Shape::Ball:
    case Shape::Annulus:
      set_sym(r_outer_);
      break;
    case Shape::Box:
      for (int i = 0; i < dim_; ++i) {
        lo[i] = int(std::floor(-half_widths_[i])) - 1;
        hi[i] = int(std::ceil(half_widths_[i])) + 1;
      }
      break;
    case Shape::CubeCell:
      for (int i = 0; i < dim_; ++i) {
        lo[i] = int(std::floor(side_ * corner_[i])) - 1;
        hi[i] = int(std::ceil(side_ * (corner_[i] + 1))) + 1;
      }
      break;
  }
}

std::vector<Site> LatticeDomain::enumerate_sites() const {
  Site lo, hi;
  bounding_box(lo, hi);
  for (int i = 0; i < dim_; ++i) {
    // ~2^31 sites per axis would overflow long before memory does
    if (double(hi[i]) - double(lo[i]) > 2e9) throw std::runtime_error("unbounded domain");
  }
  std::vector<Site> out;
  Site n = {0, 0, 0};
  // lexicographic: axis 0 slowest
  const int d = dim_;
  std::array<int, 3> idx;
  for (idx[0] = lo[0]; idx[0] <= hi[0]; ++idx[0]) {
    for (idx[1] = (d > 1 ? lo[1] : 0); idx[1] <= (d > 1 ? hi[1] : 0); ++idx[1]) {
      for (idx[2] = (d > 2 ? lo[2] : 0); idx[2] <= (d > 2 ? hi[2] : 0); ++idx[2]) {
        n = {idx[0], d > 1 ? idx[1] : 0, d > 2 ? idx[2] : 0};
        if (contains(n)) out.push_back(n);
      }
    }
  }
  return out;
}

LatticeDomain LatticeDomain::scale(double beta) const {
  if (!(beta > 0)) throw std::invalid_argument("scale factor must be positive");
  LatticeDomain d = *this;
  d.r_inner_ *= beta;
  d.r_outer_ *= beta;
  for (double& h : d.half_widths_) h *= beta;
  d.side_ *= beta;
  return d;
}

std::int64_t LatticeDomain::boundary_links() const {
  const auto sites = enumerate_sites();
  std::int64_t links = 0;
  for (const auto& n : sites) {
    for (int ax = 0; ax < dim_; ++ax) {
      for (int dir : {-1, 1}) {
        Site m = n;
        m[ax] += dir;
        if (!contains(m)) ++links;
      }
    }
  }
  return links;
}

double LatticeDomain::volume() const {
  static const double unit_ball[4] = {0.0, 2.0, M_PI, 4.0 * M_PI / 3.0};
  switch (shape_) {
    case Shape::Ball:
      return unit_ball[dim_] * std::pow(r_outer_, dim_);
    case Shape::Annulus:
      return unit_ball[dim_] * (std::pow(r_outer_, dim_) - std::pow(r_inner_, dim_));
    case Shape::Box: {
      double v = 1.0;
      for (double h : half_widths_) v *= 2.0 * h;
      return v;
    }
    case Shape::CubeCell:
      return std::pow(side_, dim_);
  }
  return 0.0;
}

nlohmann::json LatticeDomain::to_json() const {
  nlohmann::json j;
  j["dimension"] = dim_;
  nlohmann::json params;
  switch (shape_) {
    case Shape::Ball:
      j["shape"] = "ball";
      params["radius"] = r_outer_;
      break;
    case Shape::Annulus:
      j["shape"] = "annulus";
      params["r_inner"] = r_inner_;
      params["r_outer"] = r_outer_;
      params["inner_closed"] = inner_closed_;
      params["outer_closed"] = outer_closed_;
      break;
    case Shape::Box:
      j["shape"] = "box";
      params["half_widths"] = half_widths_;
      break;
    case Shape::CubeCell: {
      j["shape"] = "cube_cell";
      std::vector<int> c(corner_.begin(), corner_.begin() + dim_);
      params["corner"] = c;
      params["side"] = side_;
      break;
    }
  }
  j["params"] = params;
  return j;
}

LatticeDomain LatticeDomain::from_json(const nlohmann::json& j) {
  const int dim = j.at("dimension").get<int>();
  const std::string shape = j.at("shape").get<std::string>();
  const auto& p = j.at("params");
  if (shape == "ball") return ball(dim, p.at("radius").get<double>());
  if (shape == "annulus")
    return annulus(dim, p.at("r_inner").get<double>(), p.at("r_outer").get<double>(),
                   p.value("inner_closed", true), p.value("outer_closed", true));
  if (shape == "box") return box(dim, p.at("half_widths").get<std::vector<double>>());
  if (shape == "cube_cell") {
    auto c = p.at("corner").get<std::vector<int>>();
    Site corner = {0, 0, 0};
    for (std::size_t i = 0; i < c.size() && i < 3; ++i) corner[i] = c[i];
    return cube_cell(dim, corner, p.at("side").get<double>());
  }
  throw std::invalid_argument("unknown domain shape: " + shape);
}

RegionSplit::RegionSplit(double e1, double e2, double a, double pp)
    : eps1(e1), eps2(e2), alpha(a), p(pp) {
  if (!(eps1 > 0)) throw std::invalid_argument("eps1 must be positive");
  if (!(eps2 > eps1)) throw std::invalid_argument("eps2 must exceed eps1");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  if (!(p > 0)) throw std::invalid_argument("p must be positive");
}

double RegionSplit::inner_radius() const { return eps1 * std::pow(alpha, 1.0 / p); }
double RegionSplit::outer_radius() const { return eps2 * std::pow(alpha, 1.0 / p); }

int RegionSplit::region_of(const std::array<double, 3>& x, int dim) const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += x[i] * x[i];
  const double r = std::sqrt(s);
  if (r < inner_radius()) return 1;
  if (r <= outer_radius()) return 2;
  return 3;
}

int RegionSplit::region_of_site(const Site& n, int dim) const {
  return region_of({double(n[0]), double(n[1]), double(n[2])}, dim);
}

LatticeDomain RegionSplit::omega1(int dim) const {
  return LatticeDomain::ball(dim, inner_radius());
}

LatticeDomain RegionSplit::omega2(int dim) const {
  return LatticeDomain::annulus(dim, inner_radius(), outer_radius(),
                                /*inner_closed=*/true, /*outer_closed=*/true);
}

LatticeDomain RegionSplit::omega3_truncated(int dim, double trunc_radius) const {
  return LatticeDomain::annulus(dim, outer_radius(), trunc_radius,
                                /*inner_closed=*/false, /*outer_closed=*/true);
}

}  // namespace spectralflow
