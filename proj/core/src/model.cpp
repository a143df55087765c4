#include "spectralflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace spectralflow {

PsiProfile PsiProfile::make_constant(double c) {
  if (!(c >= 0)) throw std::invalid_argument("Psi must be nonnegative");
  PsiProfile p;
  p.kind = Kind::Constant;
  p.constant = c;
  return p;
}

PsiProfile PsiProfile::make_tabulated_1d(double psi_plus, double psi_minus) {
  if (!(psi_plus >= 0 && psi_minus >= 0))
    throw std::invalid_argument("Psi must be nonnegative");
  PsiProfile p;
  p.kind = Kind::Tabulated;
  p.values = {psi_plus, psi_minus};
  return p;
}

PsiProfile PsiProfile::make_tabulated_2d(std::vector<double> angles,
                                         std::vector<double> values) {
  if (angles.size() != values.size() || angles.size() < 2)
    throw std::invalid_argument("tabulated Psi needs matching angle/value lists");
  for (std::size_t i = 0; i + 1 < angles.size(); ++i)
    if (!(angles[i] < angles[i + 1]))
      throw std::invalid_argument("Psi angles must be strictly increasing");
  if (!(angles.front() >= 0 && angles.back() < 2 * M_PI))
    throw std::invalid_argument("Psi angles must lie in [0, 2pi)");
  for (double v : values)
    if (!(v >= 0)) throw std::invalid_argument("Psi must be nonnegative");
  PsiProfile p;
  p.kind = Kind::Tabulated;
  p.angles = std::move(angles);
  p.values = std::move(values);
  return p;
}

double PsiProfile::operator()(const std::array<double, 3>& theta, int dim) const {
  if (kind == Kind::Constant) return constant;
  if (dim == 1) return theta[0] >= 0 ? values[0] : values[1];
  if (dim == 2) {
    double a = std::atan2(theta[1], theta[0]);
    if (a < 0) a += 2 * M_PI;
    // periodic piecewise-linear in angle
    const std::size_t m = angles.size();
    std::size_t hi = std::lower_bound(angles.begin(), angles.end(), a) - angles.begin();
    double a0, a1, v0, v1;
    if (hi == 0 || hi == m) {
      a0 = angles[m - 1];
      a1 = angles[0] + 2 * M_PI;
      v0 = values[m - 1];
      v1 = values[0];
      if (hi == 0) a += 2 * M_PI;
    } else {
      a0 = angles[hi - 1];
      a1 = angles[hi];
      v0 = values[hi - 1];
      v1 = values[hi];
    }
    const double t = (a - a0) / (a1 - a0);
    return v0 + t * (v1 - v0);
  }
  throw std::invalid_argument("tabulated Psi supports d <= 2 only");
}

double PsiProfile::max_value() const {
  if (kind == Kind::Constant) return constant;
  return *std::max_element(values.begin(), values.end());
}

nlohmann::json PsiProfile::to_json() const {
  nlohmann::json j;
  if (kind == Kind::Constant) {
    j["kind"] = "constant";
    j["value"] = constant;
  } else {
    j["kind"] = "tabulated";
    if (!angles.empty()) j["angles"] = angles;
    j["values"] = values;
  }
  return j;
}

PsiProfile PsiProfile::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return make_constant(j.at("value").get<double>());
  if (kind == "tabulated") {
    auto values = j.at("values").get<std::vector<double>>();
    if (j.contains("angles"))
      return make_tabulated_2d(j.at("angles").get<std::vector<double>>(), std::move(values));
    if (values.size() != 2)
      throw std::invalid_argument("1d tabulated Psi needs exactly two values");
    return make_tabulated_1d(values[0], values[1]);
  }
  throw std::invalid_argument("unknown Psi kind: " + kind);
}

ModelSpec::ModelSpec(int dim, std::array<int, 3> period, std::vector<double> cell_values,
                     PsiProfile psi, double p, double near_field_cap)
    : dim_(dim),
      period_(period),
      cell_values_(std::move(cell_values)),
      psi_(std::move(psi)),
      p_(p),
      near_field_cap_(near_field_cap) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  long cells = 1;
  for (int i = 0; i < dim; ++i) {
    if (period_[i] < 1) throw std::invalid_argument("period must be positive per axis");
    cells *= period_[i];
  }
  for (int i = dim; i < kMaxDim; ++i) period_[i] = 1;
  if (long(cell_values_.size()) != cells)
    throw std::invalid_argument("cell_values size must equal the period cell volume");
  if (!(p_ > 0)) throw std::invalid_argument("impurity exponent p must be positive");
  if (!(near_field_cap_ >= 0)) throw std::invalid_argument("near_field_cap must be >= 0");
}

int ModelSpec::cell_size() const {
  int q = 1;
  for (int i = 0; i < dim_; ++i) q *= period_[i];
  return q;
}

int ModelSpec::cell_index(const Site& n) const {
  int idx = 0;
  for (int i = 0; i < dim_; ++i) {
    int r = n[i] % period_[i];
    if (r < 0) r += period_[i];
    idx = idx * period_[i] + r;
  }
  return idx;
}

double ModelSpec::f(const Site& n) const { return cell_values_[cell_index(n)]; }

double ModelSpec::f_sup_norm() const {
  double m = 0.0;
  for (double v : cell_values_) m = std::max(m, std::abs(v));
  return m;
}

double ModelSpec::V(const Site& n) const {
  bool origin = true;
  for (int i = 0; i < dim_; ++i) origin = origin && n[i] == 0;
  if (origin) return near_field_cap_;
  return V_at({double(n[0]), double(n[1]), double(n[2])});
}

double ModelSpec::V_at(const std::array<double, 3>& x) const {
  const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  if (!(r > 0)) throw std::invalid_argument("V_at requires x != 0");
  const std::array<double, 3> theta = {x[0] / r, x[1] / r, x[2] / r};
  return psi_(theta, dim_) * std::pow(r, -p_);
}

double ModelSpec::V_sup_norm() const {
  double m = near_field_cap_;
  // radially decreasing law: scan the |n_i| <= 1 shell
  Site n = {0, 0, 0};
  for (n[0] = -1; n[0] <= 1; ++n[0])
    for (n[1] = (dim_ > 1 ? -1 : 0); n[1] <= (dim_ > 1 ? 1 : 0); ++n[1])
      for (n[2] = (dim_ > 2 ? -1 : 0); n[2] <= (dim_ > 2 ? 1 : 0); ++n[2]) {
        if (n[0] == 0 && n[1] == 0 && n[2] == 0) continue;
        m = std::max(m, V(n));
      }
  return m;
}

nlohmann::json ModelSpec::to_json() const {
  nlohmann::json j;
  j["d"] = dim_;
  std::vector<int> q(period_.begin(), period_.begin() + dim_);
  j["period"] = q;
  j["cell_values"] = cell_values_;
  j["impurity"] = {{"psi", psi_.to_json()}, {"p", p_}, {"near_field_cap", near_field_cap_}};
  return j;
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
  const int dim = j.at("d").get<int>();
  auto q = j.at("period").get<std::vector<int>>();
  std::array<int, 3> period = {1, 1, 1};
  for (std::size_t i = 0; i < q.size() && i < 3; ++i) period[i] = q[i];
  const auto& imp = j.at("impurity");
  return ModelSpec(dim, period, j.at("cell_values").get<std::vector<double>>(),
                   PsiProfile::from_json(imp.at("psi")), imp.at("p").get<double>(),
                   imp.value("near_field_cap", 0.0));
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t ModelSpec::hash() const { return fnv1a64(to_json().dump()); }

ModelSpec ModelSpec::free_1d(double p, double near_field_cap) {
  return ModelSpec(1, {1, 1, 1}, {0.0}, PsiProfile::make_constant(1.0), p, near_field_cap);
}

}  // namespace spectralflow
