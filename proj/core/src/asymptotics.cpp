#include "spectralflow/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spectralflow/eigencount.hpp"
#include "spectralflow/parallel.hpp"

namespace spectralflow {

double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return M_PI;
    case 3: return 4.0 * M_PI / 3.0;
  }
  throw std::invalid_argument("dimension out of range");
}

namespace {

struct Direction {
  std::array<double, 3> theta;
  double weight;  // surface measure carried by this sample
};

std::vector<Direction> direction_set(int d, int m) {
  std::vector<Direction> dirs;
  if (d == 1) {
    dirs.push_back({{1.0, 0.0, 0.0}, 1.0});
    dirs.push_back({{-1.0, 0.0, 0.0}, 1.0});
  } else if (d == 2) {
    if (m <= 0) m = 256;
    for (int i = 0; i < m; ++i) {
      const double a = 2.0 * M_PI * (i + 0.5) / m;
      dirs.push_back({{std::cos(a), std::sin(a), 0.0}, 2.0 * M_PI / m});
    }
  } else {
    if (m <= 0) m = 512;
    // Fibonacci sphere
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / m;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * i;
      dirs.push_back({{r * std::cos(a), r * std::sin(a), z}, 4.0 * M_PI / m});
    }
  }
  return dirs;
}

double gauss5(double a, double b, const std::function<double(double)>& g) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                              0.5384693101056831, 0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                              0.4786286704993665, 0.2369268850561891};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += w[i] * g(c + h * x[i]);
  return s * h;
}

// Radial integral of (rho(lambda + psi*r^{-p}) - rho(lambda)) r^{d-1} over
// (r_lo, r_hi]. Breakpoints sit where the shifted argument crosses the DOS
// grid, so each segment is smooth; `splits` halves every segment (error
// probe).
double radial_integral(const DosTable& dos, double lambda, double psi, double p, int d,
                       double r_lo, double r_hi, int splits) {
  if (!(psi > 0) || !(r_hi > r_lo)) return 0.0;
  const double rho0 = dos.rho(lambda);
  auto radius_of = [&](double mu) { return std::pow(psi / (mu - lambda), 1.0 / p); };

  std::vector<double> nodes;
  nodes.push_back(r_lo);
  nodes.push_back(r_hi);
  for (double mu : dos.lambda_grid) {
    if (mu <= lambda) continue;
    const double r = radius_of(mu);
    if (r > r_lo && r < r_hi) nodes.push_back(r);
  }
  std::sort(nodes.begin(), nodes.end());

  auto g = [&](double r) {
    return (dos.rho(lambda + psi * std::pow(r, -p)) - rho0) * std::pow(r, d - 1);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = nodes[i], b = nodes[i + 1];
    const int pieces = 1 << splits;
    for (int j = 0; j < pieces; ++j)
      total += gauss5(a + (b - a) * j / pieces, a + (b - a) * (j + 1) / pieces, g);
  }
  return total;
}

TheoreticalIntegral integral_impl(const DosTable& dos, const ModelSpec& model,
                                  double lambda, const GapInterval& gap, double r_lo_eps,
                                  double r_hi_eps, int direction_samples) {
  if (!(lambda > gap.lower && lambda < gap.upper))
    throw std::invalid_argument("lambda not inside the spectral gap");
  const double top = 4.0 * model.dim() + model.f_sup_norm();
  if (dos.lambda_grid.empty() || dos.lambda_grid.back() < top ||
      dos.lambda_grid.front() > lambda)
    throw std::invalid_argument("DOS table does not cover [lambda, 4d + ||f||]");

  const int d = model.dim();
  auto dirs = direction_set(d, direction_samples);
  TheoreticalIntegral out;
  out.lambda = lambda;
  out.direction_samples = int(dirs.size());
  out.radial_tolerance = 1e-10;

  double v0 = 0.0, v1 = 0.0;
  for (const auto& dir : dirs) {
    const double psi = model.psi()(dir.theta, d);
    if (!(psi > 0)) continue;
    // support ends where the shifted argument falls back into the gap
    double r_max = std::pow(psi / (gap.upper - lambda), 1.0 / model.p());
    double r_lo = r_lo_eps, r_hi = r_hi_eps;
    if (r_hi <= 0) r_hi = r_max;
    r_hi = std::min(r_hi, r_max);
    v0 += dir.weight * radial_integral(dos, lambda, psi, model.p(), d, r_lo, r_hi, 0);
    v1 += dir.weight * radial_integral(dos, lambda, psi, model.p(), d, r_lo, r_hi, 1);
  }
  out.value = v1;
  out.quadrature_error = std::abs(v1 - v0);
  return out;
}

}  // namespace

TheoreticalIntegral theoretical_integral(const DosTable& dos, const ModelSpec& model,
                                         double lambda, const GapInterval& gap,
                                         int direction_samples) {
  return integral_impl(dos, model, lambda, gap, 0.0, -1.0, direction_samples);
}

TheoreticalIntegral theoretical_integral_annulus(const DosTable& dos,
                                                 const ModelSpec& model, double lambda,
                                                 const GapInterval& gap, double eps1,
                                                 double eps2, int direction_samples) {
  return integral_impl(dos, model, lambda, gap, eps1, eps2, direction_samples);
}

FlowCount flow_count(const ModelSpec& model, double lambda, double alpha,
                     const LatticeDomain& domain, double gap_width) {
  if (alpha < 0) throw std::invalid_argument("alpha must be nonnegative");
  const LatticeOperator a0 = assemble(domain, model);
  const LatticeOperator ap =
      alpha == 0.0 ? a0 : assemble_perturbed(domain, model, alpha);
  const double shift_unit = 1e-7 * gap_width;
  for (int attempt = 0; attempt < 3; ++attempt) {
    const double lam = lambda + attempt * shift_unit;
    try {
      FlowCount fc;
      fc.count = count_below(ap, lam) - count_below(a0, lam);
      fc.lambda_used = lam;
      return fc;
    } catch (const SpectrumCollision&) {
      continue;
    }
  }
  throw SpectrumCollision("flow count: lambda collides with spectrum after shifts");
}

double eps2_admissible_bound(const ModelSpec& model, double lambda,
                             const GapInterval& gap) {
  const double psi = model.psi_sup_norm();
  return std::pow(psi * (1.0 / std::abs(gap.upper - lambda) +
                         1.0 / std::abs(gap.lower - lambda)),
                  1.0 / model.p());
}

RegionSplitCounts region_split_counts(const ModelSpec& model, double lambda, double alpha,
                                      const RegionSplit& split, const GapInterval& gap,
                                      double trunc_factor) {
  if (!(split.eps2 > eps2_admissible_bound(model, lambda, gap)))
    throw std::invalid_argument("inadmissible eps2 for this lambda");
  const int d = model.dim();
  RegionSplitCounts out;
  const FlowCount f1 = flow_count(model, lambda, alpha, split.omega1(d), gap.width());
  const FlowCount f2 = flow_count(model, lambda, alpha, split.omega2(d), gap.width());
  const FlowCount f3 = flow_count(
      model, lambda, alpha,
      split.omega3_truncated(d, trunc_factor * split.outer_radius()), gap.width());
  out.N1 = f1.count;
  out.N2 = f2.count;
  out.N3_check = f3.count;
  out.lambda_used = std::max({f1.lambda_used, f2.lambda_used, f3.lambda_used});
  out.links_r = LatticeDomain::ball(d, split.inner_radius()).boundary_links() +
                LatticeDomain::ball(d, split.outer_radius()).boundary_links();
  return out;
}

RiemannSandwich riemann_sandwich(const ModelSpec& model, double lambda, double alpha,
                                 const RegionSplit& split, double cell_size,
                                 const DosTable& dos, const GapInterval& gap) {
  if (!(cell_size > 0)) throw std::invalid_argument("cell_size must be positive");
  const int d = model.dim();
  const double eps1 = split.eps1, eps2 = split.eps2;
  const double rho0 = dos.rho(lambda);
  RiemannSandwich out;

  const int lo = int(std::floor(-eps2 / cell_size)) - 1;
  const int hi = int(std::ceil(eps2 / cell_size)) + 1;

  auto in_annulus = [&](const std::array<double, 3>& x) {
    double s = 0;
    for (int i = 0; i < d; ++i) s += x[i] * x[i];
    const double r = std::sqrt(s);
    return r > eps1 && r < eps2;
  };

  const int m = d == 1 ? 256 : 16;  // subsamples per axis for volume/extrema
  Site cell = {0, 0, 0};
  for (cell[0] = lo; cell[0] <= hi; ++cell[0]) {
    for (cell[1] = (d > 1 ? lo : 0); cell[1] <= (d > 1 ? hi : 0); ++cell[1]) {
      for (cell[2] = (d > 2 ? lo : 0); cell[2] <= (d > 2 ? hi : 0); ++cell[2]) {
        double inside = 0.0;
        double vmin = 1e300, vmax = -1e300;
        std::array<int, 3> sub = {0, 0, 0};
        for (sub[0] = 0; sub[0] < m; ++sub[0])
          for (sub[1] = 0; sub[1] < (d > 1 ? m : 1); ++sub[1])
            for (sub[2] = 0; sub[2] < (d > 2 ? m : 1); ++sub[2]) {
              std::array<double, 3> x = {0, 0, 0};
              for (int i = 0; i < d; ++i)
                x[i] = cell_size * (cell[i] + (sub[i] + 0.5) / m);
              if (!in_annulus(x)) continue;
              inside += 1.0;
              const double v = model.V_at(x);
              vmin = std::min(vmin, v);
              vmax = std::max(vmax, v);
            }
        if (inside == 0.0) continue;
        // cell corners that land in the annulus sharpen the extrema
        for (int c = 0; c < (1 << d); ++c) {
          std::array<double, 3> x = {0, 0, 0};
          for (int i = 0; i < d; ++i)
            x[i] = cell_size * (cell[i] + ((c >> i) & 1));
          if (!in_annulus(x)) continue;
          const double v = model.V_at(x);
          vmin = std::min(vmin, v);
          vmax = std::max(vmax, v);
        }
        const double vol = std::pow(cell_size, d) * inside / std::pow(double(m), d);
        out.lower_sum += (dos.rho(lambda + vmin) - rho0) * vol;
        out.upper_sum += (dos.rho(lambda + vmax) - rho0) * vol;
        ++out.cell_count;
      }
    }
  }

  const RegionSplit at_alpha(split.eps1, split.eps2, alpha, split.p);
  const FlowCount n2 = flow_count(model, lambda, alpha, at_alpha.omega2(d), gap.width());
  out.N2_scaled = double(n2.count) / std::pow(alpha, double(d) / model.p());
  return out;
}

ExperimentReport convergence_study(const ModelSpec& model, double lambda,
                                   const std::vector<double>& alpha_grid,
                                   const RegionSplit& split_template, const DosTable& dos,
                                   const GapInterval& gap, double trunc_factor) {
  const int d = model.dim();
  ExperimentReport rep;
  rep.lambda = lambda;
  rep.gap = gap;
  rep.eps1 = split_template.eps1;
  rep.eps2 = split_template.eps2;
  rep.domain_radius_rule = trunc_factor;
  rep.n1_envelope_coeff = 2.0 * unit_ball_volume(d) * std::pow(split_template.eps1, d);

  const TheoreticalIntegral integral = theoretical_integral(dos, model, lambda, gap);
  rep.integral_value = integral.value;
  rep.integral_error = integral.quadrature_error;

  rep.records.resize(alpha_grid.size());
  parallel_for(alpha_grid.size(), [&](std::size_t i) {
    const double alpha = alpha_grid[i];
    FlowRecord rec;
    rec.alpha = alpha;
    const RegionSplit split(split_template.eps1, split_template.eps2, alpha,
                            split_template.p);
    const LatticeDomain full =
        LatticeDomain::ball(d, trunc_factor * split.outer_radius());
    const FlowCount fc = flow_count(model, lambda, alpha, full, gap.width());
    rec.N = fc.count;
    rec.lambda_shift = fc.lambda_used - lambda;
    const RegionSplitCounts rs =
        region_split_counts(model, lambda, alpha, split, gap, trunc_factor);
    rec.N1 = rs.N1;
    rec.N2 = rs.N2;
    rec.N3_check = rs.N3_check;
    rec.links_r = rs.links_r;
    const double scale = std::pow(alpha, double(d) / model.p());
    rec.ratio = integral.value > 0 ? double(rec.N) / (scale * integral.value) : 0.0;
    rep.records[i] = rec;
  });

  if (!rep.records.empty() && integral.value > 0) {
    bool nonincreasing = true;
    for (std::size_t i = 1; i < rep.records.size(); ++i) {
      if (std::abs(rep.records[i].ratio - 1.0) >
          std::abs(rep.records[i - 1].ratio - 1.0) + 1e-12)
        nonincreasing = false;
    }
    rep.trend_toward_1 = nonincreasing;
    rep.final_deviation = std::abs(rep.records.back().ratio - 1.0);
  }
  return rep;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["lambda"] = lambda;
  j["gap"] = {{"lower", gap.lower}, {"upper", gap.upper}};
  j["eps1"] = eps1;
  j["eps2"] = eps2;
  j["domain_radius_rule"] = domain_radius_rule;
  j["integral"] = {{"value", integral_value}, {"quadrature_error", integral_error}};
  j["n1_envelope_coeff"] = n1_envelope_coeff;
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    recs.push_back({{"alpha", r.alpha},
                    {"N", r.N},
                    {"N1", r.N1},
                    {"N2", r.N2},
                    {"N3_check", r.N3_check},
                    {"links_r", r.links_r},
                    {"ratio", r.ratio},
                    {"lambda_shift", r.lambda_shift}});
  }
  j["records"] = recs;
  j["verdict"] = {{"trend_toward_1", trend_toward_1}, {"final_deviation", final_deviation}};
  return j;
}

void ExperimentReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "alpha,N,N1,N2,ratio,links_r,lambda_shift\n";
  for (const auto& r : records)
    out << fmt(r.alpha) << ',' << r.N << ',' << r.N1 << ',' << r.N2 << ',' << fmt(r.ratio)
        << ',' << r.links_r << ',' << fmt(r.lambda_shift) << '\n';
}

void ExperimentReport::write_svg(const std::string& path) const {
  const int W = 640, H = 420, ml = 70, mr = 20, mt = 20, mb = 50;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);

  double xmin = 1e300, xmax = -1e300, ymax = 1.2;
  for (const auto& r : records) {
    xmin = std::min(xmin, std::log10(r.alpha));
    xmax = std::max(xmax, std::log10(r.alpha));
    ymax = std::max(ymax, r.ratio * 1.1);
  }
  if (records.empty()) {
    xmin = 0;
    xmax = 1;
  }
  if (xmax <= xmin) xmax = xmin + 1;
  auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - y / ymax * (H - mt - mb); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  // decade ticks
  for (int e = int(std::ceil(xmin)); e <= int(std::floor(xmax)); ++e) {
    const double x = px(e);
    out << "<line x1=\"" << fmt_short(x) << "\" y1=\"" << H - mb << "\" x2=\""
        << fmt_short(x) << "\" y2=\"" << H - mb + 6 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt_short(x) << "\" y=\"" << H - mb + 22
        << "\" text-anchor=\"middle\" font-size=\"12\">1e" << e << "</text>\n";
  }
  for (double y = 0.0; y <= ymax + 1e-9; y += 0.25) {
    out << "<line x1=\"" << ml - 6 << "\" y1=\"" << fmt_short(py(y)) << "\" x2=\"" << ml
        << "\" y2=\"" << fmt_short(py(y)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 10 << "\" y=\"" << fmt_short(py(y) + 4)
        << "\" text-anchor=\"end\" font-size=\"12\">" << fmt_short(y) << "</text>\n";
  }
  // reference line ratio = 1
  out << "<line x1=\"" << ml << "\" y1=\"" << fmt_short(py(1.0)) << "\" x2=\"" << W - mr
      << "\" y2=\"" << fmt_short(py(1.0))
      << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  // ratio curve
  if (!records.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& r : records)
      out << fmt_short(px(std::log10(r.alpha))) << ',' << fmt_short(py(r.ratio)) << ' ';
    out << "\"/>\n";
    for (const auto& r : records)
      out << "<circle cx=\"" << fmt_short(px(std::log10(r.alpha))) << "\" cy=\""
          << fmt_short(py(r.ratio)) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }
  out << "<text x=\"" << (W + ml - mr) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">alpha</text>\n";
  out << "<text x=\"16\" y=\"" << (H + mt - mb) / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (H + mt - mb) / 2 << ")\">N / (alpha^(d/p) I)</text>\n";
  out << "</svg>\n";
}

}  // namespace spectralflow
