#include "spectralflow/bloch_dos.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spectralflow/eigencount.hpp"
#include "spectralflow/parallel.hpp"

namespace spectralflow {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

int cell_count(const ModelSpec& model) {
  int q = 1;
  for (int i = 0; i < model.dim(); ++i) q *= model.period()[i];
  return q;
}

Site cell_site(const ModelSpec& model, int idx) {
  Site s = {0, 0, 0};
  for (int i = model.dim() - 1; i >= 0; --i) {
    s[i] = idx % model.period()[i];
    idx /= model.period()[i];
  }
  return s;
}

int cell_idx(const ModelSpec& model, const Site& s) {
  int idx = 0;
  for (int i = 0; i < model.dim(); ++i) idx = idx * model.period()[i] + s[i];
  return idx;
}

}  // namespace

int default_k_per_axis(int dim) { return dim == 1 ? 256 : dim == 2 ? 64 : 24; }

Eigen::MatrixXcd bloch_matrix(const ModelSpec& model, const std::vector<double>& k) {
  const int d = model.dim();
  if (int(k.size()) != d) throw std::invalid_argument("quasimomentum dimension mismatch");
  const int q = cell_count(model);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(q, q);
  const std::complex<double> iunit(0.0, 1.0);
  for (int idx = 0; idx < q; ++idx) {
    Site s = cell_site(model, idx);
    m(idx, idx) += 2.0 * d + model.f(s);
    for (int ax = 0; ax < d; ++ax) {
      for (int dir : {-1, 1}) {
        Site t = s;
        t[ax] += dir;
        std::complex<double> phase = 1.0;
        if (t[ax] == model.period()[ax]) {
          t[ax] = 0;
          phase = std::exp(iunit * k[ax]);
        } else if (t[ax] < 0) {
          t[ax] = model.period()[ax] - 1;
          phase = std::exp(-iunit * k[ax]);
        }
        m(idx, cell_idx(model, t)) -= phase;
      }
    }
  }
  return m;
}

std::vector<double> bloch_bands_at(const ModelSpec& model, const std::vector<double>& k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bloch_matrix(model, k),
                                                     Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

namespace {

// Coordinate-descent polish of one band's extremum around a grid candidate.
double refine_band_extremum(const ModelSpec& model, int band, std::vector<double> k,
                            double step, bool maximize) {
  auto value = [&](const std::vector<double>& kk) {
    const double v = bloch_bands_at(model, kk)[band];
    return maximize ? v : -v;
  };
  double best = value(k);
  double h = step;
  for (int iter = 0; iter < 60 && h > 1e-12; ++iter) {
    bool moved = false;
    for (std::size_t ax = 0; ax < k.size(); ++ax) {
      for (double dir : {-1.0, 1.0}) {
        std::vector<double> kk = k;
        kk[ax] += dir * h;
        const double v = value(kk);
        if (v > best) {
          best = v;
          k = kk;
          moved = true;
        }
      }
    }
    if (!moved) h *= 0.5;
  }
  return maximize ? best : -best;
}

std::vector<std::vector<double>> k_grid(int dim, int k_per_axis) {
  std::vector<std::vector<double>> grid;
  const double step = kTwoPi / k_per_axis;
  if (dim == 1) {
    for (int i = 0; i < k_per_axis; ++i) grid.push_back({i * step});
  } else if (dim == 2) {
    for (int i = 0; i < k_per_axis; ++i)
      for (int j = 0; j < k_per_axis; ++j) grid.push_back({i * step, j * step});
  } else {
    for (int i = 0; i < k_per_axis; ++i)
      for (int j = 0; j < k_per_axis; ++j)
        for (int l = 0; l < k_per_axis; ++l)
          grid.push_back({i * step, j * step, l * step});
  }
  return grid;
}

}  // namespace

BandStructure band_structure(const ModelSpec& model, int k_per_axis) {
  if (k_per_axis <= 0) k_per_axis = default_k_per_axis(model.dim());
  BandStructure bs;
  bs.k_samples = k_grid(model.dim(), k_per_axis);
  bs.bands.resize(bs.k_samples.size());
  parallel_for(bs.k_samples.size(),
               [&](std::size_t i) { bs.bands[i] = bloch_bands_at(model, bs.k_samples[i]); });

  const int nbands = cell_count(model);
  std::vector<double> band_min(nbands, 1e300), band_max(nbands, -1e300);
  std::vector<std::vector<double>> argmin(nbands), argmax(nbands);
  for (std::size_t i = 0; i < bs.k_samples.size(); ++i) {
    for (int j = 0; j < nbands; ++j) {
      if (bs.bands[i][j] < band_min[j]) {
        band_min[j] = bs.bands[i][j];
        argmin[j] = bs.k_samples[i];
      }
      if (bs.bands[i][j] > band_max[j]) {
        band_max[j] = bs.bands[i][j];
        argmax[j] = bs.k_samples[i];
      }
    }
  }
  const double step = kTwoPi / k_per_axis;
  for (int j = 0; j < nbands; ++j) {
    band_min[j] = refine_band_extremum(model, j, argmin[j], step, /*maximize=*/false);
    band_max[j] = refine_band_extremum(model, j, argmax[j], step, /*maximize=*/true);
  }
  for (int j = 0; j + 1 < nbands; ++j) {
    if (band_min[j + 1] - band_max[j] > 1e-9)
      bs.gap_list.push_back({band_max[j], band_min[j + 1]});
  }
  return bs;
}

std::optional<GapInterval> find_gap(const ModelSpec& model, int k_per_axis) {
  const BandStructure bs = band_structure(model, k_per_axis);
  if (bs.gap_list.empty()) return std::nullopt;
  const auto widest =
      std::max_element(bs.gap_list.begin(), bs.gap_list.end(),
                       [](const GapInterval& a, const GapInterval& b) {
                         return a.width() < b.width();
                       });
  return *widest;
}

namespace {

// d=1 sublevel measure of one band: scan the periodic grid, bisect each
// crossing of lambda.
double band_sublevel_measure_1d(const ModelSpec& model, int band, double lambda,
                                int k_per_axis) {
  auto value = [&](double k) { return bloch_bands_at(model, {k})[band]; };
  const double step = kTwoPi / k_per_axis;
  double measure = 0.0;
  double e0 = value(0.0);
  for (int i = 0; i < k_per_axis; ++i) {
    const double k0 = i * step;
    const double k1 = k0 + step;
    const double e1 = value(i + 1 == k_per_axis ? 0.0 : k1);
    const bool b0 = e0 < lambda;
    const bool b1 = e1 < lambda;
    if (b0 && b1) {
      measure += step;
    } else if (b0 != b1) {
      double lo = k0, hi = k1;
      double vlo = e0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double vm = value(mid == kTwoPi ? 0.0 : mid);
        if ((vm < lambda) == (vlo < lambda)) {
          lo = mid;
          vlo = vm;
        } else {
          hi = mid;
        }
      }
      const double cross = 0.5 * (lo + hi);
      measure += b0 ? (cross - k0) : (k1 - cross);
    }
    e0 = e1;
  }
  return measure;
}

int sublevel_count(const ModelSpec& model, const std::vector<double>& k, double lambda) {
  const auto bands = bloch_bands_at(model, k);
  return int(std::lower_bound(bands.begin(), bands.end(), lambda) - bands.begin());
}

}  // namespace

double ids_bloch(const ModelSpec& model, double lambda, int k_per_axis) {
  const int d = model.dim();
  if (k_per_axis <= 0) k_per_axis = default_k_per_axis(d);
  const int q = cell_count(model);

  // outside the spectral envelope the answer is exact
  if (lambda <= -model.f_sup_norm()) return 0.0;
  if (lambda >= 4.0 * d + model.f_sup_norm()) return 1.0;

  if (d == 1) {
    double total = 0.0;
    for (int j = 0; j < q; ++j)
      total += band_sublevel_measure_1d(model, j, lambda, k_per_axis);
    return total / (kTwoPi * q);
  }

  // Midpoint quadrature over the Brillouin zone with one refinement pass on
  // cells where the sublevel count changes.
  const int K = k_per_axis;
  const double step = kTwoPi / K;
  const int K3 = d == 2 ? 1 : K;
  std::vector<int> counts(std::size_t(K) * K * K3);
  parallel_for(counts.size(), [&](std::size_t idx) {
    const int i = int(idx / (K * K3));
    const int j = int((idx / K3) % K);
    const int l = int(idx % K3);
    std::vector<double> k = {(i + 0.5) * step, (j + 0.5) * step};
    if (d == 3) k.push_back((l + 0.5) * step);
    counts[idx] = sublevel_count(model, k, lambda);
  });
  auto at = [&](int i, int j, int l) {
    auto wrap = [&](int v) { return (v % K + K) % K; };
    return counts[std::size_t(wrap(i)) * K * K3 + std::size_t(wrap(j)) * K3 +
                  (d == 3 ? wrap(l) : 0)];
  };
  std::vector<std::size_t> boundary_cells;
  double coarse_sum = 0.0;
  for (std::size_t idx = 0; idx < counts.size(); ++idx) {
    const int i = int(idx / (K * K3));
    const int j = int((idx / K3) % K);
    const int l = int(idx % K3);
    const int c = counts[idx];
    bool mixed = at(i - 1, j, l) != c || at(i + 1, j, l) != c || at(i, j - 1, l) != c ||
                 at(i, j + 1, l) != c;
    if (d == 3) mixed = mixed || at(i, j, l - 1) != c || at(i, j, l + 1) != c;
    if (mixed)
      boundary_cells.push_back(idx);
    else
      coarse_sum += c;
  }
  std::vector<double> refined(boundary_cells.size());
  const int m = 8;  // sub-midpoints per axis in the refinement pass
  parallel_for(boundary_cells.size(), [&](std::size_t b) {
    const std::size_t idx = boundary_cells[b];
    const int i = int(idx / (K * K3));
    const int j = int((idx / K3) % K);
    const int l = int(idx % K3);
    double sum = 0.0;
    int cells = 0;
    for (int si = 0; si < m; ++si)
      for (int sj = 0; sj < m; ++sj)
        for (int sl = 0; sl < (d == 3 ? m : 1); ++sl) {
          std::vector<double> k = {(i + (si + 0.5) / m) * step, (j + (sj + 0.5) / m) * step};
          if (d == 3) k.push_back((l + (sl + 0.5) / m) * step);
          sum += sublevel_count(model, k, lambda);
          ++cells;
        }
    refined[b] = sum / cells;
  });
  for (double r : refined) coarse_sum += r;
  return coarse_sum / (double(counts.size()) * q);
}

FiniteVolumeIds ids_finite_volume(const ModelSpec& model, double lambda,
                                  const std::vector<double>& beta_sequence,
                                  const LatticeDomain& base_domain) {
  if (beta_sequence.size() < 2)
    throw std::invalid_argument("beta sequence needs at least two entries");
  if (!(base_domain.volume() > 0))
    throw std::invalid_argument("base domain must have positive volume");
  FiniteVolumeIds out;
  out.betas = beta_sequence;
  out.ratios.resize(beta_sequence.size());
  const double vol = base_domain.volume();
  parallel_for(beta_sequence.size(), [&](std::size_t i) {
    const double beta = beta_sequence[i];
    const LatticeOperator op = assemble(base_domain.scale(beta), model);
    // counts at an exact eigenvalue resolve to "strictly below": the IDS is
    // a measure, so the tie is immaterial at this scale
    const Eigen::Index n = inertia(op, lambda).negatives;
    out.ratios[i] = double(n) / (std::pow(beta, model.dim()) * vol);
  });
  out.extrapolated = out.ratios.back();
  out.error_estimate = std::abs(out.ratios.back() - out.ratios[out.ratios.size() - 2]);
  return out;
}

double DosTable::rho(double lambda) const {
  if (lambda_grid.empty()) throw std::runtime_error("empty DOS table");
  if (lambda <= lambda_grid.front()) return rho_values.front();
  if (lambda >= lambda_grid.back()) return rho_values.back();
  const auto it = std::upper_bound(lambda_grid.begin(), lambda_grid.end(), lambda);
  const std::size_t hi = it - lambda_grid.begin();
  const double t =
      (lambda - lambda_grid[hi - 1]) / (lambda_grid[hi] - lambda_grid[hi - 1]);
  return rho_values[hi - 1] + t * (rho_values[hi] - rho_values[hi - 1]);
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void DosTable::write_csv(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << "lambda,rho,provenance,model_hash\n";
    for (std::size_t i = 0; i < lambda_grid.size(); ++i)
      out << format_double(lambda_grid[i]) << ',' << format_double(rho_values[i]) << ','
          << provenance << ',' << model_hash << '\n';
  }
  std::filesystem::rename(tmp, path);
}

DosTable DosTable::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);  // header
  DosTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string lam, rho, prov, hash;
    std::getline(ss, lam, ',');
    std::getline(ss, rho, ',');
    std::getline(ss, prov, ',');
    std::getline(ss, hash, ',');
    t.lambda_grid.push_back(std::stod(lam));
    t.rho_values.push_back(std::stod(rho));
    t.provenance = prov;
    t.model_hash = std::stoull(hash);
  }
  return t;
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("grid needs at least two points");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  return g;
}

namespace {

std::string cache_path_for(const ModelSpec& model, const std::vector<double>& grid,
                           int k_per_axis) {
  const char* dir = std::getenv("SPECTRAL_FLOW_CACHE");
  if (!dir || !*dir) return {};
  std::string key = std::to_string(model.hash()) + "|k" + std::to_string(k_per_axis);
  for (double g : grid) key += "|" + format_double(g);
  return std::string(dir) + "/dos_bloch_" + std::to_string(fnv1a64(key)) + ".csv";
}

void enforce_monotone(std::vector<double>& rho) {
  for (std::size_t i = 1; i < rho.size(); ++i) rho[i] = std::max(rho[i], rho[i - 1]);
  for (double& r : rho) r = std::clamp(r, 0.0, 1.0);
}

}  // namespace

DosTable build_dos_table_bloch(const ModelSpec& model, const std::vector<double>& grid,
                               int k_per_axis) {
  if (k_per_axis <= 0) k_per_axis = default_k_per_axis(model.dim());
  const std::string cache = cache_path_for(model, grid, k_per_axis);
  if (!cache.empty() && std::filesystem::exists(cache)) {
    DosTable t = DosTable::read_csv(cache);
    if (t.model_hash == model.hash() && t.lambda_grid.size() == grid.size()) return t;
  }
  DosTable t;
  t.lambda_grid = grid;
  t.rho_values.resize(grid.size());
  t.provenance = "bloch";
  t.model_hash = model.hash();
  // ids_bloch already fans out over k for d>=2; parallelize over lambda in 1d
  if (model.dim() == 1) {
    parallel_for(grid.size(), [&](std::size_t i) {
      t.rho_values[i] = ids_bloch(model, grid[i], k_per_axis);
    });
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i)
      t.rho_values[i] = ids_bloch(model, grid[i], k_per_axis);
  }
  enforce_monotone(t.rho_values);
  if (!cache.empty()) {
    std::filesystem::create_directories(std::filesystem::path(cache).parent_path());
    t.write_csv(cache);
  }
  return t;
}

DosTable build_dos_table_finite_volume(const ModelSpec& model,
                                       const std::vector<double>& grid,
                                       const std::vector<double>& beta_sequence,
                                       const LatticeDomain& base_domain) {
  DosTable t;
  t.lambda_grid = grid;
  t.rho_values.resize(grid.size());
  std::string prov = "finite_volume(";
  for (std::size_t i = 0; i < beta_sequence.size(); ++i)
    prov += (i ? ";" : "") + format_double(beta_sequence[i]);
  prov += ")";
  t.provenance = prov;
  t.model_hash = model.hash();
  parallel_for(grid.size(), [&](std::size_t i) {
    t.rho_values[i] =
        ids_finite_volume(model, grid[i], beta_sequence, base_domain).extrapolated;
  });
  enforce_monotone(t.rho_values);
  return t;
}

}  // namespace spectralflow
