#include "spectralflow/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "spectralflow/birman_schwinger.hpp"
#include "spectralflow/eigencount.hpp"

namespace spectralflow {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

bool wants_format(const ExperimentConfig& c, const std::string& f) {
  return std::find(c.formats.begin(), c.formats.end(), f) != c.formats.end();
}

}  // namespace

std::vector<double> AlphaGridSpec::values() const {
  if (points < 1) throw ConfigError("alpha grid needs at least one point");
  if (!(min >= 0) || !(max >= min)) throw ConfigError("alpha grid requires 0 <= min <= max");
  if (log_spaced && !(min > 0))
    throw ConfigError("log-spaced alpha grid requires min > 0");
  std::vector<double> v(points);
  if (points == 1) {
    v[0] = min;
    return v;
  }
  for (int i = 0; i < points; ++i) {
    const double t = double(i) / (points - 1);
    v[i] = log_spaced ? min * std::pow(max / min, t) : min + (max - min) * t;
  }
  return v;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.model = ModelSpec::from_json(j.at("model"));
    if (j.contains("lambda")) {
      const auto& l = j.at("lambda");
      if (l.is_string()) {
        if (l.get<std::string>() != "auto-midgap")
          throw ConfigError("lambda must be a number or \"auto-midgap\"");
      } else {
        c.lambda = l.get<double>();
      }
    }
    if (j.contains("alpha_grid")) {
      const auto& a = j.at("alpha_grid");
      c.alpha_grid.min = a.at("min").get<double>();
      c.alpha_grid.max = a.at("max").get<double>();
      c.alpha_grid.points = a.at("points").get<int>();
      c.alpha_grid.log_spaced = a.value("log_spaced", a.value("log", true));
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      if (s.contains("eps1")) c.eps1 = s.at("eps1").get<double>();
      if (s.contains("eps2")) {
        const auto& e = s.at("eps2");
        if (e.is_string()) {
          if (e.get<std::string>() != "auto")
            throw ConfigError("eps2 must be a number or \"auto\"");
        } else {
          c.eps2 = e.get<double>();
        }
      }
    }
    if (j.contains("dos")) {
      const auto& d = j.at("dos");
      c.dos_route = d.value("route", std::string("bloch"));
      if (c.dos_route != "bloch" && c.dos_route != "finite_volume" && c.dos_route != "both")
        throw ConfigError("dos.route must be bloch, finite_volume, or both");
      c.dos_grid_points = d.value("grid_points", 801);
      c.k_per_axis = d.value("k_per_axis", 0);
      if (d.contains("betas")) c.beta_sequence = d.at("betas").get<std::vector<double>>();
    }
    if (j.contains("trunc_factor")) c.trunc_factor = j.at("trunc_factor").get<double>();
    if (j.contains("output")) {
      const auto& o = j.at("output");
      c.output_directory = o.value("directory", std::string("."));
      if (o.contains("formats")) c.formats = o.at("formats").get<std::vector<std::string>>();
    }
    c.seed = j.value("seed", std::uint64_t(0));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  if (c.trunc_factor < 1.0) throw ConfigError("trunc_factor must be >= 1");
  if (c.dos_grid_points < 2) throw ConfigError("dos.grid_points must be >= 2");
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error in ") + path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["model"] = model.to_json();
  if (lambda)
    j["lambda"] = *lambda;
  else
    j["lambda"] = "auto-midgap";
  j["alpha_grid"] = {{"min", alpha_grid.min},
                     {"max", alpha_grid.max},
                     {"points", alpha_grid.points},
                     {"log", alpha_grid.log_spaced}};
  nlohmann::json split;
  if (eps1) split["eps1"] = *eps1;
  split["eps2"] = eps2 ? nlohmann::json(*eps2) : nlohmann::json("auto");
  j["split"] = split;
  j["dos"] = {{"route", dos_route},
              {"grid_points", dos_grid_points},
              {"k_per_axis", k_per_axis},
              {"betas", beta_sequence}};
  j["trunc_factor"] = trunc_factor;
  j["output"] = {{"directory", output_directory}, {"formats", formats}};
  j["seed"] = seed;
  return j;
}

ResolvedExperiment resolve_experiment(const ExperimentConfig& config) {
  ResolvedExperiment r;
  r.config = config;
  const auto gap = find_gap(config.model, config.k_per_axis);
  if (!config.lambda || !config.eps2) {
    if (!gap)
      throw ConfigError("model has no spectral gap; lambda and eps2 must be explicit");
  }
  if (gap) r.gap = *gap;
  r.lambda = config.lambda ? *config.lambda : r.gap.midpoint();
  if (!config.lambda && !(r.lambda > r.gap.lower && r.lambda < r.gap.upper))
    throw ConfigError("resolved lambda fell outside the gap");
  if (config.eps2) {
    r.eps2 = *config.eps2;
  } else {
    r.eps2 = 1.25 * eps2_admissible_bound(config.model, r.lambda, r.gap);
  }
  r.eps1 = config.eps1 ? *config.eps1 : r.eps2 / 4.0;
  if (!(r.eps1 > 0 && r.eps1 < r.eps2))
    throw ConfigError("split requires 0 < eps1 < eps2");
  return r;
}

std::vector<std::string> run_bands(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_directory);
  const BandStructure bs = band_structure(config.model, config.k_per_axis);
  std::vector<std::string> written;

  const std::string bands_path = join_path(config.output_directory, "bands.csv");
  {
    std::ofstream out(bands_path);
    if (!out) throw std::runtime_error("cannot write " + bands_path);
    out << "k1";
    for (int i = 1; i < config.model.dim(); ++i) out << ",k" << i + 1;
    for (std::size_t b = 0; b < bs.bands.front().size(); ++b) out << ",band" << b;
    out << '\n';
    for (std::size_t i = 0; i < bs.k_samples.size(); ++i) {
      for (std::size_t c = 0; c < bs.k_samples[i].size(); ++c)
        out << (c ? "," : "") << fmt(bs.k_samples[i][c]);
      for (double e : bs.bands[i]) out << ',' << fmt(e);
      out << '\n';
    }
  }
  written.push_back(bands_path);

  const std::string gap_path = join_path(config.output_directory, "gap.json");
  {
    nlohmann::json j;
    j["has_gap"] = !bs.gap_list.empty();
    nlohmann::json gaps = nlohmann::json::array();
    for (const auto& g : bs.gap_list)
      gaps.push_back({{"lower", g.lower}, {"upper", g.upper}, {"width", g.width()}});
    j["gaps"] = gaps;
    std::ofstream out(gap_path);
    out << j.dump(2) << '\n';
  }
  written.push_back(gap_path);
  return written;
}

std::vector<std::string> run_dos(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_directory);
  const ModelSpec& m = config.model;
  const double lo = -m.f_sup_norm() - 1.0;
  const double hi = 4.0 * m.dim() + m.f_sup_norm() + 1.0;
  const auto grid = uniform_grid(lo, hi, config.dos_grid_points);
  std::vector<std::string> written;

  std::optional<DosTable> bloch, fv;
  if (config.dos_route == "bloch" || config.dos_route == "both")
    bloch = build_dos_table_bloch(m, grid, config.k_per_axis);
  if (config.dos_route == "finite_volume" || config.dos_route == "both")
    fv = build_dos_table_finite_volume(m, grid, config.beta_sequence,
                                       LatticeDomain::ball(m.dim(), 1.0));

  if (bloch) {
    const std::string p = join_path(config.output_directory, "dos_bloch.csv");
    bloch->write_csv(p);
    written.push_back(p);
  }
  if (fv) {
    const std::string p = join_path(config.output_directory, "dos_finite_volume.csv");
    fv->write_csv(p);
    written.push_back(p);
  }
  if (bloch && fv) {
    const std::string p = join_path(config.output_directory, "dos_agreement.csv");
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p);
    out << "lambda,rho_bloch,rho_finite_volume,abs_diff\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      out << fmt(grid[i]) << ',' << fmt(bloch->rho_values[i]) << ','
          << fmt(fv->rho_values[i]) << ','
          << fmt(std::abs(bloch->rho_values[i] - fv->rho_values[i])) << '\n';
    written.push_back(p);
  }
  return written;
}

std::vector<std::string> run_flow(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_directory);
  const ResolvedExperiment r = resolve_experiment(config);
  const auto alphas = config.alpha_grid.values();

  const std::string path = join_path(config.output_directory, "flow.csv");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "alpha,N,lambda_shift\n";
  for (double alpha : alphas) {
    const double radius =
        config.trunc_factor * r.eps2 * std::pow(std::max(alpha, 1.0), 1.0 / config.model.p());
    const FlowCount fc = flow_count(config.model, r.lambda, alpha,
                                    LatticeDomain::ball(config.model.dim(), radius),
                                    r.gap.width() > 0 ? r.gap.width() : 1.0);
    out << fmt(alpha) << ',' << fc.count << ',' << fmt(fc.lambda_used - r.lambda) << '\n';
  }
  return {path};
}

std::vector<std::string> run_bs_verify(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_directory);
  const ResolvedExperiment r = resolve_experiment(config);
  const auto alphas = config.alpha_grid.values();
  // dense BS matrix: keep the truncation modest
  const double radius = std::min(
      60.5, config.trunc_factor * r.eps2 *
                std::pow(std::max(config.alpha_grid.max, 1.0), 1.0 / config.model.p()));
  const auto rows =
      verify_bs_principle(config.model, LatticeDomain::ball(config.model.dim(), radius),
                          r.lambda, alphas);
  const std::string path = join_path(config.output_directory, "bs_verify.csv");
  write_bs_report_csv(rows, path);
  return {path};
}

std::vector<std::string> run_asymptotics(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_directory);
  const auto t0 = std::chrono::steady_clock::now();
  const ResolvedExperiment r = resolve_experiment(config);
  const ModelSpec& m = config.model;

  const double hi = 4.0 * m.dim() + m.f_sup_norm() + 1.0;
  const auto grid = uniform_grid(-m.f_sup_norm() - 1.0, hi, config.dos_grid_points);
  const DosTable dos = build_dos_table_bloch(m, grid, config.k_per_axis);

  const RegionSplit split(r.eps1, r.eps2, 1.0, m.p());
  const ExperimentReport rep = convergence_study(
      m, r.lambda, config.alpha_grid.values(), split, dos, r.gap, config.trunc_factor);

  std::vector<std::string> written;
  if (wants_format(config, "json")) {
    const std::string p = join_path(config.output_directory, "report.json");
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p);
    out << rep.to_json().dump(2) << '\n';
    written.push_back(p);
  }
  if (wants_format(config, "csv")) {
    const std::string p = join_path(config.output_directory, "report.csv");
    rep.write_csv(p);
    written.push_back(p);
  }
  if (wants_format(config, "svg")) {
    const std::string p = join_path(config.output_directory, "report.svg");
    rep.write_svg(p);
    written.push_back(p);
  }
  // wall time lives in a sidecar so the report files stay byte-reproducible
  {
    const auto t1 = std::chrono::steady_clock::now();
    const std::string p = join_path(config.output_directory, "report_timing.txt");
    std::ofstream out(p);
    out << "asymptotics_wall_seconds "
        << std::chrono::duration<double>(t1 - t0).count() << '\n';
  }
  return written;
}

std::vector<std::string> run_report(const ExperimentConfig& config) {
  const std::string dir = config.output_directory;
  nlohmann::json summary;
  summary["artifacts"] = nlohmann::json::array();
  for (const char* name : {"bands.csv", "gap.json", "dos_bloch.csv",
                           "dos_finite_volume.csv", "dos_agreement.csv", "flow.csv",
                           "bs_verify.csv", "report.json", "report.csv", "report.svg"}) {
    if (std::filesystem::exists(join_path(dir, name)))
      summary["artifacts"].push_back(name);
  }
  const std::string report_path = join_path(dir, "report.json");
  if (std::filesystem::exists(report_path)) {
    std::ifstream in(report_path);
    nlohmann::json rep;
    in >> rep;
    summary["verdict"] = rep.value("verdict", nlohmann::json::object());
    summary["integral"] = rep.value("integral", nlohmann::json::object());
  }
  const std::string p = join_path(dir, "report_summary.json");
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p);
  out << summary.dump(2) << '\n';
  return {p};
}

}  // namespace spectralflow
