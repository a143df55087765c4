#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "spectralflow/asymptotics.hpp"
#include "spectralflow/birman_schwinger.hpp"
#include "spectralflow/eigencount.hpp"

using namespace spectralflow;

namespace {

ModelSpec gapped_1d(double c = 3.0, double psi = 1.0, double p = 2.0) {
  return ModelSpec(1, {2, 1, 1}, {0.0, c}, PsiProfile::make_constant(psi), p, 0.0);
}

// the (2, 5) gap of the c=3 cell, frozen from the Bloch closed form
const GapInterval kGap{2.0, 5.0};

DosTable step_dos(double lambda_plus, double height, double lo, double hi, int pts) {
  DosTable t;
  t.lambda_grid = uniform_grid(lo, hi, pts);
  for (double l : t.lambda_grid)
    t.rho_values.push_back(l < lambda_plus ? 0.0 : height);
  t.provenance = "synthetic";
  return t;
}

}  // namespace

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == 2.0);
  CHECK(unit_ball_volume(2) == doctest::Approx(M_PI).epsilon(1e-15));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-15));
}

TEST_CASE("zero impurity kills the integral") {
  const auto model = gapped_1d(3.0, 0.0);
  const auto dos = build_dos_table_bloch(gapped_1d(), uniform_grid(-1.0, 8.0, 201));
  const auto I = theoretical_integral(dos, model, 3.5, kGap);
  CHECK(I.value == 0.0);
}

TEST_CASE("one-step density gives the closed-form two-ray integral") {
  // rho jumps by h at lambda_+; integrand is h exactly while
  // lambda + c r^{-p} >= lambda_+, i.e. r <= (c/(lambda_+ - lambda))^{1/p}
  const double h = 0.37, c = 2.0, p = 2.0, lambda = 3.5;
  const auto model = gapped_1d(3.0, c, p);
  const auto dos = step_dos(kGap.upper, h, -1.0, 40.0, 4001);
  const auto I = theoretical_integral(dos, model, lambda, kGap);
  const double ray = std::pow(c / (kGap.upper - lambda), 1.0 / p);
  CHECK(I.value == doctest::Approx(2.0 * h * ray).epsilon(2e-3));
}

TEST_CASE("integral is stable under resolution doubling") {
  const auto model = gapped_1d();
  const auto dos = build_dos_table_bloch(model, uniform_grid(-1.0, 8.0, 801));
  const auto base = theoretical_integral(dos, model, 3.5, kGap);
  const auto fine = theoretical_integral(dos, model, 3.5, kGap, 4);
  CHECK(base.value > 0.0);
  CHECK(std::abs(base.value - fine.value) <=
        std::max({base.quadrature_error, fine.quadrature_error, 1e-6}) * 20.0);
}

TEST_CASE("flow count basics") {
  const auto model = gapped_1d();
  const auto domain = LatticeDomain::ball(1, 40.5);
  CHECK(flow_count(model, 3.5, 0.0, domain, kGap.width()).count == 0);
  // increasing alpha eventually drives an eigenvalue across mid-gap
  Eigen::Index prev = 0;
  bool crossed = false;
  for (double alpha : {1.0, 4.0, 16.0, 64.0, 256.0}) {
    const auto fc = flow_count(model, 3.5, alpha, domain, kGap.width());
    CHECK(fc.count >= prev);
    prev = fc.count;
    if (fc.count >= 1) crossed = true;
  }
  CHECK(crossed);
}

TEST_CASE("flow count agrees with the BS verification flow side") {
  const auto model = gapped_1d();
  const auto domain = LatticeDomain::ball(1, 25.5);
  const std::vector<double> alphas = {3.0, 17.0, 55.0, 90.0};
  const auto rows = verify_bs_principle(model, domain, 3.5, alphas);
  REQUIRE(rows.size() == alphas.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].flagged) continue;
    const auto fc = flow_count(model, 3.5, alphas[i], domain, kGap.width());
    CHECK(fc.count == rows[i].flow_count);
  }
}

TEST_CASE("eps2 admissibility bound is enforced") {
  const auto model = gapped_1d();
  const double bound = eps2_admissible_bound(model, 3.5, kGap);
  CHECK(bound > 0.0);
  const RegionSplit bad(bound * 0.1, bound * 0.5, 100.0, model.p());
  CHECK_THROWS_AS(region_split_counts(model, 3.5, 100.0, bad, kGap),
                  std::invalid_argument);
}

TEST_CASE("splitting inequality and N1 envelope at three couplings") {
  const auto model = gapped_1d();
  const double bound = eps2_admissible_bound(model, 3.5, kGap);
  const double eps2 = 1.25 * bound, eps1 = eps2 / 4.0;
  for (double alpha : {100.0, 1000.0, 10000.0}) {
    const RegionSplit split(eps1, eps2, alpha, model.p());
    const auto rc = region_split_counts(model, 3.5, alpha, split, kGap);
    const auto domain =
        LatticeDomain::ball(1, 1.5 * split.outer_radius());
    const auto fc = flow_count(model, 3.5, alpha, domain, kGap.width());
    CHECK(std::abs(double(fc.count - rc.N1 - rc.N2)) <= 2.0 * double(rc.links_r));
    CHECK(rc.links_r <= 8);
    CHECK(rc.N3_check == 0);
    const double envelope =
        2.0 * unit_ball_volume(1) * std::pow(eps1 * std::pow(alpha, 0.5) + 1.0, 1.0);
    CHECK(double(rc.N1) <= envelope);
  }
}

TEST_CASE("riemann sandwich brackets and refines") {
  const auto model = gapped_1d();
  const auto dos = build_dos_table_bloch(model, uniform_grid(-1.0, 8.0, 801));
  const double bound = eps2_admissible_bound(model, 3.5, kGap);
  const double eps2 = 1.25 * bound, eps1 = eps2 / 4.0;
  const double alpha = 10000.0;
  const RegionSplit split(eps1, eps2, alpha, model.p());

  double prev_gap = -1.0;
  for (double delta : {0.5, 0.25, 0.125}) {
    const auto rs = riemann_sandwich(model, 3.5, alpha, split, delta, dos, kGap);
    CHECK(rs.lower_sum <= rs.upper_sum);
    CHECK(rs.lower_sum - 0.05 <= rs.N2_scaled);
    CHECK(rs.N2_scaled <= rs.upper_sum + 0.05);
    // both sums bracket the annulus-restricted integral within the gap
    const auto I = theoretical_integral_annulus(dos, model, 3.5, kGap, eps1, eps2);
    CHECK(rs.lower_sum <= I.value + 1e-9);
    CHECK(I.value <= rs.upper_sum + 1e-9);
    if (prev_gap >= 0.0) {
      const double g = rs.upper_sum - rs.lower_sum;
      CHECK(g <= prev_gap + 1e-12);  // refinement tightens
    }
    prev_gap = rs.upper_sum - rs.lower_sum;
  }
}

TEST_CASE("degenerate single-shell partition still orders the sums") {
  const auto model = gapped_1d();
  const auto dos = build_dos_table_bloch(model, uniform_grid(-1.0, 8.0, 401));
  const double bound = eps2_admissible_bound(model, 3.5, kGap);
  const RegionSplit split(bound, 1.25 * bound, 400.0, model.p());
  const double width = (1.25 * bound - bound) * std::pow(400.0, 0.5);
  const auto rs = riemann_sandwich(model, 3.5, 400.0, split, width * 3.0, dos, kGap);
  CHECK(rs.lower_sum <= rs.upper_sum);
}

TEST_CASE("zero-impurity study reports zero counts and zero integral") {
  const auto model = gapped_1d(3.0, 0.0);
  const auto dos = build_dos_table_bloch(model, uniform_grid(-1.0, 8.0, 201));
  const RegionSplit split(0.25, 1.0, 1.0, model.p());
  const auto report = convergence_study(model, 3.5, {10.0, 100.0}, split, dos, kGap);
  CHECK(report.integral_value == 0.0);
  for (const auto& rec : report.records) {
    CHECK(rec.N == 0);
    CHECK(rec.N1 == 0);
    CHECK(rec.N2 == 0);
  }
}

TEST_CASE("doubling the truncation rule changes no flow count") {
  const auto model = gapped_1d();
  const auto dos = build_dos_table_bloch(model, uniform_grid(-1.0, 8.0, 401));
  const double bound = eps2_admissible_bound(model, 3.5, kGap);
  const RegionSplit split(1.25 * bound / 4.0, 1.25 * bound, 1.0, model.p());
  const std::vector<double> alphas = {100.0, 400.0};
  const auto a = convergence_study(model, 3.5, alphas, split, dos, kGap, 1.5);
  const auto b = convergence_study(model, 3.5, alphas, split, dos, kGap, 3.0);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i)
    CHECK(a.records[i].N == b.records[i].N);
}

TEST_CASE("report serialization carries the full record set") {
  const auto model = gapped_1d();
  const auto dos = build_dos_table_bloch(model, uniform_grid(-1.0, 8.0, 401));
  const double bound = eps2_admissible_bound(model, 3.5, kGap);
  const RegionSplit split(1.25 * bound / 4.0, 1.25 * bound, 1.0, model.p());
  const auto report = convergence_study(model, 3.5, {50.0, 200.0}, split, dos, kGap);
  const auto j = report.to_json();
  CHECK(j.contains("records"));
  CHECK(j["records"].size() == 2);
  CHECK(j["verdict"].contains("trend_toward_1"));
  CHECK(j["verdict"].contains("final_deviation"));
  CHECK(j["integral"].contains("value"));

  const auto dir = std::filesystem::temp_directory_path();
  const auto csv_path = (dir / "report_test.csv").string();
  const auto svg_path = (dir / "report_test.svg").string();
  report.write_csv(csv_path);
  report.write_svg(svg_path);
  std::ifstream csv(csv_path);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "alpha,N,N1,N2,ratio,links_r,lambda_shift");
  int data_lines = 0;
  for (std::string line; std::getline(csv, line);) ++data_lines;
  CHECK(data_lines == 2);
  csv.close();
  std::ifstream svg(svg_path);
  std::string svg_text((std::istreambuf_iterator<char>(svg)),
                       std::istreambuf_iterator<char>());
  CHECK(svg_text.find("<svg") != std::string::npos);
  CHECK(svg_text.find("</svg>") != std::string::npos);
  CHECK(svg_text.find("href") == std::string::npos);  // self-contained
  svg.close();
  std::filesystem::remove(csv_path);
  std::filesystem::remove(svg_path);
}
