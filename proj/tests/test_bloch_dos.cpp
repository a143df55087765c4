#include <cmath>
#include <cstdio>
#include <filesystem>

#include <doctest.h>

#include "spectralflow/bloch_dos.hpp"
#include "spectralflow/eigencount.hpp"
#include "spectralflow/hamiltonian.hpp"

using namespace spectralflow;

namespace {

ModelSpec gapped_1d(double c = 3.0) {
  return ModelSpec(1, {2, 1, 1}, {0.0, c}, PsiProfile::make_constant(1.0), 2.0, 0.0);
}

double free_ids_1d(double lambda) {
  if (lambda <= 0.0) return 0.0;
  if (lambda >= 4.0) return 1.0;
  return std::acos(1.0 - lambda / 2.0) / M_PI;
}

}  // namespace

TEST_CASE("free 1d Bloch matrix is the scalar dispersion") {
  const auto model = ModelSpec::free_1d();
  const auto at_pi = bloch_matrix(model, {M_PI});
  REQUIRE(at_pi.rows() == 1);
  CHECK(std::abs(at_pi(0, 0) - 4.0) < 1e-14);
  for (double k : {0.1, 0.9, 2.2}) {
    const auto m = bloch_matrix(model, {k});
    CHECK(std::abs(m(0, 0).real() - (2.0 - 2.0 * std::cos(k))) < 1e-13);
    CHECK(std::abs(m(0, 0).imag()) < 1e-15);
  }
}

TEST_CASE("period-2 Bloch eigenvalues match the closed form") {
  const double c = 3.0;
  const auto model = gapped_1d(c);
  for (double k : {0.0, 0.7, M_PI, 4.0}) {
    const auto bands = bloch_bands_at(model, {k});
    REQUIRE(bands.size() == 2);
    // cell hopping matrix has |1 + e^{ik}| coupling; eigenvalues
    // (2 + c/2) +- sqrt((c/2)^2 + |1+e^{ik}|^2)
    const double h = std::abs(std::complex<double>(1.0 + std::cos(k), std::sin(k)));
    const double mid = 2.0 + c / 2.0;
    const double rad = std::sqrt(c * c / 4.0 + h * h);
    CHECK(bands[0] == doctest::Approx(mid - rad).epsilon(1e-12));
    CHECK(bands[1] == doctest::Approx(mid + rad).epsilon(1e-12));
  }
}

TEST_CASE("Bloch band union matches a 400-site dense spectrum") {
  const auto model = gapped_1d();
  const auto bs = band_structure(model, 200);
  const auto op = assemble(LatticeDomain::ball(1, 200.25), model);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(op.matrix));
  // every finite-volume eigenvalue lies inside some Bloch band (Dirichlet
  // bracketing); band edges agree to 1e-3
  double lo0 = 1e300, hi0 = -1e300, lo1 = 1e300, hi1 = -1e300;
  for (const auto& b : bs.bands) {
    lo0 = std::min(lo0, b[0]);
    hi0 = std::max(hi0, b[0]);
    lo1 = std::min(lo1, b[1]);
    hi1 = std::max(hi1, b[1]);
  }
  const auto& ev = es.eigenvalues();
  CHECK(ev.minCoeff() >= lo0 - 1e-3);
  CHECK(ev.maxCoeff() <= hi1 + 1e-3);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const bool in_band0 = ev[i] >= lo0 - 1e-3 && ev[i] <= hi0 + 1e-3;
    const bool in_band1 = ev[i] >= lo1 - 1e-3 && ev[i] <= hi1 + 1e-3;
    CHECK((in_band0 || in_band1));
  }
}

TEST_CASE("band range obeys the Gershgorin envelope") {
  const auto model = gapped_1d(2.0);
  const auto bs = band_structure(model, 64);
  for (const auto& b : bs.bands)
    for (double e : b) {
      CHECK(e >= -model.f_sup_norm() - 1e-12);
      CHECK(e <= 4.0 * model.dim() + model.f_sup_norm() + 1e-12);
    }
}

TEST_CASE("free model has no bounded gap") {
  CHECK(!find_gap(ModelSpec::free_1d()).has_value());
}

TEST_CASE("period-2 gap endpoints") {
  const auto gap = find_gap(gapped_1d(3.0));
  REQUIRE(gap.has_value());
  // frozen from the closed form: bands [0,2] and [5,7] when c=3
  CHECK(gap->lower == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(gap->upper == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("gap endpoints stable under k-grid refinement") {
  const auto coarse = find_gap(gapped_1d(), 64);
  const auto fine = find_gap(gapped_1d(), 256);
  REQUIRE(coarse.has_value());
  REQUIRE(fine.has_value());
  CHECK(std::abs(coarse->lower - fine->lower) < 1e-6);
  CHECK(std::abs(coarse->upper - fine->upper) < 1e-6);
}

TEST_CASE("d=2 staggered model gap") {
  const ModelSpec model(2, {2, 2, 1}, {0.0, 3.0, 3.0, 0.0},
                        PsiProfile::make_constant(1.0), 2.0, 0.0);
  const auto gap = find_gap(model);
  REQUIRE(gap.has_value());
  // closed form: bands 4 + c/2 -+ sqrt(c^2/4 + |h(k)|^2), touching 4 and 4+c
  CHECK(gap->lower == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(gap->upper == doctest::Approx(7.0).epsilon(1e-6));
}

TEST_CASE("free 1d IDS matches the arccos closed form") {
  const auto model = ModelSpec::free_1d();
  CHECK(ids_bloch(model, 2.0) == doctest::Approx(0.5).epsilon(1e-8));
  for (double lambda : {0.2, 0.9, 1.7, 3.1, 3.9})
    CHECK(std::abs(ids_bloch(model, lambda) - free_ids_1d(lambda)) < 1e-4);
  CHECK(ids_bloch(model, -1.0) == 0.0);
  CHECK(ids_bloch(model, 5.0) == 1.0);
}

TEST_CASE("IDS is flat across the gap at the filling fraction") {
  const auto model = gapped_1d();
  const double in_gap = ids_bloch(model, 3.5);
  CHECK(in_gap == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(ids_bloch(model, 2.5) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("finite-volume IDS converges to the closed form") {
  const auto model = ModelSpec::free_1d();
  const auto fv =
      ids_finite_volume(model, 2.0, {50.0, 100.0, 200.0}, LatticeDomain::ball(1, 1.0));
  REQUIRE(fv.ratios.size() == 3);
  for (double r : fv.ratios) CHECK(std::abs(r - 0.5) < 0.02);
  CHECK(fv.extrapolated == fv.ratios.back());
}

TEST_CASE("finite-volume IDS vanishes below the spectrum") {
  const auto fv = ids_finite_volume(ModelSpec::free_1d(), -0.5, {25.0, 50.0},
                                    LatticeDomain::ball(1, 1.0));
  for (double r : fv.ratios) CHECK(r == 0.0);
}

TEST_CASE("routes agree on a lambda grid for the period-2 model") {
  const auto model = gapped_1d();
  const auto grid = uniform_grid(-0.5, 7.5, 20);
  const double beta_last = 100.0;
  for (double lambda : grid) {
    const auto fv =
        ids_finite_volume(model, lambda, {50.0, beta_last}, LatticeDomain::ball(1, 1.0));
    const double bloch = ids_bloch(model, lambda);
    CHECK(std::abs(fv.extrapolated - bloch) <= std::max(0.02, 2.0 / beta_last));
  }
}

TEST_CASE("dos table interpolation, monotonicity, and csv round trip") {
  const auto model = gapped_1d();
  const auto table = build_dos_table_bloch(model, uniform_grid(-1.0, 8.0, 101));
  REQUIRE(table.rho_values.size() == 101);
  CHECK(table.provenance == "bloch");
  CHECK(table.model_hash == model.hash());
  for (std::size_t i = 0; i + 1 < table.rho_values.size(); ++i)
    CHECK(table.rho_values[i] <= table.rho_values[i + 1]);
  CHECK(table.rho_values.front() == 0.0);
  CHECK(table.rho_values.back() == 1.0);
  CHECK(table.rho(-5.0) == 0.0);
  CHECK(table.rho(50.0) == 1.0);
  // interpolation hits grid values exactly
  CHECK(table.rho(table.lambda_grid[40]) ==
        doctest::Approx(table.rho_values[40]).epsilon(1e-15));

  const auto path = (std::filesystem::temp_directory_path() / "dos_rt.csv").string();
  table.write_csv(path);
  const auto back = DosTable::read_csv(path);
  CHECK(back.lambda_grid == table.lambda_grid);
  CHECK(back.rho_values == table.rho_values);
  CHECK(back.provenance == table.provenance);
  CHECK(back.model_hash == table.model_hash);
  std::remove(path.c_str());
}

TEST_CASE("dos cache reuse is byte identical") {
  const auto cache_dir = std::filesystem::temp_directory_path() / "sf_cache_test";
  std::filesystem::remove_all(cache_dir);
  std::filesystem::create_directories(cache_dir);
  setenv("SPECTRAL_FLOW_CACHE", cache_dir.c_str(), 1);
  const auto model = gapped_1d();
  const auto grid = uniform_grid(-1.0, 8.0, 41);
  const auto first = build_dos_table_bloch(model, grid);
  // exactly one cache file appears
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(cache_dir)) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
  const auto second = build_dos_table_bloch(model, grid);
  CHECK(second.lambda_grid == first.lambda_grid);
  CHECK(second.rho_values == first.rho_values);
  unsetenv("SPECTRAL_FLOW_CACHE");
  std::filesystem::remove_all(cache_dir);
}

TEST_CASE("d=2 free IDS sanity: half filling at the band center") {
  const ModelSpec model(2, {1, 1, 1}, {0.0}, PsiProfile::make_constant(1.0), 2.0, 0.0);
  CHECK(std::abs(ids_bloch(model, 4.0 + 1e-9) - 0.5) < 5e-3);
  CHECK(ids_bloch(model, -0.5) == 0.0);
  CHECK(ids_bloch(model, 9.0) == 1.0);
}
