#include <doctest.h>

#include <cmath>
#include <random>

#include "fdamimo/estimators.hpp"

using namespace fdamimo;

namespace {

GridSpec coarse_grid(const RadarConfig& cfg) {
  return GridSpec::uniform(-90, 90, 0.5, 0.0, cfg.r_max() / 300, 300);
}

// A target sitting exactly on grid cell (i_theta, i_r).
Target on_grid(const GridSpec& g, int i_theta, int i_r, Complex alpha = {1.0, 0.0}) {
  return Target{g.theta[i_theta], g.r[i_r], alpha};
}

// Noiseless stack with independent random amplitudes per pulse and target.
CMatrix fluctuating_stack(const RadarConfig& cfg, const std::vector<Target>& targets, int pulses, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMatrix x = CMatrix::Zero(cfg.mn(), pulses);
  for (const auto& t : targets) {
    const CVector a = steering_vectors(cfg, t.theta, t.r).a_joint;
    for (int l = 0; l < pulses; ++l) x.col(l) += Complex(g(rng), g(rng)) * a;
  }
  return x;
}

CMatrix white_stack(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  CMatrix x(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) x(i, j) = Complex(g(rng), g(rng));
  return x;
}

}  // namespace

TEST_CASE("sample covariance is X Xᴴ / L") {
  const CMatrix x = white_stack(4, 7, 1);
  const CMatrix r = sample_covariance(x);
  Complex oracle{0.0, 0.0};
  for (int l = 0; l < 7; ++l) oracle += x(1, l) * std::conj(x(2, l));
  CHECK(std::abs(r(1, 2) - oracle / 7.0) < 1e-14);
  CHECK((r - r.adjoint()).norm() < 1e-14);
}

TEST_CASE("noise subspace is orthogonal to the signal steering vectors") {
  const RadarConfig cfg;
  const Target a{deg2rad(10.0), 4000.0, {1, 0}};
  const Target b{deg2rad(-25.0), 9000.0, {1, 0}};
  const CMatrix x = fluctuating_stack(cfg, {a, b}, 50, 4);
  RVector eig;
  const CMatrix un = noise_subspace(sample_covariance(x), 2, &eig);
  CHECK(un.cols() == cfg.mn() - 2);
  CHECK((un.adjoint() * un - CMatrix::Identity(un.cols(), un.cols())).norm() < 1e-10);
  for (const auto& t : {a, b}) CHECK((un.adjoint() * steering_vectors(cfg, t.theta, t.r).a_joint).norm() < 1e-6);
  CHECK(eig.size() == cfg.mn());
  for (int i = 1; i < eig.size(); ++i) CHECK(eig(i - 1) >= eig(i));
  CHECK_THROWS_AS(noise_subspace(sample_covariance(x), cfg.mn(), nullptr), DomainError);
}

TEST_CASE("noiseless grid-aligned target is recovered exactly") {
  const RadarConfig cfg;
  const auto grid = coarse_grid(cfg);
  const Target t = on_grid(grid, 240, 120, {0.3, -0.4});   // 30°, 0.4 r_max
  const std::vector<Target> ts{t};
  const CMatrix x = draw_stack(cfg, ts, OffsetModel{}, kNoWhiteNoise, 8);

  const auto m2 = music_2d(cfg, x, grid, 1);
  REQUIRE(m2.estimates.size() == 1);
  CHECK(m2.spectrum.peak.i_theta == 240);
  CHECK(m2.spectrum.peak.i_r == 120);
  CHECK(m2.estimates[0].theta == t.theta);
  CHECK(m2.estimates[0].r == t.r);
  CHECK(m2.estimates[0].method == "music2d");

  const auto rows = music_rows(cfg, x, grid.theta, 1);
  REQUIRE(rows.estimates.size() == 1);
  CHECK(rows.estimates[0].theta == t.theta);
  CHECK(std::isnan(rows.estimates[0].r));

  const auto c4 = music_cumulant(cfg, build_c4(x), grid, 1);
  REQUIRE(c4.estimates.size() == 1);
  CHECK(c4.estimates[0].theta == t.theta);
  CHECK(c4.estimates[0].r == t.r);

  const auto o = omp(cfg, x, grid, 1);
  REQUIRE(o.estimates.size() == 1);
  CHECK(o.estimates[0].theta == t.theta);
  CHECK(o.estimates[0].r == t.r);
  CHECK(o.relative_residual < 1e-10);
  const Complex beta = t.beta(cfg);
  CHECK(std::abs(o.estimates[0].amplitude - beta) < 1e-10 * std::abs(beta));
}

TEST_CASE("two fluctuating targets are separated") {
  const RadarConfig cfg;
  const auto grid = coarse_grid(cfg);
  const Target a = on_grid(grid, 200, 60);
  const Target b = on_grid(grid, 120, 210);
  const CMatrix x = fluctuating_stack(cfg, {a, b}, 40, 9);
  auto found = [&](const std::vector<Estimate>& est, const Target& t) {
    for (const auto& e : est)
      if (e.theta == t.theta && (std::isnan(e.r) || e.r == t.r)) return true;
    return false;
  };
  const auto m2 = music_2d(cfg, x, grid, 2);
  CHECK(found(m2.estimates, a));
  CHECK(found(m2.estimates, b));
  const auto rows = music_rows(cfg, x, grid.theta, 2);
  CHECK(found(rows.estimates, a));
  CHECK(found(rows.estimates, b));
  // Greedy selection may land one cell off along the range-angle ridge.
  const auto o = omp(cfg, x, grid, 2);
  auto near = [&](const Target& t) {
    for (const auto& e : o.estimates)
      if (std::abs(e.theta - t.theta) <= deg2rad(0.5) + 1e-12 && std::abs(e.r - t.r) <= grid.r[1] + 1e-9) return true;
    return false;
  };
  CHECK(near(a));
  CHECK(near(b));
  CHECK(o.relative_residual < 0.1);
  CHECK(o.coefficients.rows() == 2);
  CHECK(o.coefficients.cols() == 40);
}

TEST_CASE("row MUSIC needs fewer targets than receive elements") {
  const RadarConfig cfg;
  const CMatrix x = white_stack(cfg.mn(), 10, 2);
  const std::vector<double> axis{0.0, 0.1};
  CHECK_THROWS_AS(music_rows(cfg, x, axis, cfg.n_rx), DomainError);
}

TEST_CASE("OMP residual history is non-increasing and starts at the data norm") {
  const RadarConfig cfg;
  const auto grid = coarse_grid(cfg);
  const std::vector<Target> ts{Target{deg2rad(12.3), 5555.0, {1, 0}}, Target{deg2rad(-40.1), 10100.0, {0.5, 0}}};
  const CMatrix x = draw_stack(cfg, ts, OffsetModel{300.0, 300.0, 3}, 10.0, 30);
  const auto o = omp(cfg, x, grid, 3);
  REQUIRE(o.residual_history.size() == 4);
  CHECK(o.residual_history[0] == doctest::Approx(x.norm()));
  for (std::size_t k = 1; k < o.residual_history.size(); ++k)
    CHECK(o.residual_history[k] <= o.residual_history[k - 1] * (1 + 1e-12));
  CHECK(o.relative_residual == doctest::Approx(o.residual_history.back() / x.norm()));
}

TEST_CASE("estimates are invariant to scaling the data") {
  const RadarConfig cfg;
  const auto grid = coarse_grid(cfg);
  const std::vector<Target> ts{Target{deg2rad(33.3), 7000.0, {1, 0}}};
  const CMatrix x = draw_stack(cfg, ts, OffsetModel{200.0, 200.0, 1}, 15.0, 20);
  const CMatrix y = Complex(7.0, -2.0) * x;
  const auto a = music_2d(cfg, x, grid, 1).estimates[0];
  const auto b = music_2d(cfg, y, grid, 1).estimates[0];
  CHECK(a.theta == b.theta);
  CHECK(a.r == b.r);
  const auto oa = omp(cfg, x, grid, 1).estimates[0];
  const auto ob = omp(cfg, y, grid, 1).estimates[0];
  CHECK(oa.theta == ob.theta);
  CHECK(oa.r == ob.r);
  CHECK(std::abs(ob.amplitude - Complex(7.0, -2.0) * oa.amplitude) < 1e-9 * std::abs(ob.amplitude));
}

TEST_CASE("cumulant of a noiseless single target is rank one") {
  const RadarConfig cfg;
  const std::vector<Target> ts{Target{deg2rad(30.0), 6000.0, {1, 0}}};
  const CMatrix x = draw_stack(cfg, ts, OffsetModel{}, kNoWhiteNoise, 5);
  const auto c = build_c4(x);
  CHECK(c.mn == cfg.mn());
  CHECK(c.c4.rows() == cfg.mn() * cfg.mn());
  Eigen::JacobiSVD<CMatrix> svd(c.c4);
  const RVector s = svd.singularValues();
  CHECK(s(1) / s(0) < 1e-8);
  // A deterministic signal has cumulant -2 |x|⁴ structure: entry x_i x_j* x_p* x_q times -2.
  const CVector v = x.col(0);
  const int K = cfg.mn();
  for (int i : {0, 5}) {
    for (int p : {3, 11}) {
      const int j = 2;
      const int q = 7;
      const Complex oracle = -2.0 * v(i) * std::conj(v(j)) * std::conj(v(p)) * v(q);
      CHECK(std::abs(c.c4(i * K + j, p * K + q) - oracle) < 1e-10 * std::abs(oracle) + 1e-30);
    }
  }
}

TEST_CASE("cumulant of white Gaussian noise shrinks with more pulses") {
  const int K = 4;
  const double small = build_c4(white_stack(K, 1000, 5)).c4.cwiseAbs().maxCoeff();
  const double large = build_c4(white_stack(K, 4000, 6)).c4.cwiseAbs().maxCoeff();
  const double ratio = large / small;
  CHECK(ratio > 0.25);
  CHECK(ratio < 0.8);
  CHECK(large < 0.1);
  CHECK_THROWS_AS(build_c4(white_stack(K, 1, 7)), DomainError);
}

TEST_CASE("cumulant MUSIC suppresses Gaussian noise") {
  const RadarConfig cfg;
  const auto grid = coarse_grid(cfg);
  const std::vector<Target> ts{on_grid(grid, 260, 90)};
  std::vector<Target> sources = ts;
  CMatrix x = fluctuating_stack(cfg, sources, 2000, 12);
  // Replace Gaussian amplitudes by unit-modulus ones so the source has a non-zero cumulant.
  const CVector a = steering_vectors(cfg, ts[0].theta, ts[0].r).a_joint;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int l = 0; l < x.cols(); ++l) x.col(l) = std::polar(1.0, u(rng)) * a;
  x += 0.3 * white_stack(cfg.mn(), 2000, 13);
  const auto res = music_cumulant(cfg, build_c4(x), grid, 1);
  CHECK(std::abs(res.estimates[0].theta - ts[0].theta) <= deg2rad(0.5) + 1e-12);
  CHECK(std::abs(res.estimates[0].r - ts[0].r) <= grid.r[1] + 1e-9);
}
