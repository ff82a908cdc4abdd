#include "fdamimo/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace fdamimo {
namespace {

void check_stack(const RadarConfig& cfg, const CMatrix& stack) {
  if (stack.rows() != cfg.mn()) throw DomainError("stack must have MN rows");
  if (stack.cols() < 1) throw DomainError("stack must hold at least one pulse");
  if (!stack.allFinite()) throw NumericError("stack contains non-finite values");
}

void check_covariance(const CMatrix& r) {
  if (!r.allFinite()) throw NumericError("covariance contains non-finite values");
  if (!(r.trace().real() > 0.0)) throw NumericError("covariance is degenerate (zero trace)");
}

double music_value(double den) {
  return 1.0 / std::max(den, std::numeric_limits<double>::min());
}

// Joint least-squares amplitudes of the located atoms, averaged over pulses.
void attach_amplitudes(const RadarConfig& cfg, const CMatrix& stack, std::vector<Estimate>& est) {
  if (est.empty() || stack.size() == 0) return;
  CMatrix a(cfg.mn(), static_cast<Eigen::Index>(est.size()));
  for (std::size_t s = 0; s < est.size(); ++s)
    a.col(static_cast<Eigen::Index>(s)) = steering_vectors(cfg, est[s].theta, est[s].r).a_joint;
  Eigen::ColPivHouseholderQR<CMatrix> qr(a);
  if (qr.rank() < a.cols()) return;
  const CMatrix coef = qr.solve(stack);
  for (std::size_t s = 0; s < est.size(); ++s) est[s].amplitude = coef.row(static_cast<Eigen::Index>(s)).mean();
}

std::vector<Estimate> estimates_from_peaks(const std::vector<GridPeak>& peaks, const std::string& method) {
  std::vector<Estimate> est;
  for (const auto& p : peaks) {
    Estimate e;
    e.theta = p.theta;
    e.r = p.r;
    e.method = method;
    e.diagnostics["spectrum_peak"] = p.value;
    e.diagnostics["theta_index"] = p.i_theta;
    e.diagnostics["r_index"] = p.i_r;
    est.push_back(std::move(e));
  }
  return est;
}

Spectrum2D make_spectrum(RMatrix values, const GridSpec& grid) {
  Spectrum2D s;
  s.values = std::move(values);
  s.peak = global_peak(s.values, grid);
  return s;
}

}  // namespace

CMatrix sample_covariance(const CMatrix& stack) {
  if (stack.cols() < 1) throw DomainError("stack must hold at least one pulse");
  return stack * stack.adjoint() / static_cast<double>(stack.cols());
}

CMatrix noise_subspace(const CMatrix& r, int n_signal, RVector* eigenvalues) {
  if (n_signal < 0 || n_signal >= r.rows())
    throw DomainError("number of sources must be smaller than the covariance dimension");
  check_covariance(r);
  const CMatrix herm = 0.5 * (r + r.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  if (es.info() != Eigen::Success) throw NumericError("Hermitian eigendecomposition failed");
  const Eigen::Index n = r.rows();
  if (eigenvalues) *eigenvalues = es.eigenvalues().reverse();
  // Ascending order: the first n - S columns span the noise subspace.
  return es.eigenvectors().leftCols(n - n_signal);
}

SubspaceResult music_2d_covariance(const RadarConfig& cfg, const CMatrix& cov, const GridSpec& grid,
                                   int n_targets, const std::string& method) {
  if (cov.rows() != cfg.mn() || cov.cols() != cfg.mn()) throw DomainError("covariance must be MN x MN");
  if (n_targets < 1) throw DomainError("need at least one target");
  SubspaceResult res;
  const CMatrix un = noise_subspace(cov, n_targets, &res.eigenvalues);
  const CMatrix q = un * un.adjoint();
  QuadraticFormGrid engine(cfg, grid);
  RMatrix den = engine.hermitian_form(q);
  res.spectrum = make_spectrum(den.unaryExpr([](double d) { return music_value(d); }), grid);
  res.estimates = estimates_from_peaks(top_peaks(res.spectrum.values, grid, n_targets), method);
  return res;
}

SubspaceResult music_2d(const RadarConfig& cfg, const CMatrix& stack, const GridSpec& grid, int n_targets) {
  check_stack(cfg, stack);
  SubspaceResult res = music_2d_covariance(cfg, sample_covariance(stack), grid, n_targets, "music2d");
  attach_amplitudes(cfg, stack, res.estimates);
  return res;
}

RowMusicResult music_rows(const RadarConfig& cfg, const CMatrix& stack, const std::vector<double>& theta_axis,
                          int n_targets) {
  check_stack(cfg, stack);
  const int M = cfg.n_rx;
  const int N = cfg.n_tx;
  if (n_targets < 1 || n_targets >= M) throw DomainError("row MUSIC needs 1 <= S < M");
  if (theta_axis.size() < 2) throw DomainError("theta axis needs at least 2 points");

  const Eigen::Index L = stack.cols();
  CMatrix rows(M, N * L);
  for (Eigen::Index l = 0; l < L; ++l)
    for (int n = 0; n < N; ++n) rows.col(l * N + n) = stack.col(l).segment(n * M, M);

  RowMusicResult res;
  const CMatrix un = noise_subspace(sample_covariance(rows), n_targets, &res.eigenvalues);
  const CMatrix q = un * un.adjoint();
  res.spectrum.values.resize(static_cast<Eigen::Index>(theta_axis.size()));
  for (std::size_t i = 0; i < theta_axis.size(); ++i) {
    const CVector a = steering_vectors(cfg, theta_axis[i], 0.0).a_rx;
    res.spectrum.values(static_cast<Eigen::Index>(i)) = music_value(a.dot(q * a).real());
  }
  Eigen::Index best = 0;
  res.spectrum.peak_value = res.spectrum.values.maxCoeff(&best);
  res.spectrum.peak_index = static_cast<int>(best);
  res.spectrum.peak_theta = theta_axis[best];

  for (int idx : top_peaks_1d(res.spectrum.values, n_targets)) {
    Estimate e;
    e.theta = theta_axis[idx];
    e.r = std::numeric_limits<double>::quiet_NaN();
    e.method = "music_rows";
    e.diagnostics["spectrum_peak"] = res.spectrum.values(idx);
    e.diagnostics["theta_index"] = idx;
    res.estimates.push_back(std::move(e));
  }
  return res;
}

CumulantMatrix build_c4(const CMatrix& stack) {
  const Eigen::Index L = stack.cols();
  if (L < 2) throw DomainError("cumulant estimation needs at least 2 pulses");
  if (!stack.allFinite()) throw NumericError("stack contains non-finite values");
  const Eigen::Index K = stack.rows();
  const double inv_l = 1.0 / static_cast<double>(L);

  // z_l = x_l ⊗ x_l*, so (Z Zᴴ / L)[(i,j),(p,q)] = E{x_i x_j* x_p* x_q}.
  CMatrix z(K * K, L);
  for (Eigen::Index l = 0; l < L; ++l)
    for (Eigen::Index i = 0; i < K; ++i)
      for (Eigen::Index j = 0; j < K; ++j) z(i * K + j, l) = stack(i, l) * std::conj(stack(j, l));

  const CMatrix r2 = stack * stack.adjoint() * inv_l;    // E{x_i x_j*}
  const CMatrix p2 = stack * stack.transpose() * inv_l;  // E{x_i x_j}

  CumulantMatrix out;
  out.mn = static_cast<int>(K);
  out.c4 = z * z.adjoint() * inv_l;
  for (Eigen::Index i = 0; i < K; ++i)
    for (Eigen::Index j = 0; j < K; ++j)
      for (Eigen::Index p = 0; p < K; ++p)
        for (Eigen::Index q = 0; q < K; ++q)
          out.c4(i * K + j, p * K + q) -=
              r2(i, j) * r2(q, p) + r2(i, p) * r2(q, j) + p2(i, q) * std::conj(p2(j, p));

  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (out.c4 + out.c4.adjoint()), Eigen::EigenvaluesOnly);
  const RVector& ev = es.eigenvalues();
  const double dominant = std::abs(ev(0)) > std::abs(ev(ev.size() - 1)) ? ev(0) : ev(ev.size() - 1);
  out.h = Complex{dominant / static_cast<double>(K * K), 0.0};
  return out;
}

SubspaceResult music_cumulant(const RadarConfig& cfg, const CumulantMatrix& c4, const GridSpec& grid,
                              int n_targets) {
  const int K = cfg.mn();
  if (c4.c4.rows() != K * K) throw DomainError("cumulant matrix must be (MN)^2 x (MN)^2");
  if (n_targets < 1 || n_targets >= K * K) throw DomainError("number of sources must be smaller than (MN)^2");
  if (!c4.c4.allFinite()) throw NumericError("cumulant matrix contains non-finite values");

  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (c4.c4 + c4.c4.adjoint()));
  if (es.info() != Eigen::Success) throw NumericError("Hermitian eigendecomposition failed");
  const RVector& ev = es.eigenvalues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(ev.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(ev(a)) > std::abs(ev(b)); });
  if (std::abs(ev(order.front())) == 0.0) throw NumericError("cumulant matrix is zero");

  SubspaceResult res;
  res.eigenvalues.resize(ev.size());
  for (std::size_t k = 0; k < order.size(); ++k) res.eigenvalues(static_cast<Eigen::Index>(k)) = ev(order[k]);

  // a_cᴴ u_s with a_c = a ⊗ a* equals aᴴ G_s a, G_s[i][j] = u_s[i MN + j].
  std::vector<CMatrix> g;
  for (int s = 0; s < n_targets; ++s) {
    const CVector u = es.eigenvectors().col(order[s]);
    g.push_back(Eigen::Map<const CMatrix>(u.data(), K, K).transpose());
  }

  QuadraticFormGrid engine(cfg, grid);
  const int nt = static_cast<int>(grid.n_theta());
  const int nr = static_cast<int>(grid.n_r());
  const double norm2 = static_cast<double>(K) * K;
  RMatrix values(nt, nr);
  std::vector<std::vector<Complex>> lags(g.size());
  for (int i = 0; i < nt; ++i) {
    for (std::size_t s = 0; s < g.size(); ++s) lags[s] = engine.lag_coefficients(g[s], i);
    for (int j = 0; j < nr; ++j) {
      double proj = 0.0;
      for (const auto& h : lags) proj += std::norm(engine.evaluate(h, j));
      values(i, j) = music_value(norm2 - proj);
    }
  }
  res.spectrum = make_spectrum(std::move(values), grid);
  res.estimates = estimates_from_peaks(top_peaks(res.spectrum.values, grid, n_targets), "music_c4");
  return res;
}

OmpResult omp(const RadarConfig& cfg, const CMatrix& stack, const GridSpec& grid, int n_targets) {
  check_stack(cfg, stack);
  if (n_targets < 1 || n_targets > cfg.mn()) throw DomainError("OMP needs 1 <= S <= MN");
  const double inv_norm = 1.0 / std::sqrt(static_cast<double>(cfg.mn()));
  QuadraticFormGrid engine(cfg, grid);

  OmpResult res;
  CMatrix residual = stack;
  const double x_norm = stack.norm();
  res.residual_history.push_back(x_norm);
  CMatrix atoms(cfg.mn(), 0);
  std::vector<GridPeak> picked;
  CMatrix coef;

  for (int s = 0; s < n_targets; ++s) {
    RMatrix corr = engine.hermitian_form(residual * residual.adjoint());
    for (const auto& p : picked) corr(p.i_theta, p.i_r) = -std::numeric_limits<double>::infinity();
    const GridPeak best = global_peak(corr, grid);
    picked.push_back(best);

    atoms.conservativeResize(Eigen::NoChange, s + 1);
    atoms.col(s) = steering_vectors(cfg, best.theta, best.r).a_joint * inv_norm;
    Eigen::ColPivHouseholderQR<CMatrix> qr(atoms);
    if (qr.rank() < atoms.cols()) {
      std::ostringstream os;
      os << "OMP selected a rank-deficient atom set at iteration " << s + 1 << " (rank " << qr.rank() << ")";
      throw NumericError(os.str());
    }
    coef = qr.solve(stack);
    residual = stack - atoms * coef;
    res.residual_history.push_back(residual.norm());
  }

  res.coefficients = coef;
  res.relative_residual = x_norm > 0.0 ? residual.norm() / x_norm : 0.0;
  for (int s = 0; s < n_targets; ++s) {
    Estimate e;
    e.theta = picked[s].theta;
    e.r = picked[s].r;
    e.amplitude = coef.row(s).mean() * inv_norm;
    e.method = "omp";
    e.diagnostics["correlation"] = picked[s].value;
    e.diagnostics["relative_residual"] = res.relative_residual;
    e.diagnostics["theta_index"] = picked[s].i_theta;
    e.diagnostics["r_index"] = picked[s].i_r;
    res.estimates.push_back(std::move(e));
  }
  return res;
}

}  // namespace fdamimo
