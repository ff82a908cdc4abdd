#include "fdamimo/anm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace fdamimo {
namespace {

CMatrix psd_projection(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()));
  if (es.info() != Eigen::Success) throw NumericError("PSD projection: eigendecomposition failed");
  const RVector lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

// Average of W over each two-fold Toeplitz class.
CMatrix toeplitz_average(const CMatrix& w, int M, int N) {
  CMatrix sum = CMatrix::Zero(2 * N - 1, 2 * M - 1);
  RMatrix count = RMatrix::Zero(2 * N - 1, 2 * M - 1);
  for (int n = 0; n < N; ++n)
    for (int np = 0; np < N; ++np)
      for (int m = 0; m < M; ++m)
        for (int mp = 0; mp < M; ++mp) {
          sum(n - np + N - 1, m - mp + M - 1) += w(n * M + m, np * M + mp);
          count(n - np + N - 1, m - mp + M - 1) += 1.0;
        }
  return sum.cwiseQuotient(count.cast<Complex>());
}

double min_eigenvalue(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

struct Iterate {
  CMatrix t;
  CMatrix x_hat;
  CMatrix p;
};

}  // namespace

CMatrix two_fold_toeplitz(const CMatrix& t, int n_rx, int n_tx) {
  const int M = n_rx;
  const int N = n_tx;
  if (t.rows() != 2 * N - 1 || t.cols() != 2 * M - 1) throw DomainError("Toeplitz parameter has wrong shape");
  CMatrix s(M * N, M * N);
  for (int n = 0; n < N; ++n)
    for (int np = 0; np < N; ++np)
      for (int m = 0; m < M; ++m)
        for (int mp = 0; mp < M; ++mp) s(n * M + m, np * M + mp) = t(n - np + N - 1, m - mp + M - 1);
  return s;
}

DenoisedStack anm_denoise(const RadarConfig& cfg, const CMatrix& stack, double tau, const AnmOptions& opt) {
  cfg.validate();
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("tau must be positive and finite");
  if (stack.rows() != cfg.mn() || stack.cols() < 1) throw DomainError("stack must be MN x L with L >= 1");
  if (!stack.allFinite()) throw NumericError("stack contains non-finite values");
  if (!(opt.rho > 0.0) || opt.max_iter < 1) throw DomainError("invalid ADMM options");

  const int M = cfg.n_rx;
  const int N = cfg.n_tx;
  const int K = cfg.mn();
  const Eigen::Index L = stack.cols();

  DenoisedStack out;
  out.n_rx = M;
  out.n_tx = N;
  out.tau = tau;

  const double scale = stack.norm() / std::sqrt(static_cast<double>(K * L));
  if (scale == 0.0) {
    out.x_hat = CMatrix::Zero(K, L);
    out.t = CMatrix::Zero(2 * N - 1, 2 * M - 1);
    out.p = CMatrix::Zero(L, L);
    out.constraint_slack = tau;
    out.converged = true;
    return out;
  }

  // The optimum lies in the row space of X, so work with X V (K x r).
  Eigen::JacobiSVD<CMatrix> svd(stack, Eigen::ComputeThinV);
  const CMatrix v = svd.matrixV();
  const Eigen::Index r = v.cols();
  const CMatrix xr = stack * v / scale;
  const double tau_s = tau / (scale * scale);
  const double radius = std::sqrt(tau_s);
  const Eigen::Index D = K + r;
  const double rho = opt.rho;

  CMatrix z = CMatrix::Zero(D, D);
  CMatrix lambda = CMatrix::Zero(D, D);
  Iterate it;
  Iterate best;
  double best_score = std::numeric_limits<double>::infinity();

  for (int k = 0; k < opt.max_iter; ++k) {
    const CMatrix w = z - lambda / rho;
    it.t = toeplitz_average(w.topLeftCorner(K, K), M, N);
    it.t(N - 1, M - 1) -= 1.0 / (2.0 * rho);
    it.p = w.bottomRightCorner(r, r) - CMatrix::Identity(r, r) / (2.0 * rho);
    it.x_hat = 0.5 * (w.topRightCorner(K, r) + w.bottomLeftCorner(r, K).adjoint());
    const CMatrix diff = it.x_hat - xr;
    const double dn = diff.norm();
    if (dn > radius) it.x_hat = xr + diff * (radius / dn);

    CMatrix gamma(D, D);
    gamma.topLeftCorner(K, K) = two_fold_toeplitz(it.t, M, N);
    gamma.topRightCorner(K, r) = it.x_hat;
    gamma.bottomLeftCorner(r, K) = it.x_hat.adjoint();
    gamma.bottomRightCorner(r, r) = it.p;

    const CMatrix z_new = psd_projection(gamma + lambda / rho);
    lambda += rho * (gamma - z_new);
    const double primal = (gamma - z_new).norm();
    const double dual = rho * (z_new - z).norm();
    z = z_new;

    const double objective = 0.5 * (K * it.t(N - 1, M - 1).real() + it.p.trace().real());
    out.objective_history.push_back(objective * scale);
    out.iterations = k + 1;
    out.primal_residual = primal;
    out.dual_residual = dual;

    const double eps_p = opt.eps_abs * D + opt.eps_rel * std::max(gamma.norm(), z.norm());
    const double eps_d = opt.eps_abs * D + opt.eps_rel * lambda.norm();
    const double score = std::max(primal / eps_p, dual / eps_d);
    if (score <= best_score) {
      best_score = score;
      best = it;
    }
    if (primal <= eps_p && dual <= eps_d) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) it = best;

  // Certify feasibility of the composed block by a diagonal shift.
  CMatrix block(D, D);
  block.topLeftCorner(K, K) = two_fold_toeplitz(it.t, M, N);
  block.topRightCorner(K, r) = it.x_hat;
  block.bottomLeftCorner(r, K) = it.x_hat.adjoint();
  block.bottomRightCorner(r, r) = it.p;
  const double lam_min = min_eigenvalue(block);
  const double shift = std::max(0.0, -lam_min);
  it.t(N - 1, M - 1) += shift;
  it.p += shift * CMatrix::Identity(r, r);
  block += shift * CMatrix::Identity(D, D);

  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (block + block.adjoint()), Eigen::EigenvaluesOnly);
  out.min_eigenvalue = std::min(0.0, es.eigenvalues()(0)) * scale;
  if (r == L) out.min_eigenvalue = es.eigenvalues()(0) * scale;
  out.block_norm = es.eigenvalues().cwiseAbs().maxCoeff() * scale;
  out.shift = shift * scale;

  out.x_hat = it.x_hat * v.adjoint() * scale;
  out.t = it.t * scale;
  out.p = v * it.p * v.adjoint() * scale;
  out.objective = 0.5 * (K * out.t(N - 1, M - 1).real() + out.p.trace().real());
  out.constraint_slack = tau - (stack - out.x_hat).squaredNorm();
  return out;
}

SubspaceResult subspace_from_denoised(const RadarConfig& cfg, const DenoisedStack& d, const GridSpec& grid,
                                      int n_targets) {
  SubspaceResult res = music_2d_covariance(cfg, sample_covariance(d.x_hat), grid, n_targets, "anm_music");
  return res;
}

}  // namespace fdamimo
