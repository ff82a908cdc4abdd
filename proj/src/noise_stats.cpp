#include "fdamimo/noise_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace fdamimo {
namespace {

struct Geometry {
  int M;
  int N;
  double tp;
  double f_theta;
  double df_theta;     // d f_θ / dθ
  double range_cycles; // Δf 2r / c
  double delay;        // 2r / c
  double beta2;        // |β|²
};

Geometry geometry(const RadarConfig& cfg, const Target& target) {
  cfg.validate();
  target.validate(cfg);
  return {cfg.n_rx,
          cfg.n_tx,
          cfg.t_p(),
          spatial_frequency(cfg, target.theta),
          cfg.f0 * cfg.d() * std::cos(target.theta) / cfg.c,
          cfg.delta_f * 2.0 * target.r / cfg.c,
          2.0 * target.r / cfg.c,
          std::norm(target.beta(cfg))};
}

// g_i[(n,m)] = e^{j2π(nρ - m f_θ)} I_{1,i,n} / T_p ; C_t = 4π²|β|²σ_t² Σ_i g_i g_iᴴ.
std::vector<CVector> transmit_generators(const RadarConfig& cfg, const Geometry& g) {
  std::vector<CVector> gens(g.N, CVector(g.M * g.N));
  for (int i = 0; i < g.N; ++i)
    for (int n = 0; n < g.N; ++n) {
      const Complex i1 = i1_integral(cfg, i + 1, n + 1) / g.tp;
      for (int m = 0; m < g.M; ++m) gens[i](n * g.M + m) = cis_cycles(n * g.range_cycles - m * g.f_theta) * i1;
    }
  return gens;
}

// h_n = 2r/c + (1/T_p) Σ_i e^{-j2π(i-n)f_θ} I_{1,i,n}; also returns d h_n / dθ.
std::pair<Complex, Complex> receive_gain(const RadarConfig& cfg, const Geometry& g, int n) {
  Complex h{g.delay, 0.0};
  Complex dh{0.0, 0.0};
  for (int i = 0; i < g.N; ++i) {
    const Complex term = cis_cycles(-(i - n) * g.f_theta) * i1_integral(cfg, i + 1, n + 1) / g.tp;
    h += term;
    dh += -kJ * kTwoPi * static_cast<double>(i - n) * g.df_theta * term;
  }
  return {h, dh};
}

double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double hermitian_deviation(const CMatrix& a) {
  const double scale = max_abs(a);
  if (scale == 0.0) return 0.0;
  return max_abs(a - a.adjoint()) / scale;
}

}  // namespace

CovarianceModel covariance_model(const RadarConfig& cfg, const Target& target, const OffsetModel& offsets,
                                 double noise_var) {
  offsets.validate();
  if (!(noise_var >= 0.0)) throw DomainError("white-noise variance must be >= 0");
  const Geometry g = geometry(cfg, target);
  const int K = g.M * g.N;
  CovarianceModel cov;
  cov.n_rx = g.M;
  cov.n_tx = g.N;
  cov.c0 = CMatrix::Identity(K, K) * noise_var;
  cov.ct = CMatrix::Zero(K, K);
  cov.cr = CMatrix::Zero(K, K);

  if (offsets.sigma_t > 0.0) {
    const double scale = 4.0 * kPi * kPi * g.beta2 * offsets.sigma_t * offsets.sigma_t;
    for (const auto& gi : transmit_generators(cfg, g)) cov.ct.noalias() += scale * gi * gi.adjoint();
  }
  if (offsets.sigma_r > 0.0) {
    const double scale = 4.0 * kPi * kPi * g.beta2 * offsets.sigma_r * offsets.sigma_r;
    for (int n = 0; n < g.N; ++n) {
      const double p = scale * std::norm(receive_gain(cfg, g, n).first);
      for (int m = 0; m < g.M; ++m) cov.cr(n * g.M + m, n * g.M + m) = p;
    }
  }
  cov.c_total = cov.c0 + cov.ct + cov.cr;
  cov.c_tilde = cov.c0 + cov.cr;
  return cov;
}

CovarianceDerivatives covariance_derivatives(const RadarConfig& cfg, const Target& target,
                                             const OffsetModel& offsets) {
  offsets.validate();
  const Geometry g = geometry(cfg, target);
  const int K = g.M * g.N;
  CovarianceDerivatives d{CMatrix::Zero(K, K), CMatrix::Zero(K, K), CMatrix::Zero(K, K)};

  if (offsets.sigma_t > 0.0) {
    const double scale = 4.0 * kPi * kPi * g.beta2 * offsets.sigma_t * offsets.sigma_t;
    const double drho = kTwoPi * 2.0 * cfg.delta_f / cfg.c;
    for (const auto& gi : transmit_generators(cfg, g)) {
      CVector dgi(K);
      for (int n = 0; n < g.N; ++n)
        for (int m = 0; m < g.M; ++m) dgi(n * g.M + m) = kJ * (n * drho) * gi(n * g.M + m);
      d.dct_dr.noalias() += scale * (dgi * gi.adjoint() + gi * dgi.adjoint());
    }
  }
  if (offsets.sigma_r > 0.0) {
    const double scale = 4.0 * kPi * kPi * g.beta2 * offsets.sigma_r * offsets.sigma_r;
    for (int n = 0; n < g.N; ++n) {
      const auto [h, dh] = receive_gain(cfg, g, n);
      const double dr = scale * 2.0 * (std::conj(h) * (2.0 / cfg.c)).real();
      const double dth = scale * 2.0 * (std::conj(h) * dh).real();
      for (int m = 0; m < g.M; ++m) {
        d.dcr_dr(n * g.M + m, n * g.M + m) = dr;
        d.dcr_dtheta(n * g.M + m, n * g.M + m) = dth;
      }
    }
  }
  return d;
}

std::string to_string(OffsetScenario s) {
  switch (s) {
    case OffsetScenario::kNone: return "none";
    case OffsetScenario::kTxOnly: return "tx-only";
    case OffsetScenario::kRxOnly: return "rx-only";
    case OffsetScenario::kBoth: return "both";
  }
  return "unknown";
}

OffsetScenario offset_scenario(const OffsetModel& offsets) {
  const bool tx = offsets.sigma_t > 0.0;
  const bool rx = offsets.sigma_r > 0.0;
  if (tx && rx) return OffsetScenario::kBoth;
  if (tx) return OffsetScenario::kTxOnly;
  if (rx) return OffsetScenario::kRxOnly;
  return OffsetScenario::kNone;
}

EqualizedSnrReport equalized_snr(const RadarConfig& cfg, const Target& target, const OffsetModel& offsets,
                                 EqSnrMode mode, int n_pulses, EmpiricalSource source) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  offsets.validate();
  const Geometry g = geometry(cfg, target);

  EqualizedSnrReport rep;
  rep.scenario = offset_scenario(offsets);
  rep.sigma_over_df = std::max(offsets.sigma_t, offsets.sigma_r) / cfg.delta_f;
  rep.r_over_rmax = target.r / cfg.r_max();
  rep.snr_model_db = kNaN;
  rep.snr_empirical_db = kNaN;

  const double signal = g.beta2 * g.M * g.N;
  const bool want_model = mode != EqSnrMode::kEmpirical;
  const bool want_emp = mode != EqSnrMode::kModel;

  if (rep.scenario == OffsetScenario::kNone) {
    if (want_model) rep.snr_model_db = kInf;
    if (want_emp) rep.snr_empirical_db = kInf;
    return rep;
  }
  if (want_model) {
    const CovarianceModel cov = covariance_model(cfg, target, offsets, 0.0);
    const double noise = cov.ct.trace().real() + cov.cr.trace().real();
    rep.snr_model_db = 10.0 * std::log10(signal / noise);
  }
  if (want_emp) {
    if (n_pulses < 1) throw DomainError("empirical equalized SNR needs n_pulses >= 1");
    const SteeringVectors sv = steering_vectors(cfg, target.theta, target.r);
    const CMatrix clean = target.beta(cfg) * sv.a_rx * sv.a_tx.transpose();
    double acc = 0.0;
    for (int l = 0; l < n_pulses; ++l) {
      const PulseDraw draw = PulseDraw::sample(cfg, offsets, static_cast<std::uint64_t>(l));
      const CMatrix y = source == EmpiricalSource::kExact ? matched_output_exact(cfg, target, draw)
                                                          : matched_output_approx(cfg, target, draw).y;
      acc += (y - clean).squaredNorm();
    }
    rep.snr_empirical_db = 10.0 * std::log10(signal / (acc / n_pulses));
  }
  return rep;
}

StructureReport structure_report(const CovarianceModel& cov) {
  StructureReport rep;
  const int M = cov.n_rx;
  const int N = cov.n_tx;
  const double ct_scale = max_abs(cov.ct);

  if (ct_scale > 0.0) {
    // Within every M x M block, entries depend only on m - p.
    double dev = 0.0;
    double worst_ratio = 0.0;
    for (int n = 0; n < N; ++n)
      for (int q = 0; q < N; ++q) {
        const CMatrix block = cov.ct.block(n * M, q * M, M, M);
        for (int m = 0; m < M; ++m)
          for (int p = 0; p < M; ++p) {
            const int lo = std::min(m, p);
            dev = std::max(dev, std::abs(block(m, p) - block(m - lo, p - lo)) / ct_scale);
          }
        Eigen::JacobiSVD<CMatrix> svd(block);
        const auto& s = svd.singularValues();
        if (s.size() > 1 && s(0) > 0.0) worst_ratio = std::max(worst_ratio, s(1) / s(0));
      }
    rep.toeplitz_deviation = dev;
    rep.block_rank1_ratio = worst_ratio;
    rep.ct_block_toeplitz = dev <= kHermitianTolerance;
    rep.ct_blocks_rank1 = worst_ratio < kRankTolerance;

    Eigen::SelfAdjointEigenSolver<CMatrix> es(cov.ct, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    rep.ct_eig_ratio = ev(0) / ev(ev.size() - 1);
    rep.ct_singular = ev(0) < kRankTolerance * ev(ev.size() - 1);
  }

  CMatrix off = cov.cr;
  off.diagonal().setZero();
  rep.cr_offdiag_max = max_abs(off);
  rep.cr_diagonal = rep.cr_offdiag_max == 0.0;

  for (const CMatrix* a : {&cov.c0, &cov.ct, &cov.cr, &cov.c_total, &cov.c_tilde})
    rep.hermitian_deviation = std::max(rep.hermitian_deviation, hermitian_deviation(*a));
  rep.all_hermitian = rep.hermitian_deviation < kHermitianTolerance;
  return rep;
}

}  // namespace fdamimo
