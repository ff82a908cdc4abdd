#include "fdamimo/model.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fdamimo/rng.hpp"

namespace fdamimo {
namespace {

// Fractional part of a product that can reach ~1e6 cycles.
double reduced_cycles(long double cycles) {
  long double frac = std::fmod(cycles, 1.0L);
  return static_cast<double>(frac);
}

PulseDraw sample_draw(const RadarConfig& cfg, const OffsetModel& offsets, StreamRng& rng) {
  PulseDraw draw;
  draw.f_e_t.resize(cfg.n_tx);
  draw.f_e_r.resize(cfg.n_rx, cfg.n_tx);
  for (int i = 0; i < cfg.n_tx; ++i) draw.f_e_t(i) = offsets.sigma_t * rng.normal();
  for (int n = 0; n < cfg.n_tx; ++n)
    for (int m = 0; m < cfg.n_rx; ++m) draw.f_e_r(m, n) = offsets.sigma_r * rng.normal();
  return draw;
}

}  // namespace

void RadarConfig::validate() const {
  if (n_tx < 1 || n_rx < 1) throw DomainError("array sizes must be >= 1");
  if (!(f0 > 0.0) || !(delta_f > 0.0) || !(c > 0.0))
    throw DomainError("f0, delta_f and c must be positive");
  if (!(delta_f / f0 < 1e-3)) throw DomainError("delta_f must be much smaller than f0 (ratio < 1e-3)");
  if (!(energy >= 0.0)) throw DomainError("energy must be non-negative");
}

Complex Target::beta(const RadarConfig& cfg) const {
  const long double cycles = 2.0L * static_cast<long double>(cfg.f0) * r / cfg.c;
  return alpha * cfg.t_p() * std::sqrt(cfg.energy / cfg.n_tx) * cis_cycles(reduced_cycles(cycles));
}

void Target::validate(const RadarConfig& cfg) const {
  if (!(theta >= -kPi / 2 && theta <= kPi / 2))
    throw DomainError("target angle must lie in [-90, 90] degrees");
  if (!(r >= 0.0 && r < cfg.r_max())) {
    std::ostringstream os;
    os << "target range " << r << " m outside [0, " << cfg.r_max() << ")";
    throw DomainError(os.str());
  }
}

TaylorValidity OffsetModel::validity(const RadarConfig& cfg) const {
  const double worst = std::max(sigma_t, sigma_r) / cfg.delta_f;
  if (worst < 0.05) return TaylorValidity::kValid;
  if (worst > 0.1) return TaylorValidity::kInvalid;
  return TaylorValidity::kMarginal;
}

void OffsetModel::validate() const {
  if (!(sigma_t >= 0.0) || !(sigma_r >= 0.0)) throw DomainError("offset standard deviations must be >= 0");
}

PulseDraw PulseDraw::zeros(const RadarConfig& cfg) {
  return {RVector::Zero(cfg.n_tx), RMatrix::Zero(cfg.n_rx, cfg.n_tx)};
}

PulseDraw PulseDraw::sample(const RadarConfig& cfg, const OffsetModel& offsets, std::uint64_t pulse_index) {
  StreamRng rng(offsets.seed, pulse_index);
  return sample_draw(cfg, offsets, rng);
}

double spatial_frequency(const RadarConfig& cfg, double theta) {
  return cfg.f0 * cfg.d() * std::sin(theta) / cfg.c;
}

SteeringVectors steering_vectors(const RadarConfig& cfg, double theta, double r) {
  cfg.validate();
  Target{theta, r}.validate(cfg);
  SteeringVectors sv;
  sv.f_theta = spatial_frequency(cfg, theta);
  sv.phi = 2.0 * r * cfg.delta_f / cfg.c - sv.f_theta;
  sv.a_rx.resize(cfg.n_rx);
  sv.a_tx.resize(cfg.n_tx);
  for (int m = 0; m < cfg.n_rx; ++m) sv.a_rx(m) = cis_cycles(-m * sv.f_theta);
  for (int n = 0; n < cfg.n_tx; ++n) sv.a_tx(n) = cis_cycles(n * sv.phi);
  sv.a_joint.resize(cfg.mn());
  for (int n = 0; n < cfg.n_tx; ++n)
    for (int m = 0; m < cfg.n_rx; ++m) sv.a_joint(n * cfg.n_rx + m) = sv.a_tx(n) * sv.a_rx(m);
  return sv;
}

Complex i1_integral(const RadarConfig& cfg, int i, int n) {
  if (i < 1 || n < 1 || i > cfg.n_tx || n > cfg.n_tx) throw DomainError("i1_integral index out of range");
  const double tp = cfg.t_p();
  if (i == n) return {tp * tp / 2.0, 0.0};
  // T_p Δf = 1 makes the boundary term e^{-j2π(i-n)} collapse to 1.
  return kJ * (tp * tp / (kTwoPi * (i - n)));
}

CVector vectorize(const CMatrix& y) {
  return Eigen::Map<const CVector>(y.data(), y.size());
}

CMatrix unvectorize(const CVector& y, int n_rx, int n_tx) {
  if (y.size() != static_cast<Eigen::Index>(n_rx) * n_tx) throw DomainError("vector length is not M*N");
  return Eigen::Map<const CMatrix>(y.data(), n_rx, n_tx);
}

CMatrix matched_output_exact(const RadarConfig& cfg, const Target& target, const PulseDraw& draw,
                             double rel_tol) {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  cfg.validate();
  target.validate(cfg);
  const int M = cfg.n_rx;
  const int N = cfg.n_tx;
  const double tp = cfg.t_p();
  const Complex amp = target.alpha * std::sqrt(cfg.energy / N);
  const long double d_sin = static_cast<long double>(cfg.d()) * std::sin(target.theta);

  CMatrix y = CMatrix::Zero(M, N);
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < M; ++m) {
      const long double f_r = cfg.f0 + static_cast<long double>(n) * cfg.delta_f + draw.f_e_r(m, n);
      Complex acc{0.0, 0.0};
      for (int i = 0; i < N; ++i) {
        const long double tau = (2.0L * target.r - (i + m) * d_sin) / cfg.c;
        const Complex path_phase = cis_cycles(reduced_cycles(f_r * tau));
        // Frequency difference between the i-th transmit carrier and the filter.
        const double f_diff =
            static_cast<double>((i - n) * static_cast<long double>(cfg.delta_f) + draw.f_e_t(i) - draw.f_e_r(m, n));
        // Integrate on u = t / T_p so the tolerance is scale free.
        auto integrand = [f_diff, tp](double u) { return cis_cycles(-f_diff * tp * u); };
        double err = 0.0;
        double l1 = 0.0;
        const Complex val = Quad::integrate(integrand, 0.0, 1.0, 20, rel_tol, &err, &l1);
        if (!(err <= std::max(rel_tol * l1, 1e-15))) {
          std::ostringstream os;
          os << "quadrature did not converge at (m=" << m + 1 << ", n=" << n + 1 << ", i=" << i + 1
             << "): error estimate " << err << ", L1 " << l1 << ", tolerance " << rel_tol;
          throw NumericError(os.str());
        }
        acc += path_phase * val * tp;
      }
      y(m, n) = amp * acc;
    }
  }
  return y;
}

ApproxOutput matched_output_approx(const RadarConfig& cfg, const Target& target, const PulseDraw& draw) {
  cfg.validate();
  target.validate(cfg);
  const int M = cfg.n_rx;
  const int N = cfg.n_tx;
  const double tp = cfg.t_p();
  const Complex beta = target.beta(cfg);
  const double f_theta = spatial_frequency(cfg, target.theta);
  const double range_cycles = cfg.delta_f * 2.0 * target.r / cfg.c;
  const double delay = 2.0 * target.r / cfg.c;
  const SteeringVectors sv = steering_vectors(cfg, target.theta, target.r);

  // phase(m, n, i) = e^{j2π[(n-1)Δf 2r/c - (m+i-2) f_θ]}, 0-based here.
  auto phase = [&](int m, int n, int i) { return cis_cycles(n * range_cycles - (m + i) * f_theta); };

  ApproxOutput out{CMatrix(M, N), CMatrix(M, N), CMatrix(M, N)};
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < M; ++m) {
      Complex tx_sum{0.0, 0.0};
      Complex rx_sum{0.0, 0.0};
      for (int i = 0; i < N; ++i) {
        const Complex term = phase(m, n, i) * i1_integral(cfg, i + 1, n + 1);
        tx_sum += draw.f_e_t(i) * term;
        rx_sum += term;
      }
      const Complex signal = (beta * sv.a_rx(m)) * sv.a_tx(n);
      const double f_r = draw.f_e_r(m, n);
      out.n_t(m, n) = -kJ * kTwoPi * (beta / tp) * tx_sum;
      out.n_r(m, n) = kJ * kTwoPi * f_r * (delay * signal + (beta / tp) * rx_sum);
      out.y(m, n) = signal + out.n_t(m, n) + out.n_r(m, n);
    }
  }
  return out;
}

double white_noise_variance(const RadarConfig& cfg, std::span<const Target> targets, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  if (!std::isfinite(snr_db)) throw DomainError("SNR must be finite or +inf");
  if (targets.empty()) throw DomainError("at least one target is required");
  double power = 0.0;
  for (const auto& t : targets) power += std::norm(t.beta(cfg));
  power /= static_cast<double>(targets.size());
  return power / std::pow(10.0, snr_db / 10.0);
}

CMatrix draw_pulse(const RadarConfig& cfg, std::span<const Target> targets, const OffsetModel& offsets,
                   double snr_db, std::uint64_t pulse_index) {
  offsets.validate();
  const double var0 = white_noise_variance(cfg, targets, snr_db);
  StreamRng rng(offsets.seed, pulse_index);
  const PulseDraw draw = sample_draw(cfg, offsets, rng);
  CMatrix y = CMatrix::Zero(cfg.n_rx, cfg.n_tx);
  for (const auto& t : targets) y += matched_output_approx(cfg, t, draw).y;
  const double s = std::sqrt(var0 / 2.0);
  for (int n = 0; n < cfg.n_tx; ++n)
    for (int m = 0; m < cfg.n_rx; ++m) {
      const double re = rng.normal();
      const double im = rng.normal();
      y(m, n) += Complex(s * re, s * im);
    }
  return y;
}

CMatrix draw_pulse(const RadarConfig& cfg, const Target& target, const OffsetModel& offsets, double snr_db,
                   std::uint64_t pulse_index) {
  return draw_pulse(cfg, std::span<const Target>(&target, 1), offsets, snr_db, pulse_index);
}

CMatrix draw_stack(const RadarConfig& cfg, std::span<const Target> targets, const OffsetModel& offsets,
                   double snr_db, int n_pulses, std::uint64_t first_index) {
  if (n_pulses < 1) throw DomainError("n_pulses must be >= 1");
  CMatrix x(cfg.mn(), n_pulses);
  for (int l = 0; l < n_pulses; ++l)
    x.col(l) = vectorize(draw_pulse(cfg, targets, offsets, snr_db, first_index + l));
  return x;
}

ApproximationError approximation_error(const RadarConfig& cfg, const Target& target,
                                       const OffsetModel& offsets, int n_pulses, double rel_tol) {
  if (n_pulses < 1) throw DomainError("n_pulses must be >= 1");
  offsets.validate();
  ApproximationError err;
  for (int l = 0; l < n_pulses; ++l) {
    const PulseDraw both = PulseDraw::sample(cfg, offsets, static_cast<std::uint64_t>(l));
    PulseDraw tx = both;
    tx.f_e_r.setZero();
    PulseDraw rx = both;
    rx.f_e_t.setZero();
    auto rel = [&](const PulseDraw& d) {
      const CMatrix exact = matched_output_exact(cfg, target, d, rel_tol);
      const CMatrix approx = matched_output_approx(cfg, target, d).y;
      return (approx - exact).norm() / exact.norm();
    };
    err.tx_only += rel(tx);
    err.rx_only += rel(rx);
    err.both += rel(both);
  }
  err.tx_only /= n_pulses;
  err.rx_only /= n_pulses;
  err.both /= n_pulses;
  return err;
}

}  // namespace fdamimo
