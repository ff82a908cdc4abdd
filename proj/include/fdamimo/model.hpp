#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fdamimo/types.hpp"

namespace fdamimo {

/// Array geometry and waveform parameters of a co-located FDA-MIMO radar.
///
/// The pulse length is tied to the frequency increment (T_p = 1/Δf) so that
/// the transmit waveforms are orthogonal over one pulse; element spacing is
/// half a carrier wavelength.
struct RadarConfig {
  int n_tx = 4;               // N
  int n_rx = 4;               // M
  double f0 = 10e9;           // carrier, Hz
  double delta_f = 10e3;      // frequency increment, Hz
  double energy = 1.0;        // total transmitted energy E, J
  double c = 299792458.0;     // propagation speed, m/s

  double t_p() const { return 1.0 / delta_f; }
  double d() const { return c / (2.0 * f0); }
  double r_max() const { return c / (2.0 * delta_f); }
  int mn() const { return n_tx * n_rx; }

  /// Throws DomainError when the geometry is unusable.
  void validate() const;

  static RadarConfig defaults() { return {}; }
};

/// Far-field point target.
struct Target {
  double theta = 0.0;         // DOA, rad
  double r = 0.0;             // range, m
  Complex alpha{1.0, 0.0};    // reflection coefficient

  /// β = α T_p √(E/N) e^{j4π f0 r / c}
  Complex beta(const RadarConfig& cfg) const;
  void validate(const RadarConfig& cfg) const;
};

enum class TaylorValidity { kValid, kMarginal, kInvalid };

/// Gaussian carrier-offset statistics; offsets are constant within a pulse
/// and redrawn independently for every pulse.
struct OffsetModel {
  double sigma_t = 0.0;       // transmit offset std, Hz
  double sigma_r = 0.0;       // receive offset std, Hz
  std::uint64_t seed = 0;

  /// First-order model is trusted below 0.05Δf and rejected above 0.1Δf.
  TaylorValidity validity(const RadarConfig& cfg) const;
  void validate() const;
};

/// One pulse worth of offset realisations.
struct PulseDraw {
  RVector f_e_t;   // N, Hz
  RMatrix f_e_r;   // M x N, Hz

  static PulseDraw zeros(const RadarConfig& cfg);
  /// Deterministic in (offsets.seed, pulse_index).
  static PulseDraw sample(const RadarConfig& cfg, const OffsetModel& offsets,
                          std::uint64_t pulse_index);
};

struct SteeringVectors {
  CVector a_rx;      // M
  CVector a_tx;      // N
  CVector a_joint;   // MN, a_tx ⊗ a_rx
  double f_theta = 0.0;
  double phi = 0.0;
};

/// Normalised spatial frequency f0 d sinθ / c.
double spatial_frequency(const RadarConfig& cfg, double theta);

SteeringVectors steering_vectors(const RadarConfig& cfg, double theta, double r);

/// ∫₀^{T_p} e^{-j2π(i-n)Δf t} t dt, indices 1-based.
Complex i1_integral(const RadarConfig& cfg, int i, int n);

/// Column-major vectorisation: element (m, n) lands at n*M + m.
CVector vectorize(const CMatrix& y);
CMatrix unvectorize(const CVector& y, int n_rx, int n_tx);

/// Matched-filter bank output evaluated from the receive integral by adaptive
/// Gauss-Kronrod quadrature, with the full delay phase of every path.
CMatrix matched_output_exact(const RadarConfig& cfg, const Target& target, const PulseDraw& draw,
                             double rel_tol = 1e-10);

struct ApproxOutput {
  CMatrix y;     // β a_r a_t^T + N_t + N_r
  CMatrix n_t;
  CMatrix n_r;
};

/// First-order closed form of the matched-filter output.
ApproxOutput matched_output_approx(const RadarConfig& cfg, const Target& target, const PulseDraw& draw);

inline constexpr double kNoWhiteNoise = std::numeric_limits<double>::infinity();

/// Per-element AWGN variance for a given SNR; zero for +∞.
double white_noise_variance(const RadarConfig& cfg, std::span<const Target> targets, double snr_db);

/// One pulse of the approximate model plus circular white noise.
CMatrix draw_pulse(const RadarConfig& cfg, std::span<const Target> targets, const OffsetModel& offsets,
                   double snr_db, std::uint64_t pulse_index);
CMatrix draw_pulse(const RadarConfig& cfg, const Target& target, const OffsetModel& offsets,
                   double snr_db, std::uint64_t pulse_index);

/// MN x L stack, column l is vectorised pulse (first_index + l).
CMatrix draw_stack(const RadarConfig& cfg, std::span<const Target> targets, const OffsetModel& offsets,
                   double snr_db, int n_pulses, std::uint64_t first_index = 0);

struct ApproximationError {
  double tx_only = 0.0;
  double rx_only = 0.0;
  double both = 0.0;
};

/// Mean relative Frobenius error between the first-order and quadrature
/// outputs for transmit-only, receive-only and combined offsets.
ApproximationError approximation_error(const RadarConfig& cfg, const Target& target,
                                       const OffsetModel& offsets, int n_pulses,
                                       double rel_tol = 1e-10);

}  // namespace fdamimo
