#pragma once

#include <string>
#include <vector>

#include "fdamimo/noise_stats.hpp"

namespace fdamimo {

/// Diagonal Fisher information for s = [θ, r, β] with β treated as known.
struct FimReport {
  double f_rr = 0.0;
  double f_theta_theta = 0.0;
  double crlb_r = 0.0;          // m²
  double crlb_theta = 0.0;      // rad²
  double cond_c = 0.0;          // condition number of C
  double cond_c_tilde = 0.0;    // condition number of C̃
  int n_pulses = 1;
};

/// ∂a/∂θ and ∂a/∂r of the joint steering vector.
CVector steering_dtheta(const RadarConfig& cfg, double theta, double r);
CVector steering_dr(const RadarConfig& cfg, double theta, double r);

/// `sigma0` is the white-noise standard deviation per element; the
/// information of `n_pulses` independent pulses is summed.
FimReport fim(const RadarConfig& cfg, const Target& target, const OffsetModel& offsets, double sigma0,
              int n_pulses = 1);

enum class SweepAxis { kSigmaT, kSigmaR, kSnr };
std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

struct CrlbRow {
  double value = 0.0;
  double crlb_r = 0.0;
  double crlb_theta = 0.0;
};

struct CrlbCurve {
  SweepAxis axis = SweepAxis::kSnr;
  std::vector<CrlbRow> rows;
  bool crlb_r_nondecreasing = true;     // along increasing sweep value
  bool crlb_r_nonincreasing = true;
  bool crlb_theta_constant = true;      // relative spread < 1e-9
};

/// Sweeps one of σ_t (Hz), σ_r (Hz) or SNR (dB); the other settings come from
/// `offsets` and `snr_db`.
CrlbCurve crlb_curve(const RadarConfig& cfg, const Target& target, const OffsetModel& offsets, double snr_db,
                     SweepAxis axis, const std::vector<double>& values, int n_pulses = 1);

}  // namespace fdamimo
