#pragma once

#include <string>

#include "fdamimo/model.hpp"

namespace fdamimo {

/// Second-order statistics of the offset-induced and white noise terms of the
/// vectorised matched-filter output (index (n-1)M + m).
struct CovarianceModel {
  int n_rx = 0;
  int n_tx = 0;
  CMatrix c0;        // σ0² I
  CMatrix ct;        // transmit-offset noise covariance
  CMatrix cr;        // receive-offset noise covariance (diagonal)
  CMatrix c_total;   // c0 + ct + cr
  CMatrix c_tilde;   // c0 + cr, used for the angle bound
};

/// `noise_var` is the per-element white-noise variance σ0² (0 for none).
CovarianceModel covariance_model(const RadarConfig& cfg, const Target& target, const OffsetModel& offsets,
                                 double noise_var = 0.0);

/// Analytic partial derivatives of the offset covariances.
struct CovarianceDerivatives {
  CMatrix dct_dr;
  CMatrix dcr_dr;
  CMatrix dcr_dtheta;
};

CovarianceDerivatives covariance_derivatives(const RadarConfig& cfg, const Target& target,
                                             const OffsetModel& offsets);

enum class OffsetScenario { kNone, kTxOnly, kRxOnly, kBoth };
std::string to_string(OffsetScenario s);
OffsetScenario offset_scenario(const OffsetModel& offsets);

enum class EqSnrMode { kModel, kEmpirical, kBoth };

/// Where the empirical residual y - βa comes from.
enum class EmpiricalSource { kExact, kApprox };

struct EqualizedSnrReport {
  double snr_model_db = 0.0;       // NaN when not requested
  double snr_empirical_db = 0.0;   // NaN when not requested
  OffsetScenario scenario = OffsetScenario::kNone;
  double sigma_over_df = 0.0;
  double r_over_rmax = 0.0;
};

/// Signal power over offset-noise power. Zero offsets give +inf.
EqualizedSnrReport equalized_snr(const RadarConfig& cfg, const Target& target, const OffsetModel& offsets,
                                 EqSnrMode mode, int n_pulses,
                                 EmpiricalSource source = EmpiricalSource::kExact);

struct StructureReport {
  bool ct_block_toeplitz = true;
  bool ct_blocks_rank1 = true;
  bool ct_singular = true;
  bool cr_diagonal = true;
  bool all_hermitian = true;
  // Worst-case deviations backing each flag.
  double toeplitz_deviation = 0.0;      // relative to max |C_t|
  double block_rank1_ratio = 0.0;       // max over blocks of σ2/σ1
  double ct_eig_ratio = 0.0;            // λ_min / λ_max of C_t
  double cr_offdiag_max = 0.0;          // absolute
  double hermitian_deviation = 0.0;     // relative, max over assembled matrices
};

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kHermitianTolerance = 1e-12;

StructureReport structure_report(const CovarianceModel& cov);

}  // namespace fdamimo
