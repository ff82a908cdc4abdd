#pragma once

#include <vector>

#include "fdamimo/model.hpp"

namespace fdamimo {

/// Search grid over (θ, r); both axes strictly increasing.
struct GridSpec {
  std::vector<double> theta;   // rad
  std::vector<double> r;       // m

  /// θ in [-90°, 90°] at 0.1°, r = k r_max / 1500 for k = 0..1499.
  static GridSpec defaults(const RadarConfig& cfg);
  static GridSpec uniform(double theta_lo_deg, double theta_hi_deg, double theta_step_deg, double r_lo,
                          double r_step, int n_r);

  std::size_t n_theta() const { return theta.size(); }
  std::size_t n_r() const { return r.size(); }
  std::size_t size() const { return theta.size() * r.size(); }
  void validate() const;
};

struct GridPeak {
  int i_theta = 0;
  int i_r = 0;
  double theta = 0.0;
  double r = 0.0;
  double value = 0.0;
};

struct Spectrum2D {
  RMatrix values;   // n_theta x n_r
  GridPeak peak;    // global argmax, ties to the lowest (θ, r) index
};

struct Spectrum1D {
  RVector values;
  int peak_index = 0;
  double peak_theta = 0.0;
  double peak_value = 0.0;
};

/// Evaluates a(θ,r)ᴴ Q a(θ,r) over a grid by splitting the joint steering
/// vector into its angle part and a range phase ramp. Q is any MN x MN matrix.
class QuadraticFormGrid {
 public:
  QuadraticFormGrid(const RadarConfig& cfg, const GridSpec& grid);

  /// Lag coefficients h_k, k = -(N-1)..N-1, so that aᴴQa = Σ_k h_k e^{j2πkρ(r)}.
  std::vector<Complex> lag_coefficients(const CMatrix& q, int i_theta) const;

  /// Σ_k h_k e^{j2πkρ(r_j)} for the given range index.
  Complex evaluate(const std::vector<Complex>& lags, int i_r) const;

  /// Real part of aᴴQa on the full grid; Q is expected Hermitian.
  RMatrix hermitian_form(const CMatrix& q) const;

  const GridSpec& grid() const { return grid_; }

 private:
  int m_;
  int n_;
  GridSpec grid_;
  std::vector<double> f_theta_;
  std::vector<std::vector<Complex>> range_ramp_;   // [i_r][k + N - 1]
};

/// Strict local maxima (8-neighbourhood, plateaus resolved by index), best first.
/// Peaks closer than `min_sep` cells in both axes to a better one are skipped.
std::vector<GridPeak> top_peaks(const RMatrix& values, const GridSpec& grid, int count, int min_sep = 2);

GridPeak global_peak(const RMatrix& values, const GridSpec& grid);

/// 1D counterpart for θ-only spectra.
std::vector<int> top_peaks_1d(const RVector& values, int count, int min_sep = 2);

}  // namespace fdamimo
