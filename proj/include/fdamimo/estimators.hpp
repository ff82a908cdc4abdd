#pragma once

#include <map>
#include <string>
#include <vector>

#include "fdamimo/grid.hpp"

namespace fdamimo {

struct Estimate {
  double theta = 0.0;                    // rad
  double r = 0.0;                        // m; NaN for angle-only methods
  Complex amplitude{0.0, 0.0};           // β scale where the method provides one
  std::string method;
  std::map<std::string, double> diagnostics;
};

struct SubspaceResult {
  Spectrum2D spectrum;
  std::vector<Estimate> estimates;
  RVector eigenvalues;                   // descending (by magnitude in cumulant mode)
};

/// Sample covariance X Xᴴ / L.
CMatrix sample_covariance(const CMatrix& stack);

/// Eigenvectors of a Hermitian matrix except the `n_signal` largest.
CMatrix noise_subspace(const CMatrix& r, int n_signal, RVector* eigenvalues = nullptr);

/// 2D-MUSIC on the MN x L stack.
SubspaceResult music_2d(const RadarConfig& cfg, const CMatrix& stack, const GridSpec& grid, int n_targets);

/// 2D-MUSIC on a given MN x MN covariance.
SubspaceResult music_2d_covariance(const RadarConfig& cfg, const CMatrix& cov, const GridSpec& grid,
                                   int n_targets, const std::string& method = "music2d");

struct RowMusicResult {
  Spectrum1D spectrum;
  std::vector<Estimate> estimates;
  RVector eigenvalues;
};

/// DOA-only MUSIC on the M x (N L) matrix of signal-matrix rows.
RowMusicResult music_rows(const RadarConfig& cfg, const CMatrix& stack, const std::vector<double>& theta_axis,
                          int n_targets);

struct CumulantMatrix {
  CMatrix c4;          // (MN)² x (MN)²
  Complex h{0.0, 0.0}; // dominant eigenvalue / (MN)²
  int mn = 0;
};

/// Sample fourth-order cumulant with entry [(i, j), (p, q)] = cum(x_i, x_j*, x_p*, x_q).
CumulantMatrix build_c4(const CMatrix& stack);

/// MUSIC on C4 with steering a ⊗ a*.
SubspaceResult music_cumulant(const RadarConfig& cfg, const CumulantMatrix& c4, const GridSpec& grid,
                              int n_targets);

struct OmpResult {
  std::vector<Estimate> estimates;
  CMatrix coefficients;                  // S x L, for unit-norm atoms
  std::vector<double> residual_history;  // ‖R‖_F after 0..S atoms
  double relative_residual = 0.0;
};

/// Simultaneous OMP over the unit-normalised (θ, r) dictionary. A single
/// pulse is a stack with L = 1.
OmpResult omp(const RadarConfig& cfg, const CMatrix& stack, const GridSpec& grid, int n_targets);

}  // namespace fdamimo
