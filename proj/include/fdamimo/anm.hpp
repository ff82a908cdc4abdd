#pragma once

#include <vector>

#include "fdamimo/estimators.hpp"

namespace fdamimo {

struct AnmOptions {
  double rho = 1.0;
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  int max_iter = 2000;
};

/// Solution of the two-fold Toeplitz denoising SDP
///   min ½tr 𝒮(T) + ½tr P  s.t. [[𝒮(T), X̂], [X̂ᴴ, P]] ⪰ 0, ‖X - X̂‖_F² ≤ τ.
struct DenoisedStack {
  CMatrix x_hat;                 // MN x L
  CMatrix t;                     // (2N-1) x (2M-1), t(k1 + N-1, k2 + M-1)
  CMatrix p;                     // L x L
  int n_rx = 0;
  int n_tx = 0;
  double tau = 0.0;
  double objective = 0.0;
  double min_eigenvalue = 0.0;   // of the composed block matrix
  double block_norm = 0.0;       // its spectral norm
  double constraint_slack = 0.0; // τ - ‖X - X̂‖_F²
  double shift = 0.0;            // δ added to the diagonal to certify PSD
  bool converged = false;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<double> objective_history;
};

/// 𝒮(T): entry [(n, m), (n', m')] = t(n - n', m - m'), index n M + m.
CMatrix two_fold_toeplitz(const CMatrix& t, int n_rx, int n_tx);

/// ADMM solver. Throws DomainError for τ <= 0 or a malformed stack.
DenoisedStack anm_denoise(const RadarConfig& cfg, const CMatrix& stack, double tau, const AnmOptions& opt = {});

/// MUSIC on X̂ X̂ᴴ / L.
SubspaceResult subspace_from_denoised(const RadarConfig& cfg, const DenoisedStack& d, const GridSpec& grid,
                                      int n_targets);

}  // namespace fdamimo
