#include "fdamimo/crlb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace fdamimo {
namespace {

struct Inverse {
  CMatrix inv;
  double cond = 0.0;
};

Inverse checked_inverse(const CMatrix& c, const char* name) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (c + c.adjoint()));
  if (es.info() != Eigen::Success) throw NumericError(std::string("eigendecomposition of ") + name + " failed");
  const RVector& ev = es.eigenvalues();
  const double lo = ev(0);
  const double hi = ev(ev.size() - 1);
  if (!(hi > 0.0) || lo < -1e-10 * hi || !(lo > 1e-14 * hi)) {
    std::ostringstream os;
    os << name << " is singular or indefinite (lambda_min = " << lo << ", lambda_max = " << hi
       << "); add white noise or receive offsets";
    throw NumericError(os.str());
  }
  Inverse out;
  out.cond = hi / lo;
  out.inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
  return out;
}

double information(const CMatrix& cinv, const CVector& da, const CMatrix& dc, double beta2) {
  const double mean_term = beta2 * da.dot(cinv * da).real();
  const CMatrix g = cinv * dc;
  const double cov_term = 0.5 * (g * g).trace().real();
  return mean_term + cov_term;
}

}  // namespace

CVector steering_dtheta(const RadarConfig& cfg, double theta, double r) {
  const SteeringVectors sv = steering_vectors(cfg, theta, r);
  const double dft = cfg.f0 * cfg.d() * std::cos(theta) / cfg.c;
  CVector d(cfg.mn());
  for (int n = 0; n < cfg.n_tx; ++n)
    for (int m = 0; m < cfg.n_rx; ++m)
      d(n * cfg.n_rx + m) = -kJ * kTwoPi * static_cast<double>(n + m) * dft * sv.a_joint(n * cfg.n_rx + m);
  return d;
}

CVector steering_dr(const RadarConfig& cfg, double theta, double r) {
  const SteeringVectors sv = steering_vectors(cfg, theta, r);
  const double drho = 2.0 * cfg.delta_f / cfg.c;
  CVector d(cfg.mn());
  for (int n = 0; n < cfg.n_tx; ++n)
    for (int m = 0; m < cfg.n_rx; ++m)
      d(n * cfg.n_rx + m) = kJ * kTwoPi * static_cast<double>(n) * drho * sv.a_joint(n * cfg.n_rx + m);
  return d;
}

FimReport fim(const RadarConfig& cfg, const Target& target, const OffsetModel& offsets, double sigma0,
              int n_pulses) {
  if (!(sigma0 >= 0.0)) throw DomainError("sigma0 must be >= 0");
  if (n_pulses < 1) throw DomainError("n_pulses must be >= 1");
  const CovarianceModel cov = covariance_model(cfg, target, offsets, sigma0 * sigma0);
  const CovarianceDerivatives dc = covariance_derivatives(cfg, target, offsets);
  const double beta2 = std::norm(target.beta(cfg));

  const Inverse c = checked_inverse(cov.c_total, "C");
  const Inverse ct = checked_inverse(cov.c_tilde, "C_tilde");

  FimReport rep;
  rep.n_pulses = n_pulses;
  rep.cond_c = c.cond;
  rep.cond_c_tilde = ct.cond;
  rep.f_rr = n_pulses * information(c.inv, steering_dr(cfg, target.theta, target.r), dc.dct_dr + dc.dcr_dr, beta2);
  rep.f_theta_theta =
      n_pulses * information(ct.inv, steering_dtheta(cfg, target.theta, target.r), dc.dcr_dtheta, beta2);
  if (!(rep.f_rr > 0.0) || !(rep.f_theta_theta > 0.0)) throw NumericError("Fisher information is not positive");
  rep.crlb_r = 1.0 / rep.f_rr;
  rep.crlb_theta = 1.0 / rep.f_theta_theta;
  return rep;
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kSigmaT: return "sigma_t";
    case SweepAxis::kSigmaR: return "sigma_r";
    case SweepAxis::kSnr: return "snr";
  }
  return "unknown";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "sigma_t") return SweepAxis::kSigmaT;
  if (s == "sigma_r") return SweepAxis::kSigmaR;
  if (s == "snr") return SweepAxis::kSnr;
  throw DomainError("unknown sweep axis '" + s + "' (expected sigma_t, sigma_r or snr)");
}

CrlbCurve crlb_curve(const RadarConfig& cfg, const Target& target, const OffsetModel& offsets, double snr_db,
                     SweepAxis axis, const std::vector<double>& values, int n_pulses) {
  if (values.empty()) throw DomainError("sweep needs at least one value");
  CrlbCurve curve;
  curve.axis = axis;
  const Target targets[] = {target};
  for (double v : values) {
    OffsetModel o = offsets;
    double snr = snr_db;
    if (axis == SweepAxis::kSigmaT) o.sigma_t = v;
    if (axis == SweepAxis::kSigmaR) o.sigma_r = v;
    if (axis == SweepAxis::kSnr) snr = v;
    const double sigma0 = std::sqrt(white_noise_variance(cfg, targets, snr));
    const FimReport f = fim(cfg, target, o, sigma0, n_pulses);
    curve.rows.push_back({v, f.crlb_r, f.crlb_theta});
  }

  std::vector<CrlbRow> sorted = curve.rows;
  std::stable_sort(sorted.begin(), sorted.end(), [](const CrlbRow& a, const CrlbRow& b) { return a.value < b.value; });
  double th_lo = sorted.front().crlb_theta;
  double th_hi = th_lo;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double tol = 1e-12 * std::max(sorted[i].crlb_r, sorted[i - 1].crlb_r);
    if (sorted[i].crlb_r < sorted[i - 1].crlb_r - tol) curve.crlb_r_nondecreasing = false;
    if (sorted[i].crlb_r > sorted[i - 1].crlb_r + tol) curve.crlb_r_nonincreasing = false;
    th_lo = std::min(th_lo, sorted[i].crlb_theta);
    th_hi = std::max(th_hi, sorted[i].crlb_theta);
  }
  curve.crlb_theta_constant = (th_hi - th_lo) <= 1e-9 * th_hi;
  return curve;
}

}  // namespace fdamimo
