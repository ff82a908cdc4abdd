#include "fdamimo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace fdamimo {

GridSpec GridSpec::defaults(const RadarConfig& cfg) {
  return uniform(-90.0, 90.0, 0.1, 0.0, cfg.r_max() / 1500.0, 1500);
}

GridSpec GridSpec::uniform(double theta_lo_deg, double theta_hi_deg, double theta_step_deg, double r_lo,
                           double r_step, int n_r) {
  if (!(theta_step_deg > 0.0) || !(theta_hi_deg > theta_lo_deg))
    throw DomainError("theta axis needs lo < hi and a positive step");
  if (!(r_step > 0.0) || n_r < 2) throw DomainError("range axis needs a positive step and >= 2 points");
  GridSpec g;
  const int n_theta = static_cast<int>(std::floor((theta_hi_deg - theta_lo_deg) / theta_step_deg + 1e-9)) + 1;
  g.theta.reserve(n_theta);
  for (int i = 0; i < n_theta; ++i) g.theta.push_back(deg2rad(theta_lo_deg + i * theta_step_deg));
  g.r.reserve(n_r);
  for (int j = 0; j < n_r; ++j) g.r.push_back(r_lo + j * r_step);
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (theta.size() < 2 || r.size() < 2) throw DomainError("grid axes need at least 2 points each");
  for (std::size_t i = 1; i < theta.size(); ++i)
    if (!(theta[i] > theta[i - 1])) throw DomainError("theta axis must be strictly increasing");
  for (std::size_t j = 1; j < r.size(); ++j)
    if (!(r[j] > r[j - 1])) throw DomainError("range axis must be strictly increasing");
  if (theta.front() < -kPi / 2 - 1e-12 || theta.back() > kPi / 2 + 1e-12)
    throw DomainError("theta axis must stay within [-90, 90] degrees");
}

QuadraticFormGrid::QuadraticFormGrid(const RadarConfig& cfg, const GridSpec& grid)
    : m_(cfg.n_rx), n_(cfg.n_tx), grid_(grid) {
  cfg.validate();
  grid_.validate();
  f_theta_.reserve(grid_.n_theta());
  for (double th : grid_.theta) f_theta_.push_back(spatial_frequency(cfg, th));
  range_ramp_.resize(grid_.n_r());
  for (std::size_t j = 0; j < grid_.n_r(); ++j) {
    const double rho = 2.0 * grid_.r[j] * cfg.delta_f / cfg.c;
    auto& ramp = range_ramp_[j];
    ramp.resize(2 * n_ - 1);
    for (int k = -(n_ - 1); k <= n_ - 1; ++k) ramp[k + n_ - 1] = cis_cycles(std::fmod(k * rho, 1.0));
  }
}

std::vector<Complex> QuadraticFormGrid::lag_coefficients(const CMatrix& q, int i_theta) const {
  const int K = m_ * n_;
  if (q.rows() != K || q.cols() != K) throw DomainError("quadratic form matrix must be MN x MN");
  const double ft = f_theta_[i_theta];
  CVector w(K);
  for (int n = 0; n < n_; ++n)
    for (int m = 0; m < m_; ++m) w(n * m_ + m) = cis_cycles(-std::fmod((n + m) * ft, 1.0));

  std::vector<Complex> lags(2 * n_ - 1, Complex{0.0, 0.0});
  for (int np = 0; np < n_; ++np) {
    const CVector u = q.middleCols(np * m_, m_) * w.segment(np * m_, m_);
    for (int n = 0; n < n_; ++n) {
      const Complex b = w.segment(n * m_, m_).dot(u.segment(n * m_, m_));
      lags[np - n + n_ - 1] += b;
    }
  }
  return lags;
}

Complex QuadraticFormGrid::evaluate(const std::vector<Complex>& lags, int i_r) const {
  const auto& ramp = range_ramp_[i_r];
  Complex acc{0.0, 0.0};
  for (std::size_t k = 0; k < lags.size(); ++k) acc += lags[k] * ramp[k];
  return acc;
}

RMatrix QuadraticFormGrid::hermitian_form(const CMatrix& q) const {
  const int nt = static_cast<int>(grid_.n_theta());
  const int nr = static_cast<int>(grid_.n_r());
  RMatrix out(nt, nr);
  for (int i = 0; i < nt; ++i) {
    const auto lags = lag_coefficients(q, i);
    for (int j = 0; j < nr; ++j) out(i, j) = evaluate(lags, j).real();
  }
  return out;
}

GridPeak global_peak(const RMatrix& values, const GridSpec& grid) {
  GridPeak best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < values.rows(); ++i)
    for (int j = 0; j < values.cols(); ++j)
      if (values(i, j) > best.value) {
        best.value = values(i, j);
        best.i_theta = i;
        best.i_r = j;
      }
  best.theta = grid.theta[best.i_theta];
  best.r = grid.r[best.i_r];
  return best;
}

std::vector<GridPeak> top_peaks(const RMatrix& values, const GridSpec& grid, int count, int min_sep) {
  if (count == 1) return {global_peak(values, grid)};
  const int nt = static_cast<int>(values.rows());
  const int nr = static_cast<int>(values.cols());
  std::vector<GridPeak> cand;
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nr; ++j) {
      const double v = values(i, j);
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int a = i + di;
          const int b = j + dj;
          if (a < 0 || a >= nt || b < 0 || b >= nr) continue;
          const double u = values(a, b);
          const bool earlier = a < i || (a == i && b < j);
          if (u > v || (earlier && u == v)) {
            is_max = false;
            break;
          }
        }
      if (is_max) cand.push_back({i, j, grid.theta[i], grid.r[j], v});
    }
  std::stable_sort(cand.begin(), cand.end(), [](const GridPeak& a, const GridPeak& b) { return a.value > b.value; });

  std::vector<GridPeak> out;
  for (const auto& c : cand) {
    if (static_cast<int>(out.size()) == count) break;
    const bool close = std::any_of(out.begin(), out.end(), [&](const GridPeak& p) {
      return std::abs(p.i_theta - c.i_theta) <= min_sep && std::abs(p.i_r - c.i_r) <= min_sep;
    });
    if (!close) out.push_back(c);
  }
  while (!out.empty() && static_cast<int>(out.size()) < count) out.push_back(out.front());
  return out;
}

std::vector<int> top_peaks_1d(const RVector& values, int count, int min_sep) {
  const int n = static_cast<int>(values.size());
  std::vector<int> cand;
  for (int i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || values(i) > values(i - 1);
    const bool right_ok = i == n - 1 || values(i) >= values(i + 1);
    if (left_ok && right_ok) cand.push_back(i);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return values(a) > values(b); });
  std::vector<int> out;
  for (int c : cand) {
    if (static_cast<int>(out.size()) == count) break;
    if (std::none_of(out.begin(), out.end(), [&](int p) { return std::abs(p - c) <= min_sep; })) out.push_back(c);
  }
  while (!out.empty() && static_cast<int>(out.size()) < count) out.push_back(out.front());
  return out;
}

}  // namespace fdamimo
