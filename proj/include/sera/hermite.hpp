#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "sera/common.hpp"

namespace sera {

/// pi^{-1/4}, the value of psi_0 at the origin.
inline constexpr double pi_quarter_inv = 0.75112554446494248;

namespace detail {

// Mantissa/exponent pair bounds for the scaled recurrence. Values are
// carried as p * 2^E so the iteration survives arguments far outside the
// classical oscillatory range, where e^{-x^2/2} underflows a double.
inline constexpr double kRescaleHi = 1.3407807929942597e154;   // 2^512
inline constexpr double kRescaleLo = 7.4583407312002067e-155;  // 2^-512

struct ScaledSeed {
  double p0;  // mantissa of psi_0(x)
  int e;      // power-of-two exponent
};

inline ScaledSeed hermite_seed(double x) {
  const double half_sq = 0.5 * x * x;
  if (half_sq < 600.0) return {pi_quarter_inv * std::exp(-half_sq), 0};
  // log2 psi_0(x) = -x^2/2 * log2(e) - log2(pi)/4
  const double t = -half_sq * 1.4426950408889634 - 0.41287403236807968;
  const double ef = std::floor(t);
  return {std::exp2(t - ef), static_cast<int>(ef)};
}

}  // namespace detail

/// Writes psi_0(x) .. psi_{m_max}(x) into out (m_max + 1 values), using the
/// three-term recurrence on the weighted functions. All iterates are O(1)
/// after scaling, so the loop is stable for any degree and argument.
inline void hermite_1d_into(int m_max, double x, double* out) {
  require(m_max >= 0, "hermite: m_max must be >= 0");
  require(std::isfinite(x), "hermite: x must be finite");
  const auto seed = detail::hermite_seed(x);
  double pm2 = seed.p0;
  double pm1 = std::sqrt(2.0) * x * seed.p0;
  int e = seed.e;
  out[0] = std::ldexp(pm2, e);
  if (m_max >= 1) out[1] = std::ldexp(pm1, e);
  for (int j = 2; j <= m_max; ++j) {
    const double pj = (x * pm1 - std::sqrt(0.5 * (j - 1)) * pm2) / std::sqrt(0.5 * j);
    pm2 = pm1;
    pm1 = pj;
    const double mag = std::max(std::fabs(pm1), std::fabs(pm2));
    if (mag > detail::kRescaleHi) {
      pm1 = std::ldexp(pm1, -512);
      pm2 = std::ldexp(pm2, -512);
      e += 512;
    } else if (mag != 0.0 && mag < detail::kRescaleLo) {
      pm1 = std::ldexp(pm1, 512);
      pm2 = std::ldexp(pm2, 512);
      e -= 512;
    }
    out[j] = std::ldexp(pm1, e);
  }
}

/// [psi_0(x), ..., psi_{m_max}(x)].
inline std::vector<double> hermite_1d_all(int m_max, double x) {
  std::vector<double> out(static_cast<std::size_t>(m_max) + 1);
  hermite_1d_into(m_max, x, out.data());
  return out;
}

inline double hermite_1d(int m, double x) {
  require(m >= 0, "hermite: m must be >= 0");
  require(std::isfinite(x), "hermite: x must be finite");
  const auto seed = detail::hermite_seed(x);
  double pm2 = seed.p0;
  if (m == 0) return std::ldexp(pm2, seed.e);
  double pm1 = std::sqrt(2.0) * x * seed.p0;
  int e = seed.e;
  for (int j = 2; j <= m; ++j) {
    const double pj = (x * pm1 - std::sqrt(0.5 * (j - 1)) * pm2) / std::sqrt(0.5 * j);
    pm2 = pm1;
    pm1 = pj;
    const double mag = std::max(std::fabs(pm1), std::fabs(pm2));
    if (mag > detail::kRescaleHi) {
      pm1 = std::ldexp(pm1, -512);
      pm2 = std::ldexp(pm2, -512);
      e += 512;
    } else if (mag != 0.0 && mag < detail::kRescaleLo) {
      pm1 = std::ldexp(pm1, 512);
      pm2 = std::ldexp(pm2, 512);
      e -= 512;
    }
  }
  return std::ldexp(pm1, e);
}

/// Multi-index in Z_+^q with its 1- and sup-norms.
struct MultiIndex {
  std::vector<int> entries;

  int one_norm() const { return std::accumulate(entries.begin(), entries.end(), 0); }
  int inf_norm() const {
    int m = 0;
    for (int v : entries) m = std::max(m, v);
    return m;
  }
  int dim() const { return static_cast<int>(entries.size()); }
};

/// All k in Z_+^q with |k|_1 <= budget, sorted by (|k|_1, lexicographic).
inline std::vector<MultiIndex> enumerate_multi_indices(int q, int budget) {
  require(q >= 1, "enumerate_multi_indices: q must be >= 1");
  require(budget >= 0, "enumerate_multi_indices: budget must be >= 0");
  std::vector<MultiIndex> out;
  std::vector<int> k(static_cast<std::size_t>(q), 0);
  const std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == q - 1) {
      k[pos] = left;
      out.push_back(MultiIndex{k});
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  for (int m = 0; m <= budget; ++m) rec(0, m);
  return out;
}

/// psi_k(x) = prod_i psi_{k_i}(x_i).
inline double hermite_multi(const MultiIndex& k, const Point& x) {
  require(k.dim() == static_cast<int>(x.size()), "hermite_multi: dimension mismatch");
  double prod = 1.0;
  for (int i = 0; i < k.dim(); ++i) prod *= hermite_1d(k.entries[i], x[i]);
  return prod;
}

/// Integrals I_m = int_R psi_m; zero for odd m, and for even m
/// I_{2k} = sqrt(2) pi^{1/4} sqrt((2k)!) / (2^k k!), generated by the
/// stable downward ratio I_{2k} = I_{2k-2} sqrt((2k-1)/(2k)).
inline std::vector<double> hermite_integrals(int m_max) {
  require(m_max >= 0, "hermite_integrals: m_max must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(m_max) + 1, 0.0);
  double even = std::sqrt(2.0) * std::pow(pi_v, 0.25);
  out[0] = even;
  for (int m = 2; m <= m_max; m += 2) {
    even *= std::sqrt((m - 1.0) / m);
    out[m] = even;
  }
  return out;
}

}  // namespace sera
