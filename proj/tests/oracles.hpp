#pragma once

// Reference implementations used by the tests. None of them call into the
// library code they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>; // row-major, rows x cols

// Minimizes |y - Q w|^2 + alpha |w|^2 with Nesterov's accelerated gradient
// method on the normal-equation gradient 2 (Q^T Q + alpha I) w - 2 Q^T y.
// Stops once |grad|_2 / (2 mu) < tol, which bounds |w - w*|_2 by tol for
// mu = alpha, the strong-convexity constant. Needs alpha > 0.
inline std::vector<double> ridge_gradient_descent(const Matrix &q, const std::vector<double> &y,
                                                  double alpha, double tol = 1e-10,
                                                  std::size_t max_iter = 2000000) {
  const std::size_t n = q.size(), j = n ? q[0].size() : 0;
  Matrix gram(j, std::vector<double>(j, 0.0));
  std::vector<double> qty(j, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t a = 0; a < j; ++a) {
      qty[a] += q[r][a] * y[r];
      for (std::size_t b = 0; b < j; ++b) gram[a][b] += q[r][a] * q[r][b];
    }
  for (std::size_t a = 0; a < j; ++a) gram[a][a] += alpha;

  // Largest eigenvalue by power iteration, padded for safety.
  std::vector<double> v(j, 1.0), gv(j);
  double lmax = 1.0;
  for (int it = 0; it < 500; ++it) {
    double norm = 0.0;
    for (std::size_t a = 0; a < j; ++a) {
      gv[a] = 0.0;
      for (std::size_t b = 0; b < j; ++b) gv[a] += gram[a][b] * v[b];
      norm += gv[a] * gv[a];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    lmax = norm;
    for (std::size_t a = 0; a < j; ++a) v[a] = gv[a] / norm;
  }
  const double lipschitz = 1.05 * lmax;
  const double mu = alpha;
  const double kappa = lipschitz / mu;
  const double momentum = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);

  std::vector<double> w(j, 0.0), w_prev(j, 0.0), z(j, 0.0), grad(j);
  auto gradient_at = [&](const std::vector<double> &x) {
    double sq = 0.0;
    for (std::size_t a = 0; a < j; ++a) {
      double s = -qty[a];
      for (std::size_t b = 0; b < j; ++b) s += gram[a][b] * x[b];
      grad[a] = s; // half the true gradient
      sq += s * s;
    }
    return std::sqrt(sq);
  };
  for (std::size_t it = 0; it < max_iter; ++it) {
    if (gradient_at(w) / mu < tol) break;
    for (std::size_t a = 0; a < j; ++a) z[a] = w[a] + momentum * (w[a] - w_prev[a]);
    gradient_at(z);
    w_prev = w;
    for (std::size_t a = 0; a < j; ++a) w[a] = z[a] - grad[a] / lipschitz;
  }
  return w;
}

// Window (r_{n-m+1}, ..., r_n) found by trying every m-bit pattern; the
// returned code has r_{n-m+1} as its most significant bit. -1 if no match.
inline long matching_pattern(const std::vector<double> &r, std::size_t n, std::size_t m) {
  for (unsigned long code = 0; code < (1ul << m); ++code) {
    bool match = true;
    for (std::size_t i = 0; i < m && match; ++i) {
      const int bit = static_cast<int>((code >> (m - 1 - i)) & 1ul);
      match = static_cast<int>(r[n + 1 - m + i]) == bit;
    }
    if (match) return static_cast<long>(code);
  }
  return -1;
}

inline int popcount(unsigned long x) {
  int c = 0;
  for (; x; x >>= 1) c += static_cast<int>(x & 1ul);
  return c;
}

// Brute-force task targets; NaN where the window does not fit.
inline std::vector<double> xor_targets(const std::vector<double> &r, std::size_t m) {
  std::vector<double> y(r.size(), std::nan(""));
  for (std::size_t n = m - 1; n < r.size(); ++n)
    y[n] = popcount(static_cast<unsigned long>(matching_pattern(r, n, m))) % 2;
  return y;
}

inline std::vector<double> dac_targets(const std::vector<double> &r, std::size_t m) {
  std::vector<double> y(r.size(), std::nan(""));
  for (std::size_t n = m - 1; n < r.size(); ++n)
    y[n] = static_cast<double>(matching_pattern(r, n, m)) /
           static_cast<double>((1ul << m) - 1);
  return y;
}

inline std::vector<double> header_targets(const std::vector<double> &r, unsigned long header,
                                          std::size_t m) {
  std::vector<double> y(r.size(), std::nan(""));
  for (std::size_t n = m - 1; n < r.size(); ++n)
    y[n] = matching_pattern(r, n, m) == static_cast<long>(header) ? 1.0 : 0.0;
  return y;
}

// RMSE of the constant guess g against 2^m equiprobable DAC levels.
inline double dac_constant_rmse(std::size_t m, double guess = 0.5) {
  const unsigned long levels = 1ul << m;
  double sum = 0.0;
  for (unsigned long k = 0; k < levels; ++k) {
    const double d = static_cast<double>(k) / static_cast<double>(levels - 1) - guess;
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(levels));
}

// Bisection root of f on [lo, hi]; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)> &f, double lo, double hi,
                     int iterations = 200) {
  double flo = f(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct Laser {
  double alpha, tau_p, tau_n, g, n0, s, pump;
};

// Free-running steady state: the field equation forces G = 1/tau_p, leaving
// P - N(I)/tau_n - I/tau_p = 0 in the intensity alone.
inline double free_running_intensity(const Laser &l) {
  auto residual = [&](double intensity) {
    const double carrier = l.n0 + (1.0 + l.s * intensity) / (l.g * l.tau_p);
    return l.pump - carrier / l.tau_n - intensity / l.tau_p;
  };
  return bisect(residual, 0.0, l.pump * l.tau_p * 10.0);
}

// Locked steady state under a real drive term d (field units per second) at
// zero detuning: 0 = (1 + i alpha)(G - 1/tau_p) E / 2 + d. The magnitude
// gives G = 1/tau_p - 2 d / (A sqrt(1 + alpha^2)); the carrier balance
// P - N/tau_n - G A^2 = 0 then fixes the amplitude A.
inline double locked_intensity(const Laser &l, double drive) {
  const double root = std::sqrt(1.0 + l.alpha * l.alpha);
  auto residual = [&](double amp) {
    const double gain = 1.0 / l.tau_p - 2.0 * drive / (amp * root);
    const double intensity = amp * amp;
    const double carrier = l.n0 + gain * (1.0 + l.s * intensity) / l.g;
    return l.pump - carrier / l.tau_n - gain * intensity;
  };
  const double amp = bisect(residual, 1e-9, std::sqrt(l.pump * l.tau_p * 100.0) + 1.0);
  return amp * amp;
}

} // namespace oracle
