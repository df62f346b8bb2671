#pragma once

// Closed-form evaluators for the BST and Yule additive martingales, their
// derivatives, the normalizing products C_n(z), and related constants.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "yulebst/rational.hpp"
#include "yulebst/tree.hpp"

namespace yulebst {

using Complex = std::complex<double>;

/// Cramer transform of Poisson(lambda): x log(x/lambda) - x + lambda, with
/// eta(0) = lambda.
inline double eta(double lambda, double x) {
  if (!(lambda > 0)) throw std::domain_error("eta: lambda must be positive");
  if (x < 0) throw std::domain_error("eta: x must be nonnegative");
  if (x == 0) return lambda;
  return x * std::log(x / lambda) - x + lambda;
}

struct CriticalConstants {
  double c_prime;  // root of eta_2(x) = 1 in (0, 2)
  double c;        // root of eta_2(x) = 1 in (2, inf)
  double z_minus;  // c_prime / 2
  double z_plus;   // c / 2
};

namespace detail {

template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if ((fmid > 0) == (flo > 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline bool is_forbidden(Complex z) {
  if (z.imag() != 0.0 || z.real() > 0.0) return false;
  const double twice = 2.0 * z.real();
  return twice == std::round(twice);
}

inline void require_valid(Complex z) {
  if (is_forbidden(z)) throw std::domain_error("C_n(z) undefined: 2z is a nonpositive integer");
}

}  // namespace detail

inline CriticalConstants critical_constants(double tol = 1e-12) {
  if (!(tol > 0)) throw std::domain_error("critical_constants: tol must be positive");
  auto g = [](double x) { return eta(2.0, x) - 1.0; };
  // g(0) = 1 > 0, g(2) = -1 < 0 and g grows without bound past 2.
  double hi = 4.0;
  while (g(hi) < 0) hi *= 2;
  const double cp = detail::bisect(g, 0.0, 2.0, tol);
  const double c = detail::bisect(g, 2.0, hi, tol);
  return {cp, c, cp / 2, c / 2};
}

/// log Gamma on the complex plane (Lanczos, g = 7, nine terms) with
/// reflection for Re z < 1/2.
inline Complex log_gamma(Complex z) {
  static constexpr double kCoef[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                      771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double kPi = std::numbers::pi;
  if (z.real() < 0.5) return std::log(kPi) - std::log(std::sin(kPi * z)) - log_gamma(1.0 - z);
  z -= 1.0;
  Complex x = kCoef[0];
  for (int i = 1; i < 9; ++i) x += kCoef[i] / (z + static_cast<double>(i));
  const Complex t = z + 7.5;
  return 0.5 * std::log(2 * kPi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline Complex gamma_fn(Complex z) { return std::exp(log_gamma(z)); }

/// C_n(z) = prod_{k<n} (k + 2z)/(k + 1). Direct product up to n = 1000,
/// Gamma ratios beyond.
inline Complex c_n(Complex z, std::uint64_t n) {
  detail::require_valid(z);
  if (n <= 1000) {
    Complex p = 1.0;
    for (std::uint64_t k = 0; k < n; ++k) p *= (static_cast<double>(k) + 2.0 * z) / static_cast<double>(k + 1);
    return p;
  }
  const double m = static_cast<double>(n);
  return std::exp(log_gamma(m + 2.0 * z) - log_gamma(2.0 * z) - log_gamma(Complex(m + 1.0)));
}

inline double c_n(double z, std::uint64_t n) {
  detail::require_valid(z);
  if (n <= 1000) {
    double p = 1.0;
    for (std::uint64_t k = 0; k < n; ++k) p *= (static_cast<double>(k) + 2.0 * z) / static_cast<double>(k + 1);
    return p;
  }
  // Gamma(n+1)/Gamma(n+2z) without cancellation.
  const double ratio = boost::math::tgamma_delta_ratio(static_cast<double>(n) + 1.0, 2.0 * z - 1.0);
  return 1.0 / (boost::math::tgamma(2.0 * z) * ratio);
}

inline Rational c_n_exact(const Rational& z, std::uint64_t n) {
  if (z <= 0 && boost::multiprecision::denominator(Rational(2 * z)) == 1)
    throw std::domain_error("C_n(z) undefined: 2z is a nonpositive integer");
  Rational p = 1;
  for (std::uint64_t k = 0; k < n; ++k) p *= (Rational(k) + 2 * z) / Rational(k + 1);
  return p;
}

/// n^{2z-1} / Gamma(2z).
inline Complex c_n_asymptotic(Complex z, std::uint64_t n) {
  detail::require_valid(z);
  return std::exp((2.0 * z - 1.0) * std::log(static_cast<double>(n)) - log_gamma(2.0 * z));
}

namespace detail {

/// sum_k counts[k] z^k by Horner.
template <class Z>
Z profile_polynomial(const Profile& p, Z z) {
  Z acc = 0;
  for (std::size_t k = p.counts.size(); k-- > 0;) acc = acc * z + static_cast<double>(p.counts[k]);
  return acc;
}

/// sum_k k counts[k] z^{k-1}.
inline double profile_polynomial_derivative(const Profile& p, double z) {
  double acc = 0;
  for (std::size_t k = p.counts.size(); k-- > 1;) acc = acc * z + static_cast<double>(k * p.counts[k]);
  return acc;
}

}  // namespace detail

/// M_n(z) = sum over leaves z^{|u|} / C_n(z), where n = leaves - 1.
template <class Z>
Z bst_martingale(const Profile& p, Z z) {
  return detail::profile_polynomial(p, z) / c_n(z, p.leaves() - 1);
}

inline double bst_martingale(const BinaryTree& t, double z) { return bst_martingale(t.profile(), z); }
inline Complex bst_martingale(const BinaryTree& t, Complex z) { return bst_martingale(t.profile(), z); }

inline Rational bst_martingale_exact(const Profile& p, const Rational& z) {
  Rational acc = 0;
  for (std::size_t k = p.counts.size(); k-- > 0;) acc = acc * z + Rational(p.counts[k]);
  return acc / c_n_exact(z, p.leaves() - 1);
}

/// M(t, z) = sum over leaves z^{|u|} e^{t(1-2z)}.
template <class Z>
Z yule_martingale(const Profile& p, double t, Z z) {
  if (t < 0) throw std::domain_error("yule_martingale: negative time");
  return detail::profile_polynomial(p, z) * std::exp(t * (1.0 - 2.0 * z));
}

/// e^{tau_n (1-2z)} C_n(z).
template <class Z>
Z time_component(std::uint64_t n, double tau_n, Z z) {
  return std::exp(tau_n * (1.0 - 2.0 * z)) * c_n(z, n);
}

/// C'_n(z)/C_n(z) = sum_{j<n} 2/(j + 2z).
inline double c_n_log_derivative(std::uint64_t n, double z) {
  detail::require_valid(z);
  if (n <= 1000) {
    double s = 0;
    for (std::uint64_t j = 0; j < n; ++j) s += 2.0 / (static_cast<double>(j) + 2.0 * z);
    return s;
  }
  return 2.0 * (boost::math::digamma(static_cast<double>(n) + 2.0 * z) - boost::math::digamma(2.0 * z));
}

/// d/dz M_n(z).
inline double bst_derivative_martingale(const Profile& p, double z) {
  if (!(z > 0)) throw std::domain_error("bst_derivative_martingale: z must be positive");
  const std::uint64_t n = p.leaves() - 1;
  const double cn = c_n(z, n);
  return detail::profile_polynomial_derivative(p, z) / cn -
         c_n_log_derivative(n, z) * detail::profile_polynomial(p, z) / cn;
}

/// d/dz M(t, z) = sum over leaves (|u|/z - 2t) z^{|u|} e^{t(1-2z)}.
inline double yule_derivative_martingale(const Profile& p, double t, double z) {
  if (!(z > 0)) throw std::domain_error("yule_derivative_martingale: z must be positive");
  if (t < 0) throw std::domain_error("yule_derivative_martingale: negative time");
  const double scale = std::exp(t * (1.0 - 2.0 * z));
  return (detail::profile_polynomial_derivative(p, z) - 2.0 * t * detail::profile_polynomial(p, z)) * scale;
}

/// f(z, q) = 1 + q(2 Re z - 1) - 2|z|^q; z is in V_q iff f > 0.
inline double lq_region(Complex z, double q) {
  if (!(q > 1.0 && q <= 2.0)) throw std::domain_error("lq_region: q must lie in (1, 2]");
  return 1.0 + q * (2.0 * z.real() - 1.0) - 2.0 * std::pow(std::abs(z), q);
}

/// Endpoints of V_q on the positive real axis.
inline std::pair<double, double> lq_real_interval(double q, double tol = 1e-13) {
  auto f = [q](double x) { return lq_region(Complex(x, 0.0), q); };
  double hi = 1.0;
  while (f(hi) > 0) hi *= 2;
  return {detail::bisect(f, 0.0, 0.5, tol), detail::bisect(f, 0.5, hi, tol)};
}

/// xi^{2z-1} / Gamma(2z).
inline double limit_connection_factor(double xi, double z) {
  if (!(xi > 0)) throw std::domain_error("limit_connection_factor: xi must be positive");
  return std::exp((2.0 * z - 1.0) * std::log(xi) - std::lgamma(2.0 * z));
}

/// z (u^{2z-1} m0 + (1-u)^{2z-1} m1).
inline double splitting_map(double m0, double m1, double u, double z) {
  if (!(u > 0 && u < 1)) throw std::domain_error("splitting_map: u must lie in (0,1)");
  return z * (std::pow(u, 2 * z - 1) * m0 + std::pow(1 - u, 2 * z - 1) * m1);
}

/// The derivative splitting map; at z = 1, m = 1 it is the Quicksort map.
inline double derivative_splitting_map(double dm0, double dm1, double m0, double m1, double m, double u,
                                       double z) {
  if (!(u > 0 && u < 1)) throw std::domain_error("derivative_splitting_map: u must lie in (0,1)");
  if (!(z > 0)) throw std::domain_error("derivative_splitting_map: z must be positive");
  const double a = std::pow(u, 2 * z - 1), b = std::pow(1 - u, 2 * z - 1);
  return z * a * dm0 + z * b * dm1 + 2 * z * a * std::log(u) * m0 + 2 * z * b * std::log1p(-u) * m1 + m / z;
}

inline double harmonic(std::uint64_t n) {
  if (n <= 100000) {
    double s = 0;
    for (std::uint64_t k = n; k >= 1; --k) s += 1.0 / static_cast<double>(k);
    return s;
  }
  return boost::math::digamma(static_cast<double>(n) + 1.0) + std::numbers::egamma;
}

/// M'_n(1) = EPL/(n+1) - 2(H_{n+1} - 1).
inline double quicksort_functional(const Profile& p) {
  const std::uint64_t leaves = p.leaves();
  return static_cast<double>(p.path_length()) / static_cast<double>(leaves) - 2.0 * (harmonic(leaves) - 1.0);
}

inline double quicksort_functional(const BinaryTree& t) { return quicksort_functional(t.profile()); }

inline Rational quicksort_functional_exact(const Profile& p) {
  const std::uint64_t leaves = p.leaves();
  Rational h = 0;
  for (std::uint64_t k = 1; k <= leaves; ++k) h += Rational(BigInt(1), BigInt(k));
  return Rational(BigInt(p.path_length()), BigInt(leaves)) - 2 * (h - 1);
}

}  // namespace yulebst
