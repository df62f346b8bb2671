#pragma once

// Goodness-of-fit tests and reproducible replicate-parallel Monte Carlo.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "yulebst/rng.hpp"

namespace yulebst {

struct TestReport {
  std::string name;
  double statistic = 0;
  double p_value = 1;
  std::uint64_t sample_size = 0;
  double threshold = 0;
  bool pass = false;
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json j{{"name", name},           {"statistic", statistic}, {"p_value", p_value},
                     {"sample_size", sample_size}, {"threshold", threshold}, {"pass", pass}};
    if (!details.empty()) j["details"] = details;
    return j;
  }
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Asymptotic p-value with Stephens' effective-size correction.
inline double ks_p_value(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
}

/// One-sample KS. Passes when p > alpha.
inline TestReport ks_test(std::vector<double> sample, const std::function<double(double)>& cdf,
                          double alpha = 0.001) {
  if (sample.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  TestReport r{"ks", d, ks_p_value(d, n), sample.size(), alpha};
  r.pass = r.p_value > alpha;
  return r;
}

inline TestReport two_sample_ks(std::vector<double> a, std::vector<double> b, double alpha = 0.001) {
  if (a.empty() || b.empty()) throw std::invalid_argument("two_sample_ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  TestReport r{"two_sample_ks", d, ks_p_value(d, na * nb / (na + nb)), a.size() + b.size(), alpha};
  r.pass = r.p_value > alpha;
  return r;
}

/// KS distance between an integer-valued sample and N(mu, sigma^2) read on
/// the lattice with a half-unit continuity correction: sup_k |F_n(k) - Phi((k + 1/2 - mu)/sigma)|.
/// details carries the uncorrected distance as well.
inline TestReport lattice_normal_ks(std::vector<std::int64_t> sample, double mu, double sigma, double max_statistic) {
  if (sample.empty()) throw std::invalid_argument("lattice_normal_ks: empty sample");
  if (!(sigma > 0)) throw std::domain_error("lattice_normal_ks: sigma must be positive");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double corrected = 0, raw = 0;
  std::size_t below = 0;
  for (std::int64_t k = sample.front() - 1; k <= sample.back(); ++k) {
    const std::size_t before = below;
    while (below < sample.size() && sample[below] <= k) ++below;
    const double f_left = static_cast<double>(before) / n;
    const double f = static_cast<double>(below) / n;
    corrected = std::max(corrected, std::abs(f - normal_cdf((static_cast<double>(k) + 0.5 - mu) / sigma)));
    const double phi = normal_cdf((static_cast<double>(k) - mu) / sigma);
    raw = std::max({raw, std::abs(f - phi), std::abs(f_left - phi)});
  }
  TestReport r{"lattice_normal_ks", corrected, ks_p_value(corrected, n), sample.size(), max_statistic};
  r.pass = corrected < max_statistic;
  r.details = {{"mu", mu}, {"sigma", sigma}, {"raw_ks", raw}};
  return r;
}

/// Pearson chi-square. Adjacent cells are pooled, in the given order, until
/// every pooled cell has expected count >= min_expected.
inline TestReport chi_square(const std::vector<std::uint64_t>& observed, const std::vector<double>& probs,
                             double alpha = 0.001, double min_expected = 5.0) {
  if (observed.size() != probs.size()) throw std::invalid_argument("chi_square: size mismatch");
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  if (total == 0) throw std::invalid_argument("chi_square: no observations");
  const double mass = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(mass - 1.0) > 1e-6) throw std::invalid_argument("chi_square: probabilities do not sum to 1");
  std::vector<double> obs, expct;
  double o = 0, e = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0) throw std::invalid_argument("chi_square: negative probability");
    if (probs[i] == 0 && observed[i] > 0) {
      TestReport r{"chi_square", INFINITY, 0.0, static_cast<std::uint64_t>(total), alpha, false};
      r.details = {{"impossible_cell", i}};
      return r;
    }
    o += static_cast<double>(observed[i]);
    e += probs[i] * total;
    if (e >= min_expected) {
      obs.push_back(o);
      expct.push_back(e);
      o = e = 0;
    }
  }
  if (e > 0 || o > 0) {
    if (expct.empty()) throw std::invalid_argument("chi_square: fewer than two cells after pooling");
    obs.back() += o;
    expct.back() += e;
  }
  if (expct.size() < 2) throw std::invalid_argument("chi_square: fewer than two cells after pooling");
  double x = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) x += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
  const double df = static_cast<double>(obs.size() - 1);
  TestReport r{"chi_square", x, boost::math::gamma_q(df / 2, x / 2), static_cast<std::uint64_t>(total), alpha};
  r.pass = r.p_value > alpha;
  r.details = {{"cells", obs.size()}, {"df", df}};
  return r;
}

/// |mean - target| <= k standard errors.
inline TestReport mean_within_sigma(double mean, double stderr_, double target, std::uint64_t n, double k = 3.0) {
  const double z = stderr_ > 0 ? (mean - target) / stderr_ : (mean == target ? 0.0 : INFINITY);
  TestReport r{"mean_within_sigma", z, 2 * normal_cdf(-std::abs(z)), n, k};
  r.pass = std::abs(z) <= k;
  r.details = {{"mean", mean}, {"stderr", stderr_}, {"target", target}};
  return r;
}

struct ReplicateSpec {
  std::uint64_t seed = 1;
  std::uint64_t replicates = 1;
  unsigned threads = 1;
  std::uint64_t stream_offset = 0;  // separates independent pools under one seed
  std::uint64_t n = 0;
  double t = 0;
  double z = 1;
  double two_z = 1;

  Philox stream(std::uint64_t replicate) const { return Philox(seed, stream_offset + replicate); }
};

/// f(rng, i) for every replicate i; out[i] depends only on (seed, i).
template <class F>
auto replicate_map(const ReplicateSpec& spec, F&& f) {
  using T = std::invoke_result_t<F&, Philox&, std::uint64_t>;
  std::vector<std::optional<T>> slots(spec.replicates);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t i; (i = next.fetch_add(1)) < spec.replicates;) {
      Philox rng = spec.stream(i);
      slots[i].emplace(f(rng, i));
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(spec.replicates)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  std::vector<T> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct Estimate {
  double mean = 0;
  double variance = 0;
  double stderr_ = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  std::uint64_t n = 0;

  nlohmann::json to_json() const {
    return {{"mean", mean}, {"variance", variance}, {"stderr", stderr_}, {"ci95", {ci_lo, ci_hi}}, {"n", n}};
  }
};

inline Estimate summarize(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("summarize: need at least two values");
  Estimate e;
  e.n = xs.size();
  const double n = static_cast<double>(xs.size());
  for (double x : xs) e.mean += x;
  e.mean /= n;
  for (double x : xs) e.variance += (x - e.mean) * (x - e.mean);
  e.variance /= n - 1;
  e.stderr_ = std::sqrt(e.variance / n);
  e.ci_lo = e.mean - 1.959963984540054 * e.stderr_;
  e.ci_hi = e.mean + 1.959963984540054 * e.stderr_;
  return e;
}

template <class F>
Estimate monte_carlo(const ReplicateSpec& spec, F&& estimator) {
  if (spec.replicates < 2) throw std::invalid_argument("monte_carlo: need at least two replicates");
  return summarize(replicate_map(spec, std::forward<F>(estimator)));
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median: empty sample");
  const auto mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  return 0.5 * (*std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid)) + hi);
}

template <class T>
std::vector<std::uint64_t> tally(const std::vector<T>& values, std::size_t cells) {
  std::vector<std::uint64_t> counts(cells, 0);
  for (const auto& v : values) {
    const auto i = static_cast<std::size_t>(v);
    if (i >= cells) throw std::out_of_range("tally: value outside the cell range");
    ++counts[i];
  }
  return counts;
}

}  // namespace yulebst
