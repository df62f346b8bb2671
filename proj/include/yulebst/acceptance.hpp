#pragma once

// The acceptance suite. Every tolerance, sample size and seed lives in
// AcceptanceConfig; reports carry no timings so repeated runs are bytewise equal.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "yulebst/bst.hpp"
#include "yulebst/exact.hpp"
#include "yulebst/martingales.hpp"
#include "yulebst/rational.hpp"
#include "yulebst/rng.hpp"
#include "yulebst/stats.hpp"
#include "yulebst/tilted.hpp"
#include "yulebst/tree.hpp"
#include "yulebst/yule.hpp"

namespace yulebst {

struct AcceptanceConfig {
  std::uint64_t seed = 20240917;
  unsigned threads = 1;
  double alpha = 0.001;
  double sigma_band = 3.0;

  // 1
  double c_prime = 0.3733, c_prime_tol = 1e-3;
  double c = 4.31107, c_tol = 1e-4;
  double z_minus = 0.186, z_plus = 2.155, z_tol = 1e-3;
  double constants_seconds = 1.0;
  // 2
  std::size_t martingale_n_max = 8;
  double martingale_seconds = 60.0;
  // 3
  std::uint64_t connection_paths = 100;
  std::size_t connection_n = 10000;
  int connection_grid = 20;
  double connection_tol = 1e-10;
  // 4
  std::uint64_t shape_samples = 100000;
  std::size_t shape_n = 5;
  // 5
  std::size_t profile_enum_n = 8;
  std::size_t stirling_n = 500;
  std::size_t recurrence_n = 200;
  double recurrence_tol = 1e-10;
  // 6
  std::size_t profile_n_large = 100000, profile_n_small = 1000;
  std::uint64_t profile_replicates = 50;
  double profile_window_lo = 1.5, profile_window_hi = 2.5;
  double profile_sup_bound = 0.25;
  // 7
  std::uint64_t hwang_n = 10000;
  double hwang_tol = 0.05;
  // 8
  std::size_t quicksort_n = 10000;
  std::uint64_t quicksort_replicates = 10000;
  double quicksort_variance_tol = 0.05;
  double quicksort_fixed_point_alpha = 0.01;
  // 9
  std::vector<std::size_t> null_ladder{100, 1000, 10000, 100000};
  std::uint64_t null_replicates = 1000;
  double null_z = 2.5;
  // 10
  std::size_t depth_exact_n = 50;
  std::size_t depth_chi_n = 1000;
  std::uint64_t depth_chi_samples = 100000;
  std::uint64_t depth_chain_replicates = 10000;
  std::uint64_t depth_clt_n = 1000000;
  std::uint64_t depth_clt_samples = 100000;
  double depth_clt_tol = 0.02;
  // 11
  std::size_t tilt_enum_n = 5;
  std::vector<Rational> tilt_enum_two_z{Rational(BigInt(1), BigInt(2)), Rational(1), Rational(2), Rational(3)};
  std::size_t spine_chi_n = 1000;
  double spine_chi_two_z = 3.0;
  std::uint64_t spine_chain_replicates = 20000;
  std::uint64_t spine_skip_samples = 100000;
  std::uint64_t spine_lln_n = 1000000;
  double spine_lln_two_z = 1.0;
  std::uint64_t spine_lln_samples = 10000;
  double spine_lln_tol = 0.1;
  std::uint64_t spine_clt_n = 1000000;
  double spine_clt_two_z = 3.0;
  std::uint64_t spine_clt_samples = 10000;
  double spine_clt_tol = 0.02;
  std::size_t spine_ldp_n = 100000;
  std::vector<double> spine_ldp_two_z{0.5, 1.0, 2.0, 3.0};
  double spine_ldp_tol = 0.05;
  // 12
  double tilted_t = 1.0, tilted_two_z = 3.0;
  std::uint64_t tilted_paths = 100000;
  double tilted_gamma_t = 10.0;
  std::uint64_t tilted_gamma_samples = 10000;
  double tilted_gamma_tol = 0.03;
  // 13
  std::size_t xi_n = 10000;
  std::uint64_t xi_samples = 10000;
  double xi_tol = 0.02;
  double joint_t = 10.0;
  std::uint64_t joint_samples = 10000;
  // 14
  std::size_t tail_n = 100000;
  double tail_x = 3.0;
  std::uint64_t tail_replicates = 50;
  double tail_tol = 0.12;
  // 15
  std::vector<int> reproducibility_criteria{3, 4, 12};
  std::vector<unsigned> reproducibility_threads{1, 4};

  nlohmann::json to_json() const {
    return {{"seed", seed}, {"alpha", alpha}, {"sigma_band", sigma_band}};
  }
};

struct CriterionReport {
  int id = 0;
  std::string title;
  std::vector<TestReport> checks;

  bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"criterion", id}, {"title", title}, {"pass", pass()}, {"checks", nlohmann::json::array()}};
    for (const auto& c : checks) j["checks"].push_back(c.to_json());
    return j;
  }
};

enum class Suite { fast, all };

inline const std::set<int>& fast_criteria() {
  static const std::set<int> ids{1, 2, 5, 7};
  return ids;
}

namespace acceptance_detail {

inline TestReport bound_check(std::string name, double statistic, double threshold, std::uint64_t n = 0) {
  TestReport r{std::move(name), statistic, 0, n, threshold};
  r.pass = statistic <= threshold;
  r.p_value = r.pass ? 1 : 0;
  return r;
}

inline TestReport flag_check(std::string name, bool ok, nlohmann::json details = nlohmann::json::object()) {
  TestReport r{std::move(name), ok ? 0.0 : 1.0, ok ? 1.0 : 0.0, 0, 0};
  r.pass = ok;
  r.details = std::move(details);
  return r;
}

inline TestReport named(TestReport r, std::string name) {
  r.name = std::move(name);
  return r;
}

inline ReplicateSpec spec(const AcceptanceConfig& cfg, int criterion, int pool, std::uint64_t replicates) {
  ReplicateSpec s;
  s.seed = cfg.seed;
  s.replicates = replicates;
  s.threads = cfg.threads;
  s.stream_offset = (static_cast<std::uint64_t>(criterion) << 40) | (static_cast<std::uint64_t>(pool) << 32);
  return s;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::vector<double> shape_probabilities(const ShapeDistribution& law, std::vector<std::string>& codes) {
  std::vector<double> probs;
  for (const auto& [code, p] : law) {
    codes.push_back(code);
    probs.push_back(to_double(p));
  }
  return probs;
}

inline TestReport shape_chi_square(const std::vector<std::string>& sampled, const ShapeDistribution& law,
                                   double alpha) {
  std::vector<std::string> codes;
  const auto probs = shape_probabilities(law, codes);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < codes.size(); ++i) index[codes[i]] = i;
  std::vector<std::uint64_t> counts(codes.size(), 0);
  for (const auto& s : sampled) {
    const auto it = index.find(s);
    if (it == index.end()) return flag_check("chi_square", false, {{"unknown_shape", s}});
    ++counts[it->second];
  }
  return chi_square(counts, probs, alpha);
}

/// Integer samples against a pmf indexed by value; values past the end share
/// an overflow cell carrying the leftover mass.
inline TestReport pmf_chi_square(const std::vector<std::int64_t>& values, std::vector<double> pmf, double alpha) {
  double mass = 0;
  for (double p : pmf) mass += p;
  pmf.push_back(std::max(0.0, 1.0 - mass));
  std::vector<std::uint64_t> counts(pmf.size(), 0);
  for (auto v : values) {
    if (v < 0) return flag_check("chi_square", false, {{"negative_value", v}});
    ++counts[std::min<std::size_t>(static_cast<std::size_t>(v), pmf.size() - 1)];
  }
  return chi_square(counts, pmf, alpha);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline std::vector<double> z_grid(double lo, double hi, int points) {
  std::vector<double> zs;
  for (int i = 1; i <= points; ++i) zs.push_back(lo + (hi - lo) * i / (points + 1));
  return zs;
}

template <class F>
double seconds_of(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace acceptance_detail

inline CriterionReport criterion_constants(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{1, "critical constants", {}};
  CriticalConstants k{};
  const double secs = seconds_of([&] { k = critical_constants(1e-12); });
  rep.checks.push_back(bound_check("c_prime", std::abs(k.c_prime - cfg.c_prime), cfg.c_prime_tol));
  rep.checks.push_back(bound_check("c", std::abs(k.c - cfg.c), cfg.c_tol));
  rep.checks.push_back(bound_check("z_minus", std::abs(k.z_minus - cfg.z_minus), cfg.z_tol));
  rep.checks.push_back(bound_check("z_plus", std::abs(k.z_plus - cfg.z_plus), cfg.z_tol));
  rep.checks.push_back(flag_check("runtime", secs < cfg.constants_seconds, {{"limit_seconds", cfg.constants_seconds}}));
  rep.checks[0].details = {{"c_prime", k.c_prime}, {"c", k.c}, {"z_minus", k.z_minus}, {"z_plus", k.z_plus}};
  return rep;
}

inline CriterionReport criterion_exact_martingale(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{2, "exact martingale property", {}};
  const std::vector<Rational> zs{rational(1, 3), rational(1, 2), rational(3, 4), rational(1), rational(3, 2)};
  ExactMartingaleReport r;
  const double secs = seconds_of([&] { r = check_martingale_property_exact(cfg.martingale_n_max, zs); });
  rep.checks.push_back(flag_check("exact_equality", r.failures == 0 && r.trees_checked > 0,
                                  {{"trees", r.trees_checked}, {"identities", r.identities_checked},
                                   {"failures", r.failures}}));
  rep.checks.push_back(flag_check("runtime", secs < cfg.martingale_seconds, {{"limit_seconds", cfg.martingale_seconds}}));
  return rep;
}

inline CriterionReport criterion_connection(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{3, "martingale connection", {}};
  const auto k = critical_constants(1e-12);
  const auto zs = z_grid(k.z_minus, k.z_plus, cfg.connection_grid);
  std::vector<std::size_t> checkpoints;
  for (std::size_t n = 0; n <= cfg.connection_n; n += (n < 100 ? 1 : 100)) checkpoints.push_back(n);
  const auto residuals = replicate_map(spec(cfg, 3, 0, cfg.connection_paths), [&](Philox& rng, std::uint64_t) {
    const YulePath path = yule_simulate(until_jumps(cfg.connection_n), rng);
    BinaryTree tree;
    double worst = 0;
    std::size_t next = 0;
    for (std::size_t n = 0; n <= cfg.connection_n; ++n) {
      if (n > 0) tree.split(path.splits()[n - 1]);
      if (next < checkpoints.size() && checkpoints[next] == n) {
        ++next;
        const double tau = path.jump_time(n);
        for (double z : zs) {
          const double lhs = yule_martingale(tree.profile(), tau, z);
          const double rhs = time_component(n, tau, z) * bst_martingale(tree.profile(), z);
          worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
        }
      }
    }
    return worst;
  });
  const double worst = *std::max_element(residuals.begin(), residuals.end());
  rep.checks.push_back(bound_check("max_relative_residual", worst, cfg.connection_tol, cfg.connection_paths));
  return rep;
}

inline CriterionReport criterion_embedding(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{4, "embedding: shape law at n = 5", {}};
  const auto law = enumerate_shape_distribution(cfg.shape_n);
  const auto yule = replicate_map(spec(cfg, 4, 0, cfg.shape_samples), [&](Philox& rng, std::uint64_t) {
    return yule_simulate(until_jumps(cfg.shape_n), rng).final_tree().preorder_code();
  });
  const auto chain = replicate_map(spec(cfg, 4, 1, cfg.shape_samples), [&](Philox& rng, std::uint64_t) {
    return bst_chain(cfg.shape_n, rng).tree.preorder_code();
  });
  const auto keys = replicate_map(spec(cfg, 4, 2, cfg.shape_samples), [&](Philox& rng, std::uint64_t) {
    return build_from_keys(KeySequence::uniform(cfg.shape_n, rng)).tree.preorder_code();
  });
  rep.checks.push_back(named(shape_chi_square(yule, law, cfg.alpha), "yule_jump_chain"));
  rep.checks.push_back(named(shape_chi_square(chain, law, cfg.alpha), "bst_step"));
  rep.checks.push_back(named(shape_chi_square(keys, law, cfg.alpha), "build_from_keys"));
  return rep;
}

inline CriterionReport criterion_exact_profile(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{5, "exact expected profile", {}};
  const StirlingTable table(std::max(cfg.stirling_n, cfg.recurrence_n));

  bool enum_ok = true;
  for (std::size_t n = 0; n <= cfg.profile_enum_n; ++n) {
    std::vector<Rational> avg(n + 1, Rational(0));
    for (const auto& [code, p] : enumerate_shape_distribution(n)) {
      const auto prof = BinaryTree::from_preorder(code).profile();
      for (std::size_t k = 0; k < prof.counts.size(); ++k) avg[k] += p * Rational(prof.counts[k]);
    }
    enum_ok = enum_ok && avg == expected_profile_exact(n, table);
  }
  rep.checks.push_back(flag_check("stirling_vs_enumeration", enum_ok, {{"n_max", cfg.profile_enum_n}}));

  bool identity_ok = true;
  for (std::size_t n = 0; n <= cfg.stirling_n; ++n) {
    BigInt sum = 0, pow2 = 1;
    for (const auto& c : table.row(n)) {
      sum += pow2 * c;
      pow2 <<= 1;
    }
    identity_ok = identity_ok && sum == factorial(n + 1);
  }
  rep.checks.push_back(flag_check("stirling_row_identity", identity_ok, {{"n_max", cfg.stirling_n}}));

  double worst = 0;
  for (std::size_t n = 0; n <= cfg.recurrence_n; ++n) {
    const auto exact = expected_profile_exact(n, table);
    const auto approx = expected_profile_recurrence(n, n);
    for (std::size_t k = 0; k <= n; ++k) {
      const double e = to_double(exact[k]);
      if (e < std::numeric_limits<double>::min()) continue;  // subnormal range
      worst = std::max(worst, std::abs(approx[k] - e) / e);
    }
  }
  rep.checks.push_back(bound_check("recurrence_relative_error", worst, cfg.recurrence_tol));
  return rep;
}

inline CriterionReport criterion_profile_theorem(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{6, "profile convergence", {}};
  auto statistic = [&](std::size_t n, int pool) {
    const double ln = std::log(static_cast<double>(n));
    const auto k_lo = static_cast<std::size_t>(std::ceil(cfg.profile_window_lo * ln));
    const auto k_hi = static_cast<std::size_t>(std::floor(cfg.profile_window_hi * ln));
    const auto expected = expected_profile_recurrence(n, k_hi);
    const auto sups = replicate_map(spec(cfg, 6, pool, cfg.profile_replicates), [&](Philox& rng, std::uint64_t) {
      ProfileChain chain;
      chain.reserve(n);
      chain.advance_to(n, rng);
      double sup = 0;
      for (std::size_t k = k_lo; k <= k_hi; ++k) {
        const double ratio = static_cast<double>(chain.profile().at(k)) / expected[k];
        const double m = bst_martingale(chain.profile(), static_cast<double>(k) / (2 * ln));
        sup = std::max(sup, std::abs(ratio - m));
      }
      return sup;
    });
    return median(sups);
  };
  const double large = statistic(cfg.profile_n_large, 0);
  const double small = statistic(cfg.profile_n_small, 1);
  auto a = bound_check("median_sup_large_n", large, cfg.profile_sup_bound, cfg.profile_replicates);
  a.details = {{"n", cfg.profile_n_large}};
  rep.checks.push_back(a);
  rep.checks.push_back(flag_check("decreases_from_small_n", large < small,
                                  {{"median_sup_small_n", small}, {"median_sup_large_n", large}}));
  return rep;
}

inline CriterionReport criterion_hwang(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{7, "Hwang estimate", {}};
  const double ln = std::log(static_cast<double>(cfg.hwang_n));
  const auto k = static_cast<std::uint64_t>(std::llround(2 * ln));
  const double oracle = expected_profile_recurrence(cfg.hwang_n, k)[k];
  const auto h = hwang_estimate(cfg.hwang_n, k);
  auto r = bound_check("relative_error", std::abs(h.form1 / oracle - 1), cfg.hwang_tol);
  r.details = {{"n", cfg.hwang_n}, {"k", k}, {"oracle", oracle}, {"estimate", h.form1},
               {"second_form", h.form2}, {"second_form_relative_error", std::abs(h.form2 / oracle - 1)}};
  rep.checks.push_back(r);
  return rep;
}

inline CriterionReport criterion_quicksort(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{8, "Quicksort fixed point", {}};
  const auto xs = replicate_map(spec(cfg, 8, 0, cfg.quicksort_replicates), [&](Philox& rng, std::uint64_t) {
    ProfileChain chain;
    chain.reserve(cfg.quicksort_n);
    chain.advance_to(cfg.quicksort_n, rng);
    return quicksort_functional(chain.profile());
  });
  const auto est = summarize(xs);
  rep.checks.push_back(named(mean_within_sigma(est.mean, est.stderr_, 0.0, est.n, cfg.sigma_band), "mean_zero"));
  const double target = quicksort_moments().second_moment;
  auto v = bound_check("variance_relative_error", std::abs(est.variance / target - 1), cfg.quicksort_variance_tol, est.n);
  v.details = {{"variance", est.variance}, {"target", target}};
  rep.checks.push_back(v);

  // reference: first half; map inputs: two disjoint quarters
  const std::size_t half = xs.size() / 2, quarter = half / 2;
  std::vector<double> reference(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(half));
  Philox urng = spec(cfg, 8, 1, 1).stream(0);
  std::vector<double> mapped;
  for (std::size_t i = 0; i < quarter; ++i) {
    const double u = uniform01(urng);
    mapped.push_back(derivative_splitting_map(xs[half + i], xs[half + quarter + i], 1, 1, 1, u, 1));
  }
  rep.checks.push_back(named(two_sample_ks(reference, mapped, cfg.quicksort_fixed_point_alpha), "fixed_point_ks"));
  return rep;
}

inline CriterionReport criterion_null_limits(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{9, "null limits and critical signs", {}};
  const double z_plus = critical_constants(1e-12).z_plus;
  const auto& ladder = cfg.null_ladder;
  struct Row {
    std::vector<double> m, dm;
  };
  const auto rows = replicate_map(spec(cfg, 9, 0, cfg.null_replicates), [&](Philox& rng, std::uint64_t) {
    Row row;
    ProfileChain chain;
    chain.reserve(ladder.back());
    for (auto n : ladder) {
      chain.advance_to(n, rng);
      row.m.push_back(bst_martingale(chain.profile(), cfg.null_z));
      row.dm.push_back(bst_derivative_martingale(chain.profile(), z_plus));
    }
    return row;
  });
  std::vector<double> medians, negative;
  for (std::size_t j = 0; j < ladder.size(); ++j) {
    std::vector<double> col;
    std::size_t neg = 0;
    for (const auto& r : rows) {
      col.push_back(r.m[j]);
      neg += r.dm[j] < 0;
    }
    medians.push_back(median(col));
    negative.push_back(static_cast<double>(neg) / static_cast<double>(rows.size()));
  }
  bool decreasing = true, nondecreasing = true;
  for (std::size_t j = 1; j < ladder.size(); ++j) {
    decreasing = decreasing && medians[j] < medians[j - 1];
    nondecreasing = nondecreasing && negative[j] >= negative[j - 1];
  }
  rep.checks.push_back(flag_check("median_M_decreasing", decreasing, {{"n", ladder}, {"median", medians}}));
  rep.checks.push_back(flag_check("negative_derivative_fraction_nondecreasing", nondecreasing,
                                  {{"n", ladder}, {"fraction", negative}}));
  return rep;
}

inline CriterionReport criterion_insertion_depth(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{10, "insertion depth", {}};
  bool exact_ok = true;
  for (std::size_t n = 1; n <= cfg.depth_exact_n; ++n) {
    auto pmf = insertion_depth_pmf(n);
    auto poly = c_n_polynomial_over_leaves(n);
    pmf.resize(std::max(pmf.size(), poly.size()), Rational(0));
    poly.resize(pmf.size(), Rational(0));
    exact_ok = exact_ok && pmf == poly;
  }
  rep.checks.push_back(flag_check("pmf_equals_polynomial", exact_ok, {{"n_max", cfg.depth_exact_n}}));

  // d_n has the law of s_n at 2z = 2
  const auto pmf = spine_depth_pmf(cfg.depth_chi_n, 2.0);
  const auto lazy = replicate_map(spec(cfg, 10, 0, cfg.depth_chi_samples), [&](Philox& rng, std::uint64_t) {
    return static_cast<std::int64_t>(sample_insertion_depth(cfg.depth_chi_n, rng));
  });
  rep.checks.push_back(named(pmf_chi_square(lazy, pmf, cfg.alpha), "key_bracketing_chi_square"));
  const auto chain = replicate_map(spec(cfg, 10, 1, cfg.depth_chain_replicates), [&](Philox& rng, std::uint64_t) {
    ProfileChain c;
    c.reserve(cfg.depth_chi_n + 1);
    c.advance_to(cfg.depth_chi_n, rng);
    return static_cast<std::int64_t>(c.step(rng));
  });
  rep.checks.push_back(named(pmf_chi_square(chain, pmf, cfg.alpha), "chain_chi_square"));

  const auto [mu, var] = spine_depth_moments(cfg.depth_clt_n, 2.0);
  const auto big = replicate_map(spec(cfg, 10, 2, cfg.depth_clt_samples), [&](Philox& rng, std::uint64_t) {
    return static_cast<std::int64_t>(sample_insertion_depth(cfg.depth_clt_n, rng));
  });
  rep.checks.push_back(named(lattice_normal_ks(big, mu, std::sqrt(var), cfg.depth_clt_tol), "clt_ks"));
  return rep;
}

inline CriterionReport criterion_spine(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{11, "spine and tilting", {}};

  bool exact_ok = true;
  std::size_t identities = 0;
  const std::vector<std::pair<std::string, MarkedStatistic>> stats{
      {"one", [](const MarkedTree&) { return Rational(1); }},
      {"spine_depth", [](const MarkedTree& m) { return Rational(m.spine_depth()); }},
      {"spine_depth_squared", [](const MarkedTree& m) { return Rational(m.spine_depth() * m.spine_depth()); }},
      {"height", [](const MarkedTree& m) { return Rational(m.tree.profile().max_depth()); }},
      {"leftmost_spine", [](const MarkedTree& m) { return Rational(m.spine.bits() == 0 ? 1 : 0); }},
      {"leaves_at_depth_2", [](const MarkedTree& m) { return Rational(m.tree.profile().at(2)); }},
  };
  for (std::size_t n = 0; n <= cfg.tilt_enum_n; ++n)
    for (const auto& two_z : cfg.tilt_enum_two_z)
      for (const auto& [name, f] : stats) {
        const auto [biased, reweighted] = change_of_measure_check(n, two_z, f);
        exact_ok = exact_ok && biased == reweighted;
        ++identities;
      }
  rep.checks.push_back(flag_check("change_of_measure_exact", exact_ok, {{"identities", identities}}));

  const auto pmf = spine_depth_pmf(cfg.spine_chi_n, cfg.spine_chi_two_z);
  const TiltParameter tilt(cfg.spine_chi_two_z);
  const auto chain = replicate_map(spec(cfg, 11, 0, cfg.spine_chain_replicates), [&](Philox& rng, std::uint64_t) {
    return static_cast<std::int64_t>(biased_bst(cfg.spine_chi_n, tilt, rng).spine_depth());
  });
  rep.checks.push_back(named(pmf_chi_square(chain, pmf, cfg.alpha), "biased_chain_chi_square"));
  const auto skip = replicate_map(spec(cfg, 11, 1, cfg.spine_skip_samples), [&](Philox& rng, std::uint64_t) {
    return static_cast<std::int64_t>(sample_spine_depth(cfg.spine_chi_n, tilt, rng));
  });
  rep.checks.push_back(named(pmf_chi_square(skip, pmf, cfg.alpha), "skip_ahead_chi_square"));

  {
    const TiltParameter t(cfg.spine_lln_two_z);
    const auto s = replicate_map(spec(cfg, 11, 2, cfg.spine_lln_samples), [&](Philox& rng, std::uint64_t) {
      return static_cast<double>(sample_spine_depth(cfg.spine_lln_n, t, rng));
    });
    const double ln = std::log(static_cast<double>(cfg.spine_lln_n));
    const double lln = summarize(s).mean / ln;
    const double exact = spine_depth_moments(cfg.spine_lln_n, cfg.spine_lln_two_z).first / ln;
    auto r = bound_check("lln", std::abs(lln - exact), cfg.spine_lln_tol, s.size());
    r.details = {{"lln", lln}, {"exact_mean_over_log_n", exact}, {"two_z", cfg.spine_lln_two_z}};
    rep.checks.push_back(r);
  }
  {
    const TiltParameter t(cfg.spine_clt_two_z);
    const auto s = replicate_map(spec(cfg, 11, 3, cfg.spine_clt_samples), [&](Philox& rng, std::uint64_t) {
      return static_cast<std::int64_t>(sample_spine_depth(cfg.spine_clt_n, t, rng));
    });
    const auto [mu, var] = spine_depth_moments(cfg.spine_clt_n, cfg.spine_clt_two_z);
    rep.checks.push_back(named(lattice_normal_ks(s, mu, std::sqrt(var), cfg.spine_clt_tol), "clt_ks"));
  }
  const double ln = std::log(static_cast<double>(cfg.spine_ldp_n));
  for (double two_z : cfg.spine_ldp_two_z) {
    const auto law = spine_depth_pmf(cfg.spine_ldp_n, two_z);
    const double a = 2 * two_z;
    const auto from = static_cast<std::size_t>(std::ceil(a * ln));
    double tail = 0;
    for (std::size_t k = law.size(); k-- > from;) tail += law[k];
    const double rate = -std::log(tail) / ln;
    auto r = bound_check("ldp_two_z_" + std::to_string(two_z).substr(0, 3), std::abs(rate - eta(two_z, a)),
                         cfg.spine_ldp_tol);
    r.details = {{"a", a}, {"exact_rate", rate}, {"eta", eta(two_z, a)}};
    rep.checks.push_back(r);
  }
  return rep;
}

inline CriterionReport criterion_tilted_leaf_count(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{12, "tilted leaf count law", {}};
  const TiltParameter tilt(cfg.tilted_two_z);
  const auto counts = replicate_map(spec(cfg, 12, 0, cfg.tilted_paths), [&](Philox& rng, std::uint64_t) {
    const auto p = biased_yule_simulate(tilt, until_time(cfg.tilted_t), rng);
    return static_cast<std::int64_t>(p.path.leaves_at(cfg.tilted_t)) - 1;
  });
  std::vector<double> pmf;
  for (std::uint64_t k = 0; k < 400; ++k) pmf.push_back(tilted_leaf_count_pmf(cfg.tilted_t, cfg.tilted_two_z, k));
  rep.checks.push_back(named(pmf_chi_square(counts, pmf, cfg.alpha), "negative_binomial_chi_square"));

  const auto scaled = replicate_map(spec(cfg, 12, 1, cfg.tilted_gamma_samples), [&](Philox& rng, std::uint64_t) {
    return static_cast<double>(biased_yule_leaf_count(tilt, cfg.tilted_gamma_t, rng)) * std::exp(-cfg.tilted_gamma_t);
  });
  auto ks = ks_test(scaled, [&](double x) { return x <= 0 ? 0.0 : boost::math::gamma_p(cfg.tilted_two_z, x); });
  ks.name = "gamma_limit_ks";
  ks.threshold = cfg.tilted_gamma_tol;
  ks.pass = ks.statistic < cfg.tilted_gamma_tol;
  rep.checks.push_back(ks);
  return rep;
}

inline CriterionReport criterion_xi(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{13, "xi and joint limit", {}};
  const auto xi = replicate_map(spec(cfg, 13, 0, cfg.xi_samples), [&](Philox& rng, std::uint64_t) {
    return static_cast<double>(cfg.xi_n) * std::exp(-sample_jump_time(cfg.xi_n, rng));
  });
  auto ks = ks_test(xi, [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); });
  ks.name = "xi_exponential_ks";
  ks.threshold = cfg.xi_tol;
  ks.pass = ks.statistic < cfg.xi_tol;
  rep.checks.push_back(ks);

  // N_t from the holding times, then d(t) from the independent jump chain.
  const double t = cfg.joint_t;
  struct Pair {
    double scaled, depth;
  };
  const auto pairs = replicate_map(spec(cfg, 13, 1, cfg.joint_samples), [&](Philox& rng, std::uint64_t) {
    std::uint64_t leaves = 1;
    for (double now = exponential(rng, 1.0); now <= t; now += exponential(rng, static_cast<double>(leaves)))
      ++leaves;
    const int d = sample_insertion_depth(leaves - 1, rng);
    return Pair{static_cast<double>(leaves) * std::exp(-t), (d - 2 * t) / std::sqrt(2 * t)};
  });
  std::vector<double> x, y;
  for (const auto& p : pairs) x.push_back(p.scaled), y.push_back(p.depth);
  const double r = pearson(x, y);
  const double z = r * std::sqrt(static_cast<double>(pairs.size()));
  TestReport c{"independence_correlation", std::abs(z), 2 * normal_cdf(-std::abs(z)), pairs.size(), cfg.sigma_band};
  c.pass = std::abs(z) <= cfg.sigma_band;
  c.details = {{"pearson_r", r}, {"t", t}};
  rep.checks.push_back(c);
  return rep;
}

inline CriterionReport criterion_tail_rate(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{14, "profile tail rate", {}};
  const double ln = std::log(static_cast<double>(cfg.tail_n));
  const auto from = static_cast<std::size_t>(std::floor(cfg.tail_x * ln)) + 1;
  const auto rates = replicate_map(spec(cfg, 14, 0, cfg.tail_replicates), [&](Philox& rng, std::uint64_t) {
    ProfileChain chain;
    chain.reserve(cfg.tail_n);
    chain.advance_to(cfg.tail_n, rng);
    std::uint64_t tail = 0;
    for (std::size_t k = from; k < chain.profile().counts.size(); ++k) tail += chain.profile().counts[k];
    return std::log(static_cast<double>(tail)) / ln;
  });
  double mean = 0;
  for (double r : rates) mean += r;
  mean /= static_cast<double>(rates.size());
  const double target = 1 - eta(2.0, cfg.tail_x);
  auto r = bound_check("tail_rate", std::abs(mean - target), cfg.tail_tol, rates.size());
  r.details = {{"mean_rate", mean}, {"target", target}};
  rep.checks.push_back(r);
  return rep;
}

inline CriterionReport run_criterion(int id, const AcceptanceConfig& cfg);

inline CriterionReport criterion_reproducibility(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  CriterionReport rep{15, "reproducibility", {}};
  for (int id : cfg.reproducibility_criteria) {
    std::vector<std::string> dumps;
    for (unsigned threads : cfg.reproducibility_threads) {
      AcceptanceConfig c = cfg;
      c.threads = threads;
      dumps.push_back(run_criterion(id, c).to_json().dump());
    }
    const bool same = std::all_of(dumps.begin(), dumps.end(), [&](const auto& d) { return d == dumps.front(); });
    rep.checks.push_back(flag_check("criterion_" + std::to_string(id) + "_bitwise", same,
                                    {{"threads", cfg.reproducibility_threads}}));
  }
  return rep;
}

inline CriterionReport run_criterion(int id, const AcceptanceConfig& cfg) {
  switch (id) {
    case 1: return criterion_constants(cfg);
    case 2: return criterion_exact_martingale(cfg);
    case 3: return criterion_connection(cfg);
    case 4: return criterion_embedding(cfg);
    case 5: return criterion_exact_profile(cfg);
    case 6: return criterion_profile_theorem(cfg);
    case 7: return criterion_hwang(cfg);
    case 8: return criterion_quicksort(cfg);
    case 9: return criterion_null_limits(cfg);
    case 10: return criterion_insertion_depth(cfg);
    case 11: return criterion_spine(cfg);
    case 12: return criterion_tilted_leaf_count(cfg);
    case 13: return criterion_xi(cfg);
    case 14: return criterion_tail_rate(cfg);
    case 15: return criterion_reproducibility(cfg);
    default: throw std::out_of_range("no acceptance criterion " + std::to_string(id));
  }
}

/// Tests that must reject deliberately corrupted models.
inline std::vector<TestReport> negative_controls(const AcceptanceConfig& cfg) {
  using namespace acceptance_detail;
  std::vector<TestReport> out;
  auto control = [&](std::string name, TestReport r) {
    r.name = std::move(name);
    r.pass = !r.pass;
    out.push_back(std::move(r));
  };
  // leaf weights off by one: the first leaf slot counts twice
  const auto law = enumerate_shape_distribution(cfg.shape_n);
  const auto skewed = replicate_map(spec(cfg, 16, 0, cfg.shape_samples), [&](Philox& rng, std::uint64_t) {
    BinaryTree t;
    for (std::size_t n = 0; n < cfg.shape_n; ++n) {
      const auto slot = uniform_index(rng, t.leaf_count() + 1);
      t.split_slot(slot == t.leaf_count() ? 0 : slot);
    }
    return t.preorder_code();
  });
  control("off_by_one_leaf_weights", shape_chi_square(skewed, law, cfg.alpha));

  const auto pmf = spine_depth_pmf(cfg.spine_chi_n, cfg.spine_chi_two_z);
  const TiltParameter wrong(cfg.spine_chi_two_z * 1.1);
  const auto s = replicate_map(spec(cfg, 16, 1, cfg.spine_skip_samples), [&](Philox& rng, std::uint64_t) {
    return static_cast<std::int64_t>(sample_spine_depth(cfg.spine_chi_n, wrong, rng));
  });
  control("wrong_tilt_spine_depth", pmf_chi_square(s, pmf, cfg.alpha));

  const auto e = replicate_map(spec(cfg, 16, 2, 10000), [&](Philox& rng, std::uint64_t) { return exponential(rng, 1.0); });
  control("exponential_vs_uniform", ks_test(e, [](double x) { return std::clamp(x, 0.0, 1.0); }, cfg.alpha));

  const auto tau = replicate_map(spec(cfg, 16, 3, 10000), [&](Philox& rng, std::uint64_t) {
    double t = 0;
    for (std::size_t k = 1; k <= 100; ++k) t += exponential(rng, static_cast<double>(k + 1));
    return 100.0 * std::exp(-t);
  });
  control("shifted_holding_rates_xi", ks_test(tau, [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); }, cfg.alpha));
  return out;
}

inline std::vector<CriterionReport> run_acceptance(
    const AcceptanceConfig& cfg, Suite suite,
    const std::function<void(const CriterionReport&, double)>& on_done = {}) {
  std::vector<CriterionReport> out;
  for (int id = 1; id <= 15; ++id) {
    if (suite == Suite::fast && !fast_criteria().contains(id)) continue;
    CriterionReport r;
    const double secs = acceptance_detail::seconds_of([&] { r = run_criterion(id, cfg); });
    if (on_done) on_done(r, secs);
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::json acceptance_json(const AcceptanceConfig& cfg, Suite suite, const std::vector<CriterionReport>& reps,
                                      const std::vector<TestReport>& controls = {}) {
  nlohmann::json j{{"config", cfg.to_json()}, {"suite", suite == Suite::fast ? "fast" : "all"}};
  j["criteria"] = nlohmann::json::array();
  bool all = true;
  for (const auto& r : reps) {
    j["criteria"].push_back(r.to_json());
    all = all && r.pass();
  }
  if (!controls.empty()) {
    j["negative_controls"] = nlohmann::json::array();
    for (const auto& c : controls) {
      j["negative_controls"].push_back(c.to_json());
      all = all && c.pass;
    }
  }
  j["pass"] = all;
  return j;
}

}  // namespace yulebst
