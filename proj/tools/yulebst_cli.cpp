#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_config.hpp"
#include "yulebst/acceptance.hpp"
#include "yulebst/yulebst.hpp"

using namespace yulebst;
using cli::RunConfig;
using nlohmann::json;

namespace {

struct Sink {
  std::unique_ptr<std::ofstream> file;
  std::ostream* os = &std::cout;

  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file = std::make_unique<std::ofstream>(path);
    if (!*file) throw std::runtime_error("cannot open " + path);
    os = file.get();
  }
  std::ostream& operator*() { return *os; }
};

void emit_json(const RunConfig& cfg, json body) {
  Sink out(cfg.output);
  body["config"] = cfg.to_json();
  *out << body.dump(2) << '\n';
}

ReplicateSpec replicate_spec(const RunConfig& cfg) {
  ReplicateSpec s;
  s.seed = cfg.seed;
  s.replicates = cfg.replicates;
  s.threads = cfg.threads;
  s.n = cfg.n;
  s.t = cfg.t;
  s.two_z = cfg.two_z;
  return s;
}

int cmd_constants(const RunConfig& cfg) {
  const auto k = critical_constants(1e-12);
  json body{{"c_prime", k.c_prime}, {"c", k.c}, {"z_minus", k.z_minus}, {"z_plus", k.z_plus}};
  body["eta_2"] = json::array();
  for (double x = 0; x <= 6.0001; x += 0.5) body["eta_2"].push_back({{"x", x}, {"eta", eta(2.0, x)}});
  body["intervals"] = json::array();
  body["region"] = json::array();
  const auto qs = cli::parse_list(cfg.q);
  for (double q : qs) {
    const auto [lo, hi] = lq_real_interval(q);
    body["intervals"].push_back({{"q", q}, {"z_lo", lo}, {"z_hi", hi}, {"two_z_lo", 2 * lo}, {"two_z_hi", 2 * hi}});
  }
  const std::vector<double> zs = cli::is_complex(cfg.z) ? std::vector<double>{} : cli::parse_grid(cfg.z);
  std::vector<Complex> points;
  if (cli::is_complex(cfg.z)) points.push_back(cli::parse_complex(cfg.z));
  for (double z : zs) points.emplace_back(z, 0.0);
  for (double q : qs)
    for (auto z : points)
      body["region"].push_back({{"z_re", z.real()}, {"z_im", z.imag()}, {"q", q}, {"f", lq_region(z, q)}});

  if (cfg.format == "json") {
    emit_json(cfg, body);
    return 0;
  }
  Sink out(cfg.output);
  cfg.write_header(*out);
  std::ostream& os = *out;
  os.precision(10);
  os << "c_prime," << k.c_prime << "\nc," << k.c << "\nz_minus," << k.z_minus << "\nz_plus," << k.z_plus << '\n';
  os << "\nq,z_lo,z_hi,two_z_lo,two_z_hi\n";
  for (const auto& r : body["intervals"])
    os << r["q"].get<double>() << ',' << r["z_lo"].get<double>() << ',' << r["z_hi"].get<double>() << ','
       << r["two_z_lo"].get<double>() << ',' << r["two_z_hi"].get<double>() << '\n';
  os << "\nz_re,z_im,q,f\n";
  for (const auto& r : body["region"])
    os << r["z_re"].get<double>() << ',' << r["z_im"].get<double>() << ',' << r["q"].get<double>() << ','
       << r["f"].get<double>() << '\n';
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  Philox rng(cfg.seed, 0);
  Sink out(cfg.output);
  std::ostream& os = *out;
  os.precision(12);
  if (cfg.kind == "bst") {
    const auto rows = bst_trajectory(cfg.n, rng);
    if (cfg.format == "json") {
      json body{{"rows", json::array()}};
      for (const auto& r : rows) body["rows"].push_back({r.n, r.insertion_depth, r.saturation, r.height});
      body["config"] = cfg.to_json();
      os << body.dump(2) << '\n';
    } else {
      cfg.write_header(os);
      write_trajectory_csv(os, rows);
    }
  } else if (cfg.kind == "yule") {
    const YulePath path = yule_simulate(cfg.t_given ? until_time(cfg.t) : until_leaves(cfg.n), rng);
    const std::size_t n = cfg.t_given ? path.leaves_at(cfg.t) - 1 : path.jumps();
    const double xi = xi_estimate(path, n);
    if (cfg.format == "json") {
      json body{{"jumps", n}, {"leaves", n + 1}, {"tau_n", path.jump_time(n)}, {"xi_estimate", xi},
                {"config", cfg.to_json()}};
      os << body.dump(2) << '\n';
    } else {
      cfg.write_header(os);
      os << "# xi_estimate=" << xi << '\n';
      os << "n,tau_n\n";
      for (std::size_t i = 0; i <= n; ++i) os << i << ',' << path.jump_time(i) << '\n';
    }
    std::cerr << "n e^{-tau_n} = " << xi << " at n = " << n << '\n';
  } else {
    const TiltParameter tilt(cfg.two_z);
    MarkedTree state;
    std::vector<int> trace{0};
    for (std::uint64_t i = 0; i < cfg.n; ++i) {
      biased_bst_step(state, tilt, rng);
      trace.push_back(state.spine_depth());
    }
    if (cfg.format == "json") {
      os << json{{"s_n", trace}, {"spine", state.spine.to_string()}, {"config", cfg.to_json()}}.dump(2) << '\n';
    } else {
      cfg.write_header(os);
      os << "n,s_n\n";
      for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << trace[i] << '\n';
    }
  }
  return 0;
}

int cmd_profile(const RunConfig& cfg) {
  Philox rng(cfg.seed, 0);
  ProfileChain chain;
  chain.reserve(cfg.n);
  chain.advance_to(cfg.n, rng);
  const auto& p = chain.profile();
  const std::size_t k_max = p.counts.size() - 1;
  std::vector<double> expected;
  if (cfg.n <= 200) {
    for (const auto& e : expected_profile_exact(cfg.n)) expected.push_back(e.convert_to<double>());
  } else {
    expected = expected_profile_recurrence(cfg.n, k_max);
  }
  expected.resize(std::max(expected.size(), k_max + 1), 0.0);
  const double ln = std::log(static_cast<double>(cfg.n));
  struct Row {
    std::size_t k;
    std::uint64_t u;
    double e, ratio, m;
  };
  std::vector<Row> rows;
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double z = static_cast<double>(k) / (2 * ln);
    const double m = (cfg.n >= 2 && k > 0) ? bst_martingale(p, z) : NAN;
    rows.push_back({k, p.at(k), expected[k], expected[k] > 0 ? static_cast<double>(p.at(k)) / expected[k] : NAN, m});
  }
  Sink out(cfg.output);
  std::ostream& os = *out;
  os.precision(12);
  if (cfg.format == "json") {
    json body{{"n", cfg.n}, {"leaves", p.leaves()}, {"rows", json::array()}, {"config", cfg.to_json()}};
    for (const auto& r : rows) body["rows"].push_back({{"k", r.k}, {"U_k", r.u}, {"EU_k", r.e}, {"ratio", r.ratio}, {"M_n", r.m}});
    os << body.dump(2) << '\n';
  } else {
    cfg.write_header(os);
    os << "k,U_k,EU_k,ratio,M_n_at_k_over_2logn\n";
    for (const auto& r : rows) os << r.k << ',' << r.u << ',' << r.e << ',' << r.ratio << ',' << r.m << '\n';
  }
  return 0;
}

int cmd_martingale(const RunConfig& cfg) {
  std::vector<Complex> zs;
  if (cli::is_complex(cfg.z)) {
    zs.push_back(cli::parse_complex(cfg.z));
  } else {
    for (double z : cli::parse_grid(cfg.z)) zs.emplace_back(z, 0.0);
  }
  const std::size_t stride = std::max<std::size_t>(1, cfg.n / 100);
  Sink out(cfg.output);
  std::ostream& os = *out;
  os.precision(12);
  json rows = json::array();
  if (cfg.format == "csv") {
    cfg.write_header(os);
    os << "replicate,n,tau_n,z_re,z_im,M_n_re,M_n_im,M_tau_re,M_tau_im,time_component_re,time_component_im,dM_n\n";
  }
  for (std::uint64_t rep = 0; rep < cfg.replicates; ++rep) {
    Philox rng(cfg.seed, rep);
    const YulePath path = yule_simulate(until_jumps(cfg.n), rng);
    BinaryTree tree;
    for (std::size_t n = 0; n <= cfg.n; ++n) {
      if (n > 0) tree.split(path.splits()[n - 1]);
      if (n % stride != 0 && n != cfg.n) continue;
      const double tau = path.jump_time(n);
      for (auto z : zs) {
        const Complex m = bst_martingale(tree.profile(), z);
        const Complex mt = yule_martingale(tree.profile(), tau, z);
        const Complex tc = time_component(n, tau, z);
        const double dm = (z.imag() == 0 && z.real() > 0) ? bst_derivative_martingale(tree.profile(), z.real()) : NAN;
        if (cfg.format == "csv") {
          os << rep << ',' << n << ',' << tau << ',' << z.real() << ',' << z.imag() << ',' << m.real() << ','
             << m.imag() << ',' << mt.real() << ',' << mt.imag() << ',' << tc.real() << ',' << tc.imag() << ','
             << dm << '\n';
        } else {
          rows.push_back({{"replicate", rep}, {"n", n}, {"tau_n", tau}, {"z", {z.real(), z.imag()}},
                          {"M_n", {m.real(), m.imag()}}, {"M_tau", {mt.real(), mt.imag()}},
                          {"time_component", {tc.real(), tc.imag()}}, {"dM_n", dm}});
        }
      }
    }
  }
  if (cfg.format == "json") os << json{{"rows", rows}, {"config", cfg.to_json()}}.dump(2) << '\n';
  return 0;
}

int cmd_quicksort(const RunConfig& cfg) {
  const auto xs = replicate_map(replicate_spec(cfg), [&](Philox& rng, std::uint64_t) {
    ProfileChain chain;
    chain.reserve(cfg.n);
    chain.advance_to(cfg.n, rng);
    return quicksort_functional(chain.profile());
  });
  const auto moments = quicksort_moments();
  json summary{{"n", cfg.n}, {"replicates", xs.size()}, {"limit_second_moment", moments.second_moment}};
  if (xs.size() >= 2) summary["estimate"] = summarize(xs).to_json();
  Sink out(cfg.output);
  std::ostream& os = *out;
  os.precision(12);
  if (cfg.format == "json") {
    summary["samples"] = xs;
    summary["config"] = cfg.to_json();
    os << summary.dump(2) << '\n';
  } else {
    cfg.write_header(os);
    os << "# summary=" << summary.dump() << '\n';
    os << "replicate,dM_n_1\n";
    for (std::size_t i = 0; i < xs.size(); ++i) os << i << ',' << xs[i] << '\n';
  }
  return 0;
}

int cmd_spine(const RunConfig& cfg) {
  const TiltParameter tilt(cfg.two_z);
  const auto samples = replicate_map(replicate_spec(cfg), [&](Philox& rng, std::uint64_t) {
    return static_cast<std::int64_t>(sample_spine_depth(cfg.n, tilt, rng));
  });
  Sink out(cfg.output);
  std::ostream& os = *out;
  os.precision(12);
  if (cfg.format == "csv") {
    cfg.write_header(os);
    os << "replicate,n,s_n\n";
    for (std::size_t i = 0; i < samples.size(); ++i) os << i << ',' << cfg.n << ',' << samples[i] << '\n';
    return 0;
  }
  const auto [mu, var] = spine_depth_moments(cfg.n, cfg.two_z);
  const double ln = std::log(static_cast<double>(std::max<std::uint64_t>(cfg.n, 2)));
  json body{{"n", cfg.n}, {"two_z", cfg.two_z}, {"exact_mean", mu}, {"exact_variance", var}};
  double mean = 0;
  for (auto s : samples) mean += static_cast<double>(s);
  mean /= static_cast<double>(samples.size());
  body["lln"] = mean / ln;
  body["exact_lln"] = mu / ln;
  if (var > 0) body["clt"] = lattice_normal_ks(samples, mu, std::sqrt(var), 0.02).to_json();
  if (cfg.n <= 10000000) {
    const auto law = spine_depth_pmf(cfg.n, cfg.two_z);
    std::vector<double> tail(law.size() + 1, 0.0);
    for (std::size_t k = law.size(); k-- > 0;) tail[k] = tail[k + 1] + law[k];
    body["ldp_curve"] = json::array();
    for (double a = cfg.two_z * 1.25; a <= cfg.two_z * 4 + 1e-9; a += cfg.two_z * 0.25) {
      const auto from = static_cast<std::size_t>(std::ceil(a * ln));
      if (from >= tail.size() || tail[from] <= 0) break;
      body["ldp_curve"].push_back({{"a", a}, {"rate", -std::log(tail[from]) / ln}, {"eta", eta(cfg.two_z, a)}});
    }
  }
  body["config"] = cfg.to_json();
  os << body.dump(2) << '\n';
  return 0;
}

int cmd_tilted(const RunConfig& cfg) {
  const TiltParameter tilt(cfg.two_z);
  const auto counts = replicate_map(replicate_spec(cfg), [&](Philox& rng, std::uint64_t) {
    return biased_yule_leaf_count(tilt, cfg.t, rng);
  });
  std::uint64_t top = 0;
  double mean = 0;
  for (auto c : counts) {
    top = std::max(top, c);
    mean += std::exp(-cfg.t) * (static_cast<double>(c) - 1 + cfg.two_z);
  }
  mean /= static_cast<double>(counts.size());
  Sink out(cfg.output);
  std::ostream& os = *out;
  os.precision(12);
  if (cfg.format == "json") {
    os << json{{"t", cfg.t}, {"two_z", cfg.two_z}, {"N_t", counts}, {"tilted_martingale_mean", mean},
               {"config", cfg.to_json()}}.dump(2)
       << '\n';
    return 0;
  }
  cfg.write_header(os);
  os << "# tilted_martingale_mean=" << mean << '\n';
  os << "N_t_minus_1,observed,expected\n";
  std::vector<std::uint64_t> hist(top, 0);
  for (auto c : counts) ++hist[c - 1];
  for (std::uint64_t k = 0; k < top; ++k)
    os << k << ',' << hist[k] << ',' << tilted_leaf_count_pmf(cfg.t, cfg.two_z, k) * static_cast<double>(counts.size())
       << '\n';
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  AcceptanceConfig ac;
  ac.seed = cfg.seed;
  ac.threads = cfg.threads;
  const auto suite = cfg.suite == "all" ? Suite::all : Suite::fast;
  const auto reps = run_acceptance(ac, suite, [](const CriterionReport& r, double secs) {
    std::fprintf(stderr, "[%s] criterion %2d  %-34s %8.2f s\n", r.pass() ? "PASS" : "FAIL", r.id, r.title.c_str(), secs);
  });
  auto report = acceptance_json(ac, suite, reps);
  report["run_config"] = cfg.to_json();
  Sink out(cfg.output);
  *out << report.dump(2) << '\n';
  return report["pass"].get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random binary search trees in the Yule process"};
  RunConfig cfg;
  cli::build_app(app, cfg);
  CLI11_PARSE(app, argc, argv);
  try {
    cli::validate(cfg);
    if (cfg.command == "constants") return cmd_constants(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "profile") return cmd_profile(cfg);
    if (cfg.command == "martingale") return cmd_martingale(cfg);
    if (cfg.command == "quicksort") return cmd_quicksort(cfg);
    if (cfg.command == "spine") return cmd_spine(cfg);
    if (cfg.command == "tilted") return cmd_tilted(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
