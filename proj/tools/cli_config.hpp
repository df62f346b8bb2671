#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace yulebst::cli {

struct RunConfig {
  std::string command;
  std::string kind = "bst";    // simulate: bst | yule | biased
  std::string suite = "fast";  // verify: all | fast
  std::uint64_t seed = 1;
  std::uint64_t n = 1000;
  double t = 1.0;
  bool t_given = false;
  std::string z = "1";
  double two_z = 1.0;
  std::uint64_t replicates = 1;
  std::string output;
  std::string format = "csv";
  unsigned threads = 1;
  std::string q = "1.25,1.5,1.75,2";

  std::vector<std::pair<std::string, std::string>> items() const {
    std::ostringstream tt;
    tt.precision(17);
    tt << t;
    std::ostringstream tz;
    tz.precision(17);
    tz << two_z;
    return {{"command", command}, {"kind", kind},     {"suite", suite}, {"seed", std::to_string(seed)},
            {"n", std::to_string(n)}, {"t", tt.str()}, {"z", z},         {"two-z", tz.str()},
            {"replicates", std::to_string(replicates)}, {"format", format}, {"threads", std::to_string(threads)},
            {"q", q}};
  }

  /// "# key=value" lines; stripping "# " gives a loadable config file.
  void write_header(std::ostream& os) const {
    for (const auto& [k, v] : items())
      if (k != "command") os << "# " << k << '=' << (v.find(',') == std::string::npos ? v : '"' + v + '"') << '\n';
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    for (const auto& [k, v] : items()) j[k] = v;
    return j;
  }
};

/// "a:b:step" (inclusive of b up to rounding), or a single number.
inline std::vector<double> parse_grid(const std::string& text) {
  const auto first = text.find(':');
  if (first == std::string::npos) return {std::stod(text)};
  const auto second = text.find(':', first + 1);
  if (second == std::string::npos) throw std::invalid_argument("grid must be start:stop:step: " + text);
  const double a = std::stod(text.substr(0, first));
  const double b = std::stod(text.substr(first + 1, second - first - 1));
  const double step = std::stod(text.substr(second + 1));
  if (!(step > 0) || b < a) throw std::invalid_argument("grid needs start <= stop and step > 0: " + text);
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) out.push_back(a + step * static_cast<double>(i));
  return out;
}

/// "re,im" or a real number.
inline std::complex<double> parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return {std::stod(text), 0.0};
  return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stod(item));
  return out;
}

inline bool is_complex(const std::string& text) { return text.find(',') != std::string::npos; }

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"constants", "simulate", "profile", "martingale",
                                              "quicksort", "spine",    "tilted",  "verify"};
  return names;
}

inline std::string description(const std::string& name) {
  if (name == "constants") return "critical constants c', c and z-, z+";
  if (name == "simulate") return "trajectory of a bst, yule or biased (tilted) process";
  if (name == "profile") return "profile of one BST against its exact expectation";
  if (name == "martingale") return "profile and Yule martingales along a path over a z grid";
  if (name == "quicksort") return "samples of the derivative martingale at z = 1";
  if (name == "spine") return "samples of the spine depth s_n under tilt 2z";
  if (name == "tilted") return "tilted Yule leaf counts against the negative binomial law";
  return "run the acceptance suite (all | fast)";
}

/// Options live on the top-level app and fall through from subcommands.
/// --config reads key=value lines; flags given on the command line win.
inline void build_app(CLI::App& app, RunConfig& cfg) {
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file");
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--n", cfg.n, "number of insertions (or leaves for yule)")->check(CLI::Range(std::uint64_t{0}, std::uint64_t{1} << 40));
  app.add_option_function<double>("--t", [&cfg](const double& t) { cfg.t = t; cfg.t_given = true; }, "time horizon")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--z", cfg.z, "z value, grid start:stop:step, or complex re,im");
  app.add_option("--two-z", cfg.two_z, "tilt 2z")->check(CLI::PositiveNumber);
  app.add_option("--replicates", cfg.replicates)->check(CLI::PositiveNumber);
  app.add_option("--output", cfg.output, "output path (stdout if empty)");
  app.add_option("--format", cfg.format)->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", cfg.threads)->check(CLI::PositiveNumber);
  app.add_option("--q", cfg.q, "comma separated exponents in (1,2]");

  for (const auto& name : commands()) {
    auto* sub = app.add_subcommand(name, description(name));
    sub->callback([&cfg, name] { cfg.command = name; });
    if (name == "simulate") sub->add_option("kind", cfg.kind)->check(CLI::IsMember({"bst", "yule", "biased"}));
    if (name == "verify") sub->add_option("suite", cfg.suite)->check(CLI::IsMember({"all", "fast"}));
  }
}

inline void validate(const RunConfig& cfg) {
  if (cfg.command.empty()) throw std::invalid_argument("no command");
  if (is_complex(cfg.z)) {
    parse_complex(cfg.z);
  } else {
    parse_grid(cfg.z);
  }
  for (double q : parse_list(cfg.q))
    if (!(q > 1 && q <= 2)) throw std::invalid_argument("q must lie in (1,2]");
}

}  // namespace yulebst::cli
