#include "kpp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "kpp/errors.hpp"
#include "kpp/optimal.hpp"
#include "kpp/pde.hpp"
#include "kpp/speed.hpp"

namespace kpp::cli {

namespace {

struct CommandName {
  Command command;
  const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::Speed, "speed"},           {Command::Optimize, "optimize"},
    {Command::VerifyEquality, "verify-equality"}, {Command::Constancy, "constancy"},
    {Command::Perturb, "perturb"},       {Command::ScanPeriod, "scan-period"},
    {Command::Simulate, "simulate"},     {Command::Stationary, "stationary"},
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

[[noreturn]] void malformed(std::string_view key, std::string_view value, std::string_view why) {
  throw PreconditionError(fmt::format("malformed value for key '{}': '{}' ({})", key, value, why));
}

double parse_real(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    malformed(key, text, "expected a finite real number");
  }
  return v;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    malformed(key, text, "expected a nonnegative integer");
  }
  return v;
}

// Comma-separated reals, or geom:a:b:n for n geometric points from a to b.
std::vector<double> parse_list(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  std::vector<double> out;
  if (s.rfind("geom:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(s.substr(5));
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) malformed(key, text, "expected geom:first:last:count");
    const double a = parse_real(key, parts[0]);
    const double b = parse_real(key, parts[1]);
    const auto n = parse_unsigned(key, parts[2]);
    if (!(a > 0.0 && b > a) || n < 2) malformed(key, text, "geom needs 0 < first < last and count >= 2");
    for (std::uint64_t i = 0; i < n; ++i) {
      out.push_back(a * std::pow(b / a, static_cast<double>(i) / static_cast<double>(n - 1)));
    }
    out.back() = b;
    return out;
  }
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');) out.push_back(parse_real(key, part));
  if (out.empty()) malformed(key, text, "expected a comma-separated list");
  return out;
}

std::string real(double v) { return fmt::format("{:.17g}", v); }

class Report {
 public:
  explicit Report(const RunConfig& config) : config_(config) {}

  void header(std::initializer_list<std::string_view> columns) {
    body_ += fmt::format("{}\n", fmt::join(columns, ","));
  }
  void row(const std::vector<std::string>& cells) { body_ += fmt::format("{}\n", fmt::join(cells, ",")); }
  void note(std::string_view key, std::string_view value) {
    footer_ += fmt::format("# {} = {}\n", key, value);
  }

  std::string finish(std::string_view tolerances) const {
    std::string s = body_;
    s += fmt::format("# command = {}\n", to_string(config_.command));
    s += footer_;
    s += fmt::format("# grid_size = {}\n", config_.grid_size);
    s += fmt::format("# tolerances = {}\n", tolerances);
    s += fmt::format("# version = {}\n", kVersion);
    s += fmt::format("# input_hash = fnv1a64:{:016x}\n", input_hash(config_));
    return s;
  }

 private:
  const RunConfig& config_;
  std::string body_;
  std::string footer_;
};

constexpr std::string_view kSpeedTolerances = "eigen_step=1e-12 lambda_rel=1e-10";

PeriodicCoefficient coefficient(const RunConfig& c, const std::string& spec, std::string_view role) {
  try {
    return parse_coefficient(spec, c.period, c.grid_size);
  } catch (const PreconditionError& e) {
    throw PreconditionError(fmt::format("{}: {}", role, e.what()));
  }
}

std::string render_speed(const RunConfig& c) {
  const auto d = coefficient(c, c.d_spec, "d");
  const auto r = coefficient(c, c.r_spec, "r");
  const SpeedResult s = minimal_speed(d, r);
  Report rep(c);
  rep.header({"c_star", "lambda_star", "lower_bound", "gap", "grid_size", "richardson_estimate"});
  rep.row({real(s.c_star), real(s.lambda_star), real(s.lower_bound), real(s.c_star - s.lower_bound),
           std::to_string(s.grid_size), real(s.richardson_estimate)});
  return rep.finish(kSpeedTolerances);
}

std::string render_optimize(const RunConfig& c) {
  const auto d = coefficient(c, c.d_spec, "d");
  const PeriodicCoefficient rd = optimal_growth(d, *c.alpha);
  const SpeedResult s = minimal_speed(d, rd);
  Report rep(c);
  rep.header({"x", "d", "r_d"});
  for (std::size_t j = 0; j < d.grid_size(); ++j) {
    rep.row({real(static_cast<double>(j) * d.spacing()), real(d.samples()[j]), real(rd.samples()[j])});
  }
  rep.note("alpha", real(*c.alpha));
  rep.note("mean_r_d", real(arithmetic_mean(rd)));
  rep.note("harmonic_mean_d", real(harmonic_mean(d)));
  rep.note("condition_residual", real(condition_residual(d, rd)));
  rep.note("c_star", real(s.c_star));
  rep.note("richardson_estimate", real(s.richardson_estimate));
  rep.note("lower_bound", real(s.lower_bound));
  return rep.finish(kSpeedTolerances);
}

std::string render_verify(const RunConfig& c) {
  const auto d = coefficient(c, c.d_spec, "d");
  const auto r = coefficient(c, c.r_spec, "r");
  const EqualityReport e = equality_report(d, r);
  Report rep(c);
  rep.header({"condition_residual", "speed_gap", "lambda0", "eigenfunction_deviation", "c_star",
              "richardson_estimate", "lower_bound"});
  rep.row({real(e.condition_residual), real(e.speed_gap), real(e.lambda0),
           real(e.eigenfunction_deviation), real(e.speed.c_star), real(e.speed.richardson_estimate),
           real(e.speed.lower_bound)});
  rep.note("speed_gap", "richardson_estimate - lower_bound");
  return rep.finish(kSpeedTolerances);
}

std::string render_constancy(const RunConfig& c) {
  const auto d = coefficient(c, c.d_spec, "d");
  const ConstancyResult res = constancy_test(d, *c.alpha);
  Report rep(c);
  rep.header({"deviation", "verdict", "lambda0"});
  rep.row({real(res.deviation), to_string(res.verdict), real(res.lambda0)});
  rep.note("threshold", real(kConstancyThreshold));
  return rep.finish("eigen_step=1e-12");
}

std::string render_perturb(const RunConfig& c) {
  const auto d = coefficient(c, c.d_spec, "d");
  PerturbationOptions opts;
  opts.perturbations = c.perturbations;
  const PerturbationStudy study = perturbation_study(d, *c.alpha, c.epsilons, c.seed, opts);
  Report rep(c);
  rep.header({"eta_id", "epsilon", "speed", "delta"});
  for (const PerturbationTrial& t : study.trials) {
    rep.row({std::to_string(t.eta_id), real(t.epsilon), real(t.speed), real(t.delta)});
  }
  rep.note("base_speed", real(study.base_speed));
  rep.note("min_delta", real(study.min_delta));
  rep.note("seed", std::to_string(c.seed));
  rep.note("speeds", "richardson from N and 2N");
  return rep.finish(kSpeedTolerances);
}

std::string render_scan(const RunConfig& c) {
  const auto d = coefficient(c, c.d_spec, "d");
  const auto r = coefficient(c, c.r_spec, "r");
  const PeriodScan scan = period_scan(d, r, c.Ls);
  Report rep(c);
  rep.header({"L", "c_star_L", "lower_bound"});
  for (std::size_t i = 0; i < scan.Ls.size(); ++i) {
    rep.row({real(scan.Ls[i]), real(scan.speeds[i]), real(scan.limit_value)});
  }
  rep.note("speeds", "richardson from N and 2N");
  rep.note("nondecreasing", scan.nondecreasing(kSpeedTolerance) ? "true" : "false");
  rep.note("second_difference", real(scan.second_difference_at_zero));
  rep.note("second_difference_tolerance", real(scan.second_difference_tolerance));
  rep.note("second_difference_flag", scan.curvature_detected() ? "positive" : "within_tolerance");
  return rep.finish(kSpeedTolerances);
}

SimulationConfig simulation_config(const RunConfig& c) {
  SimulationConfig s(coefficient(c, c.d_spec, "d"), coefficient(c, c.r_spec, "r"));
  const SimulationParams& p = c.sim;
  s.domain_half_width = p.domain_half_width;
  s.points_per_period = p.points_per_period;
  s.dt = p.dt;
  s.t_end = p.t_end;
  s.threshold = p.threshold;
  s.fit_window = {p.fit_start, p.fit_end};
  s.initial.center = p.center;
  s.initial.half_width = p.half_width;
  s.initial.height = p.height;
  s.output_interval = p.output_interval;
  s.snapshot_interval = p.snapshot_interval;
  if (!c.snapshot_path.empty() && s.snapshot_interval == 0.0) s.snapshot_interval = p.t_end / 10.0;
  s.expected_speed = p.expected_speed;
  return s;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot open '{}' for writing", path));
  f << text;
  f.close();
  if (!f) throw IoError(fmt::format("failed writing '{}'", path));
}

std::string render_simulate(const RunConfig& c) {
  const SpreadingEstimate est = spreading_speed_estimate(simulation_config(c));
  const SimulationRun& run = est.run;
  Report rep(c);
  rep.header({"t", "front_position"});
  for (std::size_t i = 0; i < run.front.times.size(); ++i) {
    rep.row({real(run.front.times[i]), real(run.front.positions[i])});
  }
  rep.note("fitted_speed", real(est.speed));
  rep.note("ci_halfwidth", real(est.ci_halfwidth));
  rep.note("fit_residual", real(run.front.fit_residual));
  rep.note("boundary_contamination", run.front.boundary_contamination ? "true" : "false");
  rep.note("fast_ray_decays", est.fast_ray_decays ? "true" : "false");
  rep.note("slow_ray_persists", est.slow_ray_persists ? "true" : "false");
  rep.note("threshold", real(run.threshold));
  rep.note("mesh_points", std::to_string(run.mesh.size()));
  rep.note("dx", real(run.mesh.dx));
  rep.note("dt", real(run.dt));
  if (!c.snapshot_path.empty()) {
    std::ostringstream dump;
    write_snapshots(dump, run);
    write_file(c.snapshot_path, dump.str());
  }
  return rep.finish(fmt::format("newton=1e-8 negativity=1e-12"));
}

std::string render_stationary(const RunConfig& c) {
  const auto d = coefficient(c, c.d_spec, "d");
  const auto r = coefficient(c, c.r_spec, "r");
  const StationaryState st = stationary_state(d, r);
  Report rep(c);
  rep.header({"x", "p"});
  for (std::size_t j = 0; j < st.p.size(); ++j) {
    rep.row({real(static_cast<double>(j) * d.spacing()), real(st.p[j])});
  }
  rep.note("residual", real(st.residual));
  rep.note("newton_steps", std::to_string(st.newton_steps));
  return rep.finish("newton=1e-8");
}

}  // namespace

const char* to_string(Command command) {
  for (const auto& c : kCommands) {
    if (c.command == command) return c.name;
  }
  return "?";
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "command",        "d",           "r",          "period",         "alpha",
      "grid_size",      "output",      "Ls",         "epsilons",       "seed",
      "perturbations",  "X",           "points_per_period", "dt",    "t_end",
      "threshold",      "fit_start",   "fit_end",    "center",         "half_width",
      "height",         "output_interval", "snapshot_interval", "snapshots", "expected_speed"};
  return keys;
}

KeyValues parse_config_text(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    // Strip a comment that starts outside quotes.
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quote) {
        if (ch == quote) quote = 0;
      } else if (ch == '"' || ch == '\'') {
        quote = ch;
      } else if (ch == '#') {
        line.resize(i);
        break;
      }
    }
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw PreconditionError(fmt::format("config line {}: expected 'key = value'", line_no));
    }
    const std::string key = normalize_key(trim(std::string_view(content).substr(0, eq)));
    std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw PreconditionError(fmt::format("config line {}: empty key", line_no));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw PreconditionError(fmt::format("unknown key '{}' (config line {})", key, line_no));
    }
    if (out.count(key)) {
      throw PreconditionError(fmt::format("duplicate key '{}' (config line {})", key, line_no));
    }
    out[key] = value;
  }
  return out;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot read config file '{}'", path));
  std::ostringstream text;
  text << f.rdbuf();
  return parse_config_text(text.str());
}

RunConfig build_config(const KeyValues& values) {
  const auto& keys = known_keys();
  for (const auto& [key, value] : values) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw PreconditionError(fmt::format("unknown key '{}'", key));
    }
  }
  auto find = [&](const std::string& key) -> const std::string* {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };

  RunConfig c;
  c.values = values;
  const std::string* command = find("command");
  if (!command) throw PreconditionError("missing required key 'command'");
  const auto match = std::find_if(std::begin(kCommands), std::end(kCommands),
                                  [&](const CommandName& n) { return *command == n.name; });
  if (match == std::end(kCommands)) malformed("command", *command, "unknown command");
  c.command = match->command;

  auto require = [&](const std::string& key) -> const std::string& {
    const std::string* v = find(key);
    if (!v) {
      throw PreconditionError(
          fmt::format("missing required key '{}' for command '{}'", key, to_string(c.command)));
    }
    return *v;
  };
  auto positive = [&](const std::string& key, double v) {
    if (!(v > 0.0)) malformed(key, find(key) ? *find(key) : "", "must be positive");
    return v;
  };

  const bool needs_r = c.command == Command::Speed || c.command == Command::VerifyEquality ||
                       c.command == Command::ScanPeriod || c.command == Command::Simulate ||
                       c.command == Command::Stationary;
  const bool needs_alpha = c.command == Command::Optimize || c.command == Command::Constancy ||
                           c.command == Command::Perturb;

  c.d_spec = require("d");
  if (needs_r) c.r_spec = require("r");
  c.period = positive("period", parse_real("period", require("period")));
  if (needs_alpha) c.alpha = positive("alpha", parse_real("alpha", require("alpha")));
  if (c.command == Command::ScanPeriod) {
    c.Ls = parse_list("Ls", require("Ls"));
    for (double L : c.Ls) positive("Ls", L);
  }

  if (const auto* v = find("grid_size")) {
    const auto n = parse_unsigned("grid_size", *v);
    if (n < kMinGridSize || !is_power_of_two(n)) {
      throw PreconditionError(fmt::format(
          "invalid value for key 'grid_size': grid size must be a power of two >= {}, got {}",
          kMinGridSize, n));
    }
    c.grid_size = n;
  }
  if (const auto* v = find("output")) c.output_path = *v;
  if (const auto* v = find("snapshots")) c.snapshot_path = *v;
  if (const auto* v = find("epsilons")) c.epsilons = parse_list("epsilons", *v);
  if (const auto* v = find("seed")) c.seed = parse_unsigned("seed", *v);
  if (const auto* v = find("perturbations")) {
    const auto n = parse_unsigned("perturbations", *v);
    if (n < 1 || n > 10000) malformed("perturbations", *v, "expected 1..10000");
    c.perturbations = static_cast<int>(n);
  }

  SimulationParams& s = c.sim;
  auto real_key = [&](const std::string& key, double& target) {
    if (const auto* v = find(key)) target = parse_real(key, *v);
  };
  auto optional_key = [&](const std::string& key, std::optional<double>& target) {
    if (const auto* v = find(key)) target = parse_real(key, *v);
  };
  real_key("X", s.domain_half_width);
  if (find("X")) positive("X", s.domain_half_width);
  if (const auto* v = find("points_per_period")) {
    s.points_per_period = parse_unsigned("points_per_period", *v);
  }
  real_key("dt", s.dt);
  if (find("dt")) positive("dt", s.dt);
  real_key("t_end", s.t_end);
  positive("t_end", s.t_end);
  real_key("threshold", s.threshold);
  if (find("threshold")) positive("threshold", s.threshold);
  real_key("fit_start", s.fit_start);
  real_key("fit_end", s.fit_end);
  real_key("center", s.center);
  optional_key("half_width", s.half_width);
  optional_key("height", s.height);
  real_key("output_interval", s.output_interval);
  positive("output_interval", s.output_interval);
  real_key("snapshot_interval", s.snapshot_interval);
  if (s.snapshot_interval < 0.0) malformed("snapshot_interval", *find("snapshot_interval"), "must be >= 0");
  optional_key("expected_speed", s.expected_speed);
  return c;
}

std::uint64_t input_hash(const RunConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  auto feed = [&](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [key, value] : config.values) {
    if (key == "output" || key == "snapshots") continue;
    feed(key);
    feed("=");
    feed(value);
    feed("\n");
  }
  return h;
}

std::string render(const RunConfig& config) {
  switch (config.command) {
    case Command::Speed: return render_speed(config);
    case Command::Optimize: return render_optimize(config);
    case Command::VerifyEquality: return render_verify(config);
    case Command::Constancy: return render_constancy(config);
    case Command::Perturb: return render_perturb(config);
    case Command::ScanPeriod: return render_scan(config);
    case Command::Simulate: return render_simulate(config);
    case Command::Stationary: return render_stationary(config);
  }
  return {};
}

int run(const RunConfig& config, std::ostream& out, std::ostream& diag) {
  try {
    const std::string text = render(config);
    if (config.output_path.empty()) {
      out << text;
      out.flush();
    } else {
      write_file(config.output_path, text);
    }
    return 0;
  } catch (const NumericalError& e) {
    fmt::print(diag, "error: numerical failure in stage '{}': {}\n", e.stage(), e.what());
    return 2;
  } catch (const PreconditionError& e) {
    fmt::print(diag, "error: {}\n", e.what());
    return 1;
  } catch (const IoError& e) {
    fmt::print(diag, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(diag, "error: numerical failure in stage 'internal': {}\n", e.what());
    return 2;
  }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& diag) {
  CLI::App app{"Minimal speeds of the periodic Fisher-KPP equation", "kppspeed"};
  std::string command;
  std::string config_path;
  bool show_version = false;
  app.add_option("command", command,
                 "speed | optimize | verify-equality | constancy | perturb | scan-period | "
                 "simulate | stationary");
  app.add_option("--config", config_path, "key = value file; flags override its entries");
  app.add_flag("--version", show_version, "Print the version and exit");

  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::Option*> options;
  for (const std::string& key : known_keys()) {
    if (key == "command") continue;
    options[key] = app.add_option(flag_name(key), flags[key]);
  }
  options["d"]->description("Diffusion coefficient d(x)");
  options["r"]->description("Growth coefficient r(x)");
  options["Ls"]->description("Periods: comma list or geom:first:last:count");
  options["epsilons"]->description("Perturbation amplitudes (use --epsilons=-0.5,...)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    fmt::print(diag, "error: {}\n", e.what());
    return 1;
  }
  if (show_version) {
    fmt::print(out, "kppspeed {}\n", kVersion);
    return 0;
  }

  RunConfig config;
  try {
    KeyValues values;
    if (!config_path.empty()) values = read_config_file(config_path);
    if (!command.empty()) values["command"] = command;
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) values[key] = flags[key];
    }
    config = build_config(values);
  } catch (const std::exception& e) {
    fmt::print(diag, "error: {}\n", e.what());
    return 1;
  }
  return run(config, out, diag);
}

}  // namespace kpp::cli
