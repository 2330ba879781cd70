#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kpp/coeffs.hpp"

namespace kpp::cli {

inline constexpr std::string_view kVersion = "1.0.0";

enum class Command { Speed, Optimize, VerifyEquality, Constancy, Perturb, ScanPeriod, Simulate, Stationary };

const char* to_string(Command command);

// Unreadable config file or unwritable output (exit code 1).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Effective key/value pairs after merging the config file with flags. Keys
// use underscores (grid_size); flags use dashes (--grid-size).
using KeyValues = std::map<std::string, std::string>;

struct SimulationParams {
  double domain_half_width = 0.0;
  std::size_t points_per_period = 64;
  double dt = 0.0;
  double t_end = 150.0;
  double threshold = 0.0;
  double fit_start = 0.5;
  double fit_end = 1.0;
  double center = 0.0;
  std::optional<double> half_width;
  std::optional<double> height;
  double output_interval = 0.5;
  double snapshot_interval = 0.0;
  std::optional<double> expected_speed;
};

struct RunConfig {
  Command command = Command::Speed;
  std::string d_spec;
  std::string r_spec;
  double period = 0.0;
  std::optional<double> alpha;
  std::size_t grid_size = kDefaultGridSize;
  std::string output_path;    // empty: standard output
  std::string snapshot_path;  // simulate only; empty: no dump
  std::vector<double> Ls;
  std::vector<double> epsilons{-0.5, -0.1, 0.1, 0.5};
  std::uint64_t seed = 0;
  int perturbations = 10;
  SimulationParams sim;
  KeyValues values;  // the validated inputs, for the footer hash
};

const std::vector<std::string>& known_keys();

// `key = value` lines, '#' comments, optional matching quotes around values.
KeyValues parse_config_text(std::string_view text);
KeyValues read_config_file(const std::string& path);

// Validates every key and value; errors name the offending key.
RunConfig build_config(const KeyValues& values);

// FNV-1a 64-bit hash of the validated inputs, excluding output paths.
std::uint64_t input_hash(const RunConfig& config);

// The command's CSV report. Writes the snapshot dump for `simulate` when a
// snapshot path is set.
std::string render(const RunConfig& config);

// Runs the command and writes the report; returns the exit status
// (0 success, 1 invalid input or I/O failure, 2 numerical failure).
int run(const RunConfig& config, std::ostream& out, std::ostream& diag);

// Parses argv (flags override --config file values) and runs.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& diag);

}  // namespace kpp::cli
