#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "mcf/profile_io.hpp"
#include "mcf/surface.hpp"

namespace mcf {

enum class Command { verify, entropy, flow, classify, gap, bounds };

const char* command_name(Command c);
Command parse_command(const std::string& name);  // throws std::invalid_argument

struct RunConfig {
  Command command = Command::verify;
  // Surface source: a builtin shrinker (cylinder, sphere, circle, plane) or a
  // profile file. `input` wins when both are given.
  std::string builtin = "cylinder";
  std::string input;
  int k = 1;
  int n = 2;
  double amplitude = 0.0;
  int wavenumber = 1;
  int resolution = 256;
  double R = 12.0;
  double delta0 = 0.25;
  double C0 = 2.0;
  double lambda0 = 1.6;
  double theta = 0.1;
  int rounds = 5;
  double ds = 0.0;  // cap on the flow step; 0 keeps the stability bound
  double s_max = 2.0;
  double cadence = 0.1;
  std::string out = ".";
  std::uint64_t seed = 1;
  int threads = 1;
};

// Sets one `key = value` entry; throws ParseError pointing at the value (or
// the key when it is unknown). Columns are 1-based.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& source,
                   int line, int key_column, int value_column);

// Flat `key = value` lines with `#` comments.
void parse_config(std::istream& in, const std::string& source, RunConfig& cfg);
void read_config_file(const std::string& path, RunConfig& cfg);

// Checks the cross-field rules (positivity, ranges) after all settings are in.
void validate_config(const RunConfig& cfg);

DiscreteHypersurface load_surface(const RunConfig& cfg);

struct RunResult {
  int status = 0;  // 0 ok, 1 failed check, 2 parse error, 3 unwritable output
  std::string failing_check;
  std::vector<std::string> artifacts;  // paths relative to the output directory
};

// Dispatches the command, writes its artifacts into cfg.out and prints a short
// summary to `log`.
RunResult run(const RunConfig& cfg, std::ostream& log);

// Comma-separated table with a header row; every value is preformatted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  void write(std::ostream& out) const;
};

}  // namespace mcf
