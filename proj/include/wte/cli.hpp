#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wte::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitIngest = 2;
inline constexpr int kExitIncompatible = 3;

/// Resolved settings of one command. Written to run_config.txt next to the
/// outputs; that file is itself a valid --config file.
struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;  ///< task or embedding files
  std::string format = "auto";      ///< auto | csv | raw-f32
  int mds_dim = 10;
  std::optional<double> reg;
  std::optional<long long> ref_size;
  long long ref_size_cap = 1000;
  std::uint64_t ref_seed = 0;
  std::string ref_mode = "auto";    ///< auto | smooth-image | uniform-box | file
  std::string ref_file;
  std::optional<int> image_side;
  std::string ref_labels = "zeros"; ///< zeros | box
  std::optional<int> subsample;
  std::uint64_t seed = 0;
  bool squared = false;
  int workers = 1;
  std::string otdd_mode = "direct"; ///< direct | atlas
  std::string counts = "2,4,6,8,10,12";
  int task_size = 100;
  int classes = 3;
  int dim = 2;
  int repeats = 1;
  std::string out;
};

/// key = value lines, one per setting, inputs as repeated `input` keys.
std::string serialize(const RunConfig& config);

/// A config file split into option tokens (`--key value`, bare `--key` for
/// true flags) and positional inputs (repeated `input` keys).
struct ConfigFile {
  std::vector<std::string> options;
  std::vector<std::string> inputs;
};

/// Blank lines and lines starting with '#' are ignored. Throws
/// Error(parse_error) on a line without '='.
ConfigFile read_config(const std::filesystem::path& path);

/// Runs one command line (without the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wte::cli
