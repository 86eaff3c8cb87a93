#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace fraisse::cli {

/// Everything that determines a command's outputs. The canonical JSON form,
/// minus the output directory, is hashed into every file the command writes.
struct ExperimentConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
  std::size_t samples = 1000000;
  std::string out = "out";
  double tol = 1e-9;
  unsigned denom_bits = 32;
  nlohmann::json params = nlohmann::json::object();

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  std::string hash() const;
};

/// Exit codes: 0 success or positive result, 2 negative-but-valid result, 1 error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fraisse::cli
