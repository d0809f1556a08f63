#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phasetop/benchmark.hpp"
#include "phasetop/errors.hpp"
#include "phasetop/optimizer.hpp"

namespace phasetop {

/// Parse or validation failure tied to a configuration key (line 0 when the
/// key was not present in the file).
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& key, int line, const std::string& message);
  std::string key;
  int line;
};

/// Everything a CLI run needs. Defaults describe the cantilever benchmark.
struct RunConfig {
  // [mesh]
  std::string mesh_file;  // empty: rectangle generator
  int nx = 32;
  int ny = 16;
  double lx = 1.0;
  double ly = 1.0;
  Split split = Split::Diagonal;
  double window = 0.25;  // right-edge traction window (fraction of ly)

  // [material]
  MaterialLaws laws;

  // [loads]
  Vec2 body_force{0.0, 0.0};
  Vec2 traction{0.0, -1.0};
  Vec2 dirichlet{0.0, 0.0};

  // [solver]
  double gamma = 10.0;
  ForwardOptions forward{1e-12, 50, 1e-10, 1e-4, 40};
  std::uint64_t seed = 1;
  long samples = 100000;  // material-verify draws
  int fd_directions = 20;
  double fd_step = 1e-5;

  // [optimizer]
  OptimizerConfig optimizer;
  double z0 = 0.5;
  std::vector<double> delta_sweep{0.08, 0.04, 0.02};
  double profile_delta = 0.02;
  double profile_h_ratio = 0.125;

  RunConfig();
};

RunConfig parseConfig(const std::string& text);
RunConfig loadConfig(const std::string& path);
/// Effective configuration in the input format; parsing it reproduces the config.
std::string formatConfig(const RunConfig& config);

/// Mesh and loads described by the configuration.
Problem buildProblem(const RunConfig& config);

/// Closest known key within edit distance 3, or empty.
std::string suggestKey(const std::string& unknown);

}  // namespace phasetop
