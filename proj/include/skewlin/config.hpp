#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skewlin/cantor.hpp"
#include "skewlin/errors.hpp"
#include "skewlin/scalar.hpp"
#include "skewlin/skew.hpp"

namespace skewlin {

/// Malformed or inconsistent run configuration; the message carries line:column.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// One monomial: component (zero-based), multiindex, coefficient text.
struct TermConfig {
  std::size_t component = 0;
  std::vector<int> index;
  std::string value;
  bool operator==(const TermConfig&) const = default;
};

/// Diagonal linear part plus monomials; key is a point label or a window word.
struct FiberConfig {
  std::string key;
  std::vector<std::string> lambda;
  std::vector<TermConfig> terms;
  bool operator==(const FiberConfig&) const = default;
};

struct BaseConfig {
  /// finite | cycle | full_shift | sft
  std::string kind = "finite";
  std::vector<int> sigma;
  std::size_t length = 0;
  std::size_t alphabet = 0;
  std::vector<std::vector<int>> transitions;
  std::vector<std::string> labels;
  bool operator==(const BaseConfig&) const = default;
};

struct SystemConfig {
  BaseConfig base;
  std::size_t dimension = 0;
  /// Window depth of the fiber table on subshifts.
  int depth = 0;
  std::vector<FiberConfig> fibers;
  bool operator==(const SystemConfig&) const = default;
};

/// x -> constant + linear x + terms.
struct BranchConfig {
  std::string label;
  std::vector<std::string> constant;
  std::vector<std::vector<std::string>> linear;
  std::vector<TermConfig> terms;
  bool operator==(const BranchConfig&) const = default;
};

struct ModelConfig {
  std::vector<BranchConfig> branches;
  std::vector<std::vector<int>> allowed;
  std::string scale = "1/2";
  /// Perturbation for `continue`: a constant shift of every branch, or replacement branches.
  std::optional<std::string> shift;
  std::vector<BranchConfig> perturbed;
  bool operator==(const ModelConfig&) const = default;
};

struct RunParams {
  /// Empty means the minimal r of (H^r_4).
  std::optional<int> degree;
  int max_degree = 12;
  double tol = 1e-12;
  int samples = 256;
  int depth = 6;
  std::optional<double> delta;
  /// Sample points of the defect grid (per window for chart grids).
  std::size_t points = 100;
  std::uint64_t seed = 1;
  /// Finite-difference step and direction scale for `derivative`.
  double step = 1e-4;
  double alpha = 1.0;
  bool operator==(const RunParams&) const = default;
};

struct RunConfig {
  Field field = Field::real;
  std::optional<SystemConfig> system;
  /// Direction fibers for `derivative`, over the system's base.
  std::vector<FiberConfig> direction;
  std::optional<ModelConfig> model;
  RunParams params;
  std::string out_dir = "out";
  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates YAML text. Unknown keys, malformed numbers, shape
/// mismatches and missing windows throw ConfigError("<source>:line:column: ...").
RunConfig parse_config(std::string_view text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

/// YAML rendering; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& config);

/// "a", "bi", "a+bi" or "a-bi" with real parts written as decimals or p/q.
std::complex<double> parse_complex(std::string_view text);

/// Scalar of the run field from coefficient text. Rationals reject imaginary parts.
template <class S>
S parse_scalar(std::string_view text);

BasePtr build_base(const BaseConfig& cfg);

template <class S>
SkewSystem<S> build_system(const SystemConfig& cfg, const BasePtr& base);

/// Same base and degree as the system, fibers from the direction table (absent windows are zero).
template <class S>
SkewSystem<S> build_direction(const SystemConfig& cfg, const std::vector<FiberConfig>& direction, const BasePtr& base,
                              double alpha);

ExpandingModel build_model(const ModelConfig& cfg);
std::vector<PolyMap<double>> build_perturbation(const ModelConfig& cfg, const ExpandingModel& model);

}  // namespace skewlin
