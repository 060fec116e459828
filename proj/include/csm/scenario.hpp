#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "csm/errors.hpp"

namespace csm::scenario {

using Json = nlohmann::ordered_json;

enum class Kind { Chain, Epr, Spin, Gleason };

const char* kind_name(Kind kind);

/// One expected tuple probability of a chain run.
struct Expectation {
  std::vector<int> path;
  double prob = 0.0;
  double tol = 1e-12;
};

/// Photon dragged through a sequence of polarizers (angles in degrees).
struct ChainSpec {
  double initial_angle_deg = 0.0;
  int initial_outcome = 0;
  std::vector<double> step_angles_deg;
  std::uint64_t samples = 0;  // 0 = exact run only
  std::vector<Expectation> expect;
};

/// Either a Malus-law sweep over polarizer angles or a batch of random
/// rotations applied to a spin-j direction context.
struct SpinSpec {
  enum class Mode { MalusSweep, Rotations };
  Mode mode = Mode::MalusSweep;
  int angles = 360;    // sweep: evenly spaced over [0, 360) degrees
  double j = 0.5;      // rotations
  int rotations = 0;   // rotations: number of random group elements
  int pool = 10;       // rotations: contexts pooled for the exclusivity bound
};

/// Singlet correlation experiment over a two-settings-per-party family
/// (degrees), optionally repeated over random setting draws.
struct EprSpec {
  std::string state = "singlet";
  std::array<double, 2> alice_deg{};
  std::array<double, 2> bob_deg{};
  int random_pairs = 0;
  std::optional<std::string> membership;  // "local" | "nonlocal"
  std::optional<double> chsh_abs;
  double chsh_tol = 1e-10;
};

/// Frame-function additivity runs and density fits.
struct GleasonSpec {
  int dim = 3;
  int bases = 1000;
  std::vector<std::string> assignments;
  bool fit = true;
};

struct Scenario {
  Kind kind = Kind::Chain;
  std::string name;
  std::string title;
  std::uint64_t seed = 1;
  std::optional<double> tol;  // per-kind default when absent
  std::variant<ChainSpec, EprSpec, SpinSpec, GleasonSpec> payload;
};

/// Parses and validates scenario text. Throws SchemaError / UnknownKind with
/// the offending field named.
Scenario parse_scenario(const std::string& text);

/// One named numeric check: pass iff `value op threshold` where op is "<="
/// or ">=".
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string op = "<=";
  bool pass = false;
};

Check check_le(const std::string& name, double value, double threshold);
Check check_ge(const std::string& name, double value, double threshold);

struct RunReport {
  std::string name;
  std::string kind;
  std::string version;
  std::uint64_t seed = 0;
  Json scenario;  // resolved input echo (overrides applied)
  Json results;   // kind-specific numeric results
  std::vector<Check> checks;

  bool all_pass() const;
};

/// CLI flag overrides; applied on top of the file values before the run.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<double> tol;
};

/// Executes a scenario. Deterministic given (scenario, overrides).
RunReport run(const Scenario& scenario, const Overrides& overrides = {});

enum class Format { Table, Json, Csv };

std::string emit(const RunReport& report, Format format);

/// Inverse of emit(…, Format::Json), for lossless round-trip checks.
RunReport parse_report_json(const std::string& text);

/// Bundled example scenarios (name -> embedded text).
std::vector<std::string> fixture_names();
std::optional<std::string> fixture_text(const std::string& name);

/// Loads a scenario from a bundled fixture name or a file path.
Scenario load_scenario(const std::string& name_or_path);

}  // namespace csm::scenario
