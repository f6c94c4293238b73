#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "urbanflow/advect.hpp"
#include "urbanflow/error.hpp"
#include "urbanflow/geo.hpp"
#include "urbanflow/io.hpp"
#include "urbanflow/mesh.hpp"

namespace urbanflow::cli {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.3.0";

// --- Exit codes ---------------------------------------------------------------

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitConstraint = 4,
  kExitNonConvergence = 5,
  kExitInstability = 6,
};

int exit_code(ErrorKind kind);

// --- Scenario configuration -------------------------------------------------------

struct WindConfig {
  Point direction{0.0, 1.0};   ///< direction the wind blows towards (axis-aligned)
  double base_speed = 1.0;     ///< inflow speed at mu = 1, m/s
  double nu = 0.1;             ///< kinematic viscosity, m^2/s
  std::vector<double> mu{1.0}; ///< values solved by `wind`
  std::optional<std::pair<double, double>> mu_range;  ///< ROM training range
  double ramp_width = 0.0;     ///< inflow ramp next to the lateral walls, m
};

struct MeshConfig {
  mesh::SizeField size;        ///< lc_building, lc_gap, lc_far, gap_distance (m)
  double br_max = geo::kDefaultBlockageRatio;
  double min_clearance = 0.0;  ///< m
  double min_angle_deg = 20.0;
  std::optional<Box> domain;   ///< explicit domain (local m) instead of BR sizing
};

struct TransportConfig {
  double k = 0.1;        ///< m^2/s
  double dt = 0.5;       ///< s
  double t_final = 50.0; ///< s
  advect::InitialPlume plume;
  std::optional<Point> plume_lonlat;  ///< overrides plume.center when set
  std::vector<Point> probes;          ///< local m
  std::vector<double> contour_levels{10.0, 100.0, 1000.0};  ///< ppm
  std::optional<double> dirichlet_inflow;  ///< ppm
  std::optional<double> mu;  ///< wind field to use; default wind.mu[0]
};

struct RomConfig {
  int n_snapshots = 50;
  int n_test = 20;
  std::vector<int> n_r{6};  ///< benchmarked basis sizes; the artifact keeps the largest
  int n_m = 20;
  std::uint64_t seed = 1;
  int repetitions = 5;
};

struct OutputConfig {
  fs::path directory = "output";
  std::size_t save_interval = 10;
  std::set<std::string> formats{"vtk", "geojson", "csv"};
  bool vtk_quadratic = false;

  bool wants(const std::string& f) const { return formats.count(f) != 0; }
};

struct ScenarioConfig {
  fs::path source;          ///< the config file
  fs::path buildings_path;  ///< resolved against the config directory
  WindConfig wind;
  MeshConfig mesh;
  TransportConfig transport;
  RomConfig rom;
  OutputConfig output;
};

/// INI file via Boost.PropertyTree. Unknown keys, malformed values and empty
/// ranges throw Error(Config); an unreadable file or a missing buildings file
/// throws Error(Io) naming the path.
ScenarioConfig load_config(const fs::path& path);
ScenarioConfig parse_config(const std::string& text, const fs::path& base_dir);

// --- Phases ------------------------------------------------------------------------

struct MeshProducts {
  mesh::TriMesh mesh;
  io::DomainRecord domain;
  geo::BuildingSet buildings;  ///< local meters
  mesh::QualityReport quality;
  std::vector<std::string> warnings;
};

/// Reads and projects the buildings, sizes the domain and triangulates.
/// A blockage ratio at or above br_max is an Error(Constraint).
MeshProducts build_mesh(const ScenarioConfig& config);

/// A command line after parsing.
struct Invocation {
  std::string command;  ///< mesh | wind | transport | rom | run-all
  std::string phase;    ///< offline | online | benchmark (rom only)
  fs::path config;
  std::optional<fs::path> output;
  std::optional<std::uint64_t> seed;
  std::optional<double> mu;
};

/// Output directory: --output, then URBANFLOW_OUTPUT_DIR, then the config.
fs::path resolve_output_dir(const Invocation& inv, const ScenarioConfig& config);

/// Runs the command and returns the exit code; errors go to `err` as one
/// line naming the error class.
int execute(const Invocation& inv, std::ostream& log, std::ostream& err);

}  // namespace urbanflow::cli
