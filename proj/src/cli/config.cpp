#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "urbanflow/cli.hpp"

namespace urbanflow::cli {

namespace pt = boost::property_tree;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Io:
    case ErrorKind::Parse: return kExitIo;
    case ErrorKind::Constraint:
    case ErrorKind::Topology: return kExitConstraint;
    case ErrorKind::Singular:
    case ErrorKind::NonConvergence: return kExitNonConvergence;
    case ErrorKind::Instability: return kExitInstability;
    case ErrorKind::Internal: return kExitInternal;
  }
  return kExitInternal;
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::Config, key + ": " + what);
}

std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  boost::split(out, text, boost::is_any_of(" \t,"), boost::token_compress_on);
  std::erase_if(out, [](const std::string& w) { return w.empty(); });
  return out;
}

double to_double(const std::string& key, const std::string& w) {
  double v = 0.0;
  const auto r = std::from_chars(w.data(), w.data() + w.size(), v);
  if (r.ec != std::errc() || r.ptr != w.data() + w.size() || !std::isfinite(v)) {
    bad(key, "expected a number, got '" + w + "'");
  }
  return v;
}

long long to_integer(const std::string& key, const std::string& w) {
  long long v = 0;
  const auto r = std::from_chars(w.data(), w.data() + w.size(), v);
  if (r.ec != std::errc() || r.ptr != w.data() + w.size()) bad(key, "expected an integer, got '" + w + "'");
  return v;
}

// Reads one section, tracking which keys were consumed so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    const auto child = tree_->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    std::string v = boost::trim_copy(child->data());
    if (v.empty()) bad(full(key), "empty value");
    return v;
  }

  void ignore(const std::string& key) { used_.insert(key); }

  std::string full(const std::string& key) const { return name_.empty() ? key : "[" + name_ + "] " + key; }

  void number(const std::string& key, double& out) {
    if (auto v = raw(key)) out = to_double(full(key), *v);
  }
  std::optional<double> optional_number(const std::string& key) {
    if (auto v = raw(key)) return to_double(full(key), *v);
    return std::nullopt;
  }
  template <typename I>
  void integer(const std::string& key, I& out) {
    if (auto v = raw(key)) {
      const long long x = to_integer(full(key), *v);
      if (x < 0) bad(full(key), "must be non-negative");
      out = static_cast<I>(x);
    }
  }
  std::optional<std::vector<double>> numbers(const std::string& key) {
    auto v = raw(key);
    if (!v) return std::nullopt;
    std::vector<double> out;
    for (const auto& w : words(*v)) out.push_back(to_double(full(key), w));
    return out;
  }
  std::optional<Point> point(const std::string& key) {
    auto v = numbers(key);
    if (!v) return std::nullopt;
    if (v->size() != 2) bad(full(key), "expected two numbers 'x y'");
    return Point{(*v)[0], (*v)[1]};
  }
  void boolean(const std::string& key, bool& out) {
    if (auto v = raw(key)) {
      const std::string s = boost::to_lower_copy(*v);
      if (s == "true" || s == "1" || s == "yes") {
        out = true;
      } else if (s == "false" || s == "0" || s == "no") {
        out = false;
      } else {
        bad(full(key), "expected true or false, got '" + *v + "'");
      }
    }
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!used_.count(key)) bad(full(key), "unknown key");
    }
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

Point parse_direction(const std::string& key, const std::string& value) {
  const std::string s = boost::to_lower_copy(value);
  static const std::map<std::string, Point> names{
      {"north", {0.0, 1.0}}, {"south", {0.0, -1.0}}, {"east", {1.0, 0.0}}, {"west", {-1.0, 0.0}}};
  if (auto it = names.find(s); it != names.end()) return it->second;
  const auto w = words(value);
  if (w.size() != 2) bad(key, "expected north|south|east|west or a vector 'x y'");
  Point d{to_double(key, w[0]), to_double(key, w[1])};
  const double n = norm(d);
  if (!(n > 0.0)) bad(key, "zero wind direction");
  d = (1.0 / n) * d;
  if (std::fabs(d.x) > 1e-12 && std::fabs(d.y) > 1e-12) bad(key, "wind direction must be axis-aligned");
  return d;
}

void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) bad(key, what);
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const fs::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Config, "malformed config (line " + std::to_string(e.line()) + "): " + e.message());
  }

  static const std::set<std::string> kSections{"wind", "mesh", "transport", "plume", "rom", "output"};
  for (const auto& [key, child] : tree) {
    if (!child.empty() && !kSections.count(key)) bad("[" + key + "]", "unknown section");
  }
  auto section = [&](const std::string& name) {
    const auto c = tree.get_child_optional(name);
    return Section(c ? &*c : nullptr, name);
  };

  ScenarioConfig cfg;
  Section top(&tree, "");
  for (const auto& s : kSections) top.ignore(s);
  auto buildings = top.raw("buildings_path");
  if (!buildings) bad("buildings_path", "required");
  cfg.buildings_path = base_dir / *buildings;
  top.reject_unknown();

  Section wind = section("wind");
  if (auto d = wind.raw("direction")) cfg.wind.direction = parse_direction(wind.full("direction"), *d);
  wind.number("base_speed", cfg.wind.base_speed);
  wind.number("nu", cfg.wind.nu);
  if (auto mu = wind.numbers("mu")) cfg.wind.mu = *mu;
  if (auto r = wind.numbers("mu_range")) {
    check(r->size() == 2, wind.full("mu_range"), "expected 'min max'");
    cfg.wind.mu_range = std::pair{(*r)[0], (*r)[1]};
  }
  wind.number("ramp_width", cfg.wind.ramp_width);
  wind.reject_unknown();
  check(cfg.wind.base_speed > 0.0, wind.full("base_speed"), "must be positive");
  check(cfg.wind.nu > 0.0, wind.full("nu"), "must be positive");
  check(!cfg.wind.mu.empty(), wind.full("mu"), "needs at least one value");
  for (double m : cfg.wind.mu) check(m >= 0.0, wind.full("mu"), "values must be non-negative");
  if (cfg.wind.mu_range) {
    check(cfg.wind.mu_range->first >= 0.0 && cfg.wind.mu_range->first < cfg.wind.mu_range->second,
          wind.full("mu_range"), "empty or negative range");
  }
  check(cfg.wind.ramp_width >= 0.0, wind.full("ramp_width"), "must be non-negative");

  Section mesh = section("mesh");
  mesh.number("lc_building", cfg.mesh.size.lc_building);
  mesh.number("lc_gap", cfg.mesh.size.lc_gap);
  mesh.number("lc_far", cfg.mesh.size.lc_far);
  mesh.number("gap_distance", cfg.mesh.size.gap_distance);
  mesh.number("br_max", cfg.mesh.br_max);
  mesh.number("min_clearance", cfg.mesh.min_clearance);
  mesh.number("min_angle", cfg.mesh.min_angle_deg);
  if (auto b = mesh.numbers("domain")) {
    check(b->size() == 4, mesh.full("domain"), "expected 'xmin ymin xmax ymax'");
    cfg.mesh.domain = Box{(*b)[0], (*b)[1], (*b)[2], (*b)[3]};
    check(cfg.mesh.domain->width() > 0.0 && cfg.mesh.domain->height() > 0.0, mesh.full("domain"), "empty box");
  }
  mesh.reject_unknown();
  cfg.mesh.size.validate();
  check(cfg.mesh.br_max > 0.0 && cfg.mesh.br_max < 1.0, mesh.full("br_max"), "must lie in (0, 1)");
  check(cfg.mesh.min_clearance >= 0.0, mesh.full("min_clearance"), "must be non-negative");
  check(cfg.mesh.min_angle_deg > 0.0 && cfg.mesh.min_angle_deg <= 30.0, mesh.full("min_angle"),
        "must lie in (0, 30] degrees");

  Section tr = section("transport");
  tr.number("k", cfg.transport.k);
  tr.number("dt", cfg.transport.dt);
  tr.number("t_final", cfg.transport.t_final);
  if (auto p = tr.raw("probes")) {
    std::vector<std::string> items;
    boost::split(items, *p, boost::is_any_of(";"));
    for (const auto& item : items) {
      const auto w = words(item);
      if (w.empty()) continue;
      check(w.size() == 2, tr.full("probes"), "expected 'x y; x y; ...'");
      cfg.transport.probes.push_back({to_double(tr.full("probes"), w[0]), to_double(tr.full("probes"), w[1])});
    }
  }
  if (auto l = tr.numbers("contour_levels")) cfg.transport.contour_levels = *l;
  cfg.transport.dirichlet_inflow = tr.optional_number("dirichlet_inflow");
  cfg.transport.mu = tr.optional_number("mu");
  tr.reject_unknown();
  advect::AdParams{cfg.transport.k, cfg.transport.dt, cfg.transport.t_final, cfg.transport.dirichlet_inflow}.validate();
  for (double l : cfg.transport.contour_levels) check(l > 0.0, tr.full("contour_levels"), "levels must be positive");

  Section plume = section("plume");
  if (auto c = plume.point("center")) cfg.transport.plume.center = *c;
  cfg.transport.plume_lonlat = plume.point("lonlat");
  plume.number("amplitude", cfg.transport.plume.amplitude);
  plume.number("radius", cfg.transport.plume.radius);
  plume.number("width", cfg.transport.plume.width);
  plume.reject_unknown();
  cfg.transport.plume.validate();

  Section rom = section("rom");
  rom.integer("n_snapshots", cfg.rom.n_snapshots);
  rom.integer("n_test", cfg.rom.n_test);
  if (auto n = rom.numbers("N_r")) {
    cfg.rom.n_r.clear();
    for (double v : *n) {
      check(v >= 1.0 && v == std::floor(v), rom.full("N_r"), "basis sizes must be positive integers");
      cfg.rom.n_r.push_back(static_cast<int>(v));
    }
    check(!cfg.rom.n_r.empty(), rom.full("N_r"), "needs at least one value");
  }
  rom.integer("N_m", cfg.rom.n_m);
  rom.integer("seed", cfg.rom.seed);
  rom.integer("repetitions", cfg.rom.repetitions);
  rom.reject_unknown();
  check(cfg.rom.n_snapshots >= 2, rom.full("n_snapshots"), "at least 2 snapshots are needed");
  check(cfg.rom.n_test >= 1, rom.full("n_test"), "must be at least 1");
  check(cfg.rom.n_m >= 1, rom.full("N_m"), "must be at least 1");
  check(cfg.rom.repetitions >= 1, rom.full("repetitions"), "must be at least 1");
  for (int n : cfg.rom.n_r) check(n <= cfg.rom.n_snapshots, rom.full("N_r"), "cannot exceed n_snapshots");

  Section out = section("output");
  if (auto d = out.raw("directory")) cfg.output.directory = base_dir / *d;
  else cfg.output.directory = base_dir / cfg.output.directory;
  out.integer("save_interval", cfg.output.save_interval);
  if (auto f = out.raw("formats")) {
    cfg.output.formats.clear();
    for (auto& w : words(*f)) {
      boost::to_lower(w);
      check(w == "vtk" || w == "geojson" || w == "csv", out.full("formats"), "unknown format '" + w + "'");
      cfg.output.formats.insert(w);
    }
  }
  out.boolean("vtk_quadratic", cfg.output.vtk_quadratic);
  out.reject_unknown();
  check(cfg.output.save_interval >= 1, out.full("save_interval"), "must be at least 1");

  return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
  const std::string text = io::read_file(path);
  ScenarioConfig cfg = parse_config(text, path.parent_path());
  cfg.source = path;
  if (!fs::exists(cfg.buildings_path)) {
    throw Error(ErrorKind::Io, "buildings file not found: '" + cfg.buildings_path.string() + "'");
  }
  return cfg;
}

fs::path resolve_output_dir(const Invocation& inv, const ScenarioConfig& config) {
  if (inv.output) return *inv.output;
  if (const char* env = std::getenv("URBANFLOW_OUTPUT_DIR"); env && *env) return env;
  return config.output.directory;
}

}  // namespace urbanflow::cli
