#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <memory>
#include <ostream>

#include <json.hpp>

#include "urbanflow/cli.hpp"
#include "urbanflow/hash.hpp"
#include "urbanflow/ins.hpp"
#include "urbanflow/rom.hpp"

namespace urbanflow::cli {

using nlohmann::ordered_json;

// --- Mesh phase (no file output) ------------------------------------------------------

MeshProducts build_mesh(const ScenarioConfig& cfg) {
  MeshProducts out;
  geo::ParseResult parsed = geo::parse_building_file(io::read_file(cfg.buildings_path));
  for (const auto& r : parsed.rejected) out.warnings.push_back("rejected feature '" + r.id + "': " + r.reason);

  std::optional<geo::GeoOrigin> origin;
  geo::BuildingSet local;
  if (parsed.buildings.polygons.empty()) {
    if (!cfg.mesh.domain) {
      throw Error(ErrorKind::Constraint, "no valid buildings in '" + cfg.buildings_path.string() +
                                             "' and no explicit [mesh] domain");
    }
    local.coordinates = geo::CoordinateKind::LocalMeters;
  } else if (parsed.buildings.coordinates == geo::CoordinateKind::LonLatDegrees) {
    local = geo::project_to_local(parsed.buildings);
    origin = local.origin;
  } else {
    local = parsed.buildings;
  }
  out.buildings = geo::merge_overlapping(local);
  out.buildings.origin = origin;

  geo::DomainSpec domain;
  if (cfg.mesh.domain) {
    domain = geo::make_domain(*cfg.mesh.domain, cfg.wind.direction);
  } else {
    domain = geo::compute_domain_bounds(out.buildings, cfg.wind.direction,
                                        geo::DomainOptions{cfg.mesh.br_max, cfg.mesh.min_clearance});
  }
  const double br = geo::blockage_ratio(out.buildings, domain);
  if (!(br < cfg.mesh.br_max)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "blockage ratio %.4f is not below br_max %.4f", br, cfg.mesh.br_max);
    throw Error(ErrorKind::Constraint, buf);
  }

  mesh::TriangulateOptions topts;
  topts.min_angle_deg = cfg.mesh.min_angle_deg;
  out.mesh = mesh::triangulate(domain, out.buildings, cfg.mesh.size, topts);
  out.quality = mesh::mesh_quality(out.mesh);
  out.domain = io::DomainRecord{domain, origin, br, out.mesh.content_hash()};
  return out;
}

namespace {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Constraint: return "constraint";
    case ErrorKind::Topology: return "topology";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::NonConvergence: return "nonconvergence";
    case ErrorKind::Instability: return "instability";
    case ErrorKind::Internal: return "internal";
  }
  return "internal";
}

std::string mu_tag(double mu) { return io::format_double(mu); }

ordered_json point_json(Point p) { return ordered_json::array({p.x, p.y}); }

ordered_json config_snapshot(const ScenarioConfig& c, std::uint64_t seed) {
  ordered_json j;
  j["buildings_path"] = c.buildings_path.string();
  auto& w = j["wind"];
  w["direction"] = point_json(c.wind.direction);
  w["base_speed_m_s"] = c.wind.base_speed;
  w["nu_m2_s"] = c.wind.nu;
  w["mu"] = c.wind.mu;
  w["mu_range"] = c.wind.mu_range ? ordered_json::array({c.wind.mu_range->first, c.wind.mu_range->second})
                                  : ordered_json(nullptr);
  w["ramp_width_m"] = c.wind.ramp_width;
  auto& m = j["mesh"];
  m["lc_building_m"] = c.mesh.size.lc_building;
  m["lc_gap_m"] = c.mesh.size.lc_gap;
  m["lc_far_m"] = c.mesh.size.lc_far;
  m["gap_distance_m"] = c.mesh.size.gap_distance;
  m["br_max"] = c.mesh.br_max;
  m["min_clearance_m"] = c.mesh.min_clearance;
  m["min_angle_deg"] = c.mesh.min_angle_deg;
  m["domain"] = c.mesh.domain ? ordered_json::array({c.mesh.domain->xmin, c.mesh.domain->ymin, c.mesh.domain->xmax,
                                                     c.mesh.domain->ymax})
                              : ordered_json(nullptr);
  auto& t = j["transport"];
  t["k_m2_s"] = c.transport.k;
  t["dt_s"] = c.transport.dt;
  t["t_final_s"] = c.transport.t_final;
  t["plume"] = {{"center_m", point_json(c.transport.plume.center)},
                {"lonlat", c.transport.plume_lonlat ? point_json(*c.transport.plume_lonlat) : ordered_json(nullptr)},
                {"amplitude_ppm", c.transport.plume.amplitude},
                {"radius_m", c.transport.plume.radius},
                {"width_m", c.transport.plume.width}};
  t["probes_m"] = ordered_json::array();
  for (Point p : c.transport.probes) t["probes_m"].push_back(point_json(p));
  t["contour_levels_ppm"] = c.transport.contour_levels;
  t["dirichlet_inflow_ppm"] = c.transport.dirichlet_inflow ? ordered_json(*c.transport.dirichlet_inflow)
                                                           : ordered_json(nullptr);
  t["mu"] = c.transport.mu ? ordered_json(*c.transport.mu) : ordered_json(nullptr);
  auto& r = j["rom"];
  r["n_snapshots"] = c.rom.n_snapshots;
  r["n_test"] = c.rom.n_test;
  r["N_r"] = c.rom.n_r;
  r["N_m"] = c.rom.n_m;
  r["seed"] = seed;
  r["repetitions"] = c.rom.repetitions;
  auto& o = j["output"];
  o["save_interval"] = c.output.save_interval;
  o["formats"] = c.output.formats;
  o["vtk_quadratic"] = c.output.vtk_quadratic;
  return j;
}

// One command execution: output root, produced-file inventory, timings.
class Run {
 public:
  Run(fs::path root, std::string command, const ScenarioConfig& cfg, std::uint64_t seed, std::ostream& log)
      : root_(std::move(root)), command_(std::move(command)), log_(log) {
    manifest_["tool"] = "urbanflow";
    manifest_["version"] = kToolVersion;
    manifest_["command"] = command_;
    manifest_["config"] = config_snapshot(cfg, seed);
    manifest_["mesh_hash"] = nullptr;
    manifest_["rom_generated"] = false;
    manifest_["contour_format"] = "GeoJSON (RFC 7946), one MultiPolygon feature per level per saved step";
    manifest_["timing_s"] = ordered_json::object();
    manifest_["warnings"] = ordered_json::array();
    manifest_["failures"] = ordered_json::array();
  }

  const fs::path& root() const { return root_; }
  fs::path path(const std::string& rel) const { return root_ / rel; }
  std::ostream& log() { return log_; }

  void write(const std::string& rel, std::string_view content) {
    io::write_file(path(rel), content);
    record(rel);
  }

  /// Adds a file written by other means to the inventory.
  void record(const std::string& rel) {
    const std::string data = io::read_file(path(rel));
    Fnv1a h;
    h.update(data);
    files_[rel] = {data.size(), hex64(h.digest())};
  }

  template <typename F>
  auto phase(const std::string& name, F&& f) {
    log_ << "[" << name << "]\n";
    const auto t0 = std::chrono::steady_clock::now();
    struct Stop {
      Run* run;
      std::string name;
      std::chrono::steady_clock::time_point t0;
      ~Stop() {
        run->manifest_["timing_s"][name] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
    } stop{this, name, t0};
    return f();
  }

  void warn(const std::string& w) {
    log_ << "warning: " << w << '\n';
    manifest_["warnings"].push_back(w);
  }
  void failure(ordered_json f) { manifest_["failures"].push_back(std::move(f)); }
  ordered_json& operator[](const std::string& key) { return manifest_[key]; }

  void finish(const std::string& status, const std::string& error = {}) {
    manifest_["status"] = status;
    if (!error.empty()) manifest_["error"] = error;
    ordered_json inv = ordered_json::array();
    for (const auto& [rel, e] : files_) inv.push_back({{"path", rel}, {"bytes", e.first}, {"fnv1a64", e.second}});
    manifest_["files"] = std::move(inv);
    io::write_file(path(manifest_name()), manifest_.dump(2) + '\n');
  }

  std::string manifest_name() const {
    if (command_ == "run-all") return "manifest.json";
    std::string n = command_;
    std::replace(n.begin(), n.end(), ' ', '_');
    return "manifest_" + n + ".json";
  }

 private:
  fs::path root_;
  std::string command_;
  std::ostream& log_;
  ordered_json manifest_;
  std::map<std::string, std::pair<std::size_t, std::string>> files_;
};

// Mesh and domain as persisted by the mesh phase.
struct Persisted {
  std::unique_ptr<mesh::TriMesh> mesh;
  io::DomainRecord domain;
  std::unique_ptr<ins::TaylorHood> spaces;

  std::optional<geo::LocalFrame> frame() const {
    if (domain.origin) return geo::LocalFrame(*domain.origin);
    return std::nullopt;
  }
};

Persisted load_persisted(const Run& run) {
  Persisted p;
  p.mesh = std::make_unique<mesh::TriMesh>(io::deserialize_mesh(io::read_file(run.path("mesh/mesh.txt"))));
  p.domain = io::deserialize_domain(io::read_file(run.path("mesh/domain.json")));
  if (p.domain.mesh_hash != p.mesh->content_hash()) {
    throw Error(ErrorKind::Io, "mesh/domain.json refers to mesh " + hex64(p.domain.mesh_hash) + " but mesh/mesh.txt is " +
                                   hex64(p.mesh->content_hash()));
  }
  p.spaces = std::make_unique<ins::TaylorHood>(*p.mesh);
  return p;
}

void cmd_mesh(Run& run, const ScenarioConfig& cfg) {
  const MeshProducts mp = build_mesh(cfg);
  for (const auto& w : mp.warnings) run.warn(w);
  run["mesh_hash"] = hex64(mp.mesh.content_hash());
  run["blockage_ratio"] = mp.domain.blockage_ratio;
  run.write("mesh/mesh.txt", io::serialize_mesh(mp.mesh));
  run.write("mesh/domain.json", io::serialize_domain(mp.domain));
  if (cfg.output.wants("vtk")) run.write("mesh/mesh.vtk", io::vtk_mesh(mp.mesh));
  if (cfg.output.wants("csv")) {
    io::CsvWriter csv({"min_angle_deg", "max_circumradius_ratio", "triangle_count", "vertex_count", "blockage_ratio"});
    csv.cell(mp.quality.min_angle_deg)
        .cell(mp.quality.max_circumradius_ratio)
        .cell(static_cast<long long>(mp.quality.triangle_count))
        .cell(static_cast<long long>(mp.quality.vertex_count))
        .cell(mp.domain.blockage_ratio);
    csv.end_row();
    run.write("mesh/quality.csv", csv.text());
  }
  run.log() << "  " << mp.quality.triangle_count << " triangles, min angle " << mp.quality.min_angle_deg
            << " deg, BR " << mp.domain.blockage_ratio << '\n';
}

ins::LiftingFunction make_lifting(const Persisted& p, const ScenarioConfig& cfg) {
  return ins::build_lifting(*p.spaces, p.domain.domain, ins::InflowProfile{cfg.wind.base_speed, cfg.wind.ramp_width});
}

ins::InsParams ins_params(const ScenarioConfig& cfg, double mu) {
  ins::InsParams params;
  params.nu = cfg.wind.nu;
  params.mu = mu;
  params.base_inflow_speed = cfg.wind.base_speed;
  return params;
}

void write_wind_vtk(Run& run, const ScenarioConfig& cfg, const Persisted& p, const std::string& stem,
                    const fem::Vector& u, const fem::Vector* pressure) {
  if (!cfg.output.wants("vtk")) return;
  std::vector<io::PointArray> arrays{io::p2_vector_at_vertices("velocity", p.spaces->velocity, u)};
  if (pressure) arrays.push_back(io::p1_scalar("pressure", p.spaces->pressure, *pressure));
  run.write(stem + ".vtk", io::vtk_unstructured(*p.mesh, arrays));
  if (cfg.output.vtk_quadratic) {
    const mesh::TriMesh fine = io::quadratic_subdivision(p.spaces->velocity);
    run.write(stem + "_quadratic.vtk",
              io::vtk_unstructured(fine, {io::p2_vector_at_nodes("velocity", p.spaces->velocity, u)}));
  }
}

void cmd_wind(Run& run, const ScenarioConfig& cfg) {
  const Persisted p = load_persisted(run);
  run["mesh_hash"] = hex64(p.mesh->content_hash());
  const ins::LiftingFunction lifting = make_lifting(p, cfg);
  io::CsvWriter csv({"mu", "Re", "newton_iters", "residual"});
  io::CsvWriter failed({"mu", "newton_iters", "residual", "reason"});
  for (double mu : cfg.wind.mu) {
    try {
      const ins::WindField w = ins::solve_steady_ins(*p.spaces, lifting, ins_params(cfg, mu));
      const double re = ins::reynolds_number(w, *p.spaces, p.domain.domain, cfg.wind.nu);
      const std::string stem = "wind/wind_mu_" + mu_tag(mu);
      io::save_wind(run.path(stem + ".bin"), {p.mesh->content_hash(), mu, false, w.velocity, w.pressure});
      run.record(stem + ".bin");
      write_wind_vtk(run, cfg, p, stem, w.velocity, &w.pressure);
      csv.cell(mu).cell(re).cell(static_cast<long long>(w.newton_iterations)).cell(w.residual_history.back());
      csv.end_row();
      run.log() << "  mu " << mu << ": Re " << re << ", " << w.newton_iterations << " Newton iterations\n";
    } catch (const NonConvergenceError& e) {
      const auto& h = e.residual_history();
      const double last = h.empty() ? std::numeric_limits<double>::quiet_NaN() : h.back();
      failed.cell(mu).cell(static_cast<long long>(h.empty() ? 0 : h.size() - 1)).cell(last).cell(e.what());
      failed.end_row();
      run.warn("wind solve failed at mu " + mu_tag(mu) + ": " + e.what());
      run.failure({{"phase", "wind"}, {"mu", mu}, {"reason", e.what()}});
    }
  }
  if (cfg.output.wants("csv")) {
    run.write("wind/wind.csv", csv.text());
    if (failed.rows()) run.write("wind/failures.csv", failed.text());
  }
  if (csv.rows() == 0) throw Error(ErrorKind::NonConvergence, "no wind solve converged");
}

void cmd_transport(Run& run, const ScenarioConfig& cfg) {
  const Persisted p = load_persisted(run);
  const std::uint64_t hash = p.mesh->content_hash();
  run["mesh_hash"] = hex64(hash);
  const double mu = cfg.transport.mu.value_or(cfg.wind.mu.front());
  const io::StoredWind wind = io::load_wind(run.path("wind/wind_mu_" + mu_tag(mu) + ".bin"), hash);
  run["transport_wind_mu"] = mu;

  advect::InitialPlume plume = cfg.transport.plume;
  const auto frame = p.frame();
  if (cfg.transport.plume_lonlat) {
    if (!frame) throw Error(ErrorKind::Config, "[plume] lonlat needs a geo-referenced buildings file");
    plume.center = frame->forward(*cfg.transport.plume_lonlat);
  }
  const fem::DofMap space(*p.mesh, fem::SpaceKind::ScalarP1);
  const advect::ConcentrationField c0 = advect::gaussian_initial(space, plume);
  advect::AdParams params;
  params.k = cfg.transport.k;
  params.dt = cfg.transport.dt;
  params.t_final = cfg.transport.t_final;
  params.dirichlet_inflow = cfg.transport.dirichlet_inflow;
  const advect::AdSystem system = advect::assemble_ad_system(space, p.spaces->velocity, wind.velocity, params);

  auto on_save = [&](std::size_t step, const advect::ConcentrationField& c) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "%06zu", step);
    if (cfg.output.wants("vtk")) {
      run.write(std::string("transport/concentration_") + tag + ".vtk",
                io::vtk_unstructured(*p.mesh, {io::p1_scalar("concentration_ppm", space, c.values)}));
    }
    if (cfg.output.wants("geojson")) {
      std::vector<io::ContourLevel> levels;
      for (double l : cfg.transport.contour_levels) levels.push_back({l, io::contour_polygons(*p.mesh, c.values, l)});
      run.write(std::string("transport/contours_") + tag + ".geojson", io::contours_geojson(levels, frame, c.time, step));
    }
  };
  const advect::TransientResult result =
      advect::run_transient(space, c0, system, params, cfg.transport.probes, cfg.output.save_interval, on_save);

  if (cfg.output.wants("csv")) {
    io::CsvWriter probes({"time_s", "probe_id", "x_m", "y_m", "concentration_ppm"});
    for (const auto& s : result.probes) {
      probes.cell(s.time).cell(static_cast<long long>(s.probe)).cell(s.position.x).cell(s.position.y).cell(s.value);
      probes.end_row();
    }
    run.write("transport/probes.csv", probes.text());
    io::CsvWriter mass({"step", "time_s", "mass", "min_ppm", "max_ppm"});
    auto row = [&](const advect::StepRecord& r) {
      mass.cell(static_cast<long long>(r.step)).cell(r.time).cell(r.mass).cell(r.min).cell(r.max);
      mass.end_row();
    };
    row(result.initial);
    for (const auto& r : result.records) row(r);
    run.write("transport/mass.csv", mass.text());
  }
  run["min_undershoot_ppm"] = result.min_undershoot;
  run.log() << "  " << result.records.size() << " steps, final mass " << result.records.back().mass << '\n';
}

std::pair<double, double> rom_range(const ScenarioConfig& cfg) {
  if (!cfg.wind.mu_range) throw Error(ErrorKind::Config, "[wind] mu_range is required for the ROM");
  return *cfg.wind.mu_range;
}

void cmd_rom_offline(Run& run, const ScenarioConfig& cfg) {
  const Persisted p = load_persisted(run);
  const std::uint64_t hash = p.mesh->content_hash();
  run["mesh_hash"] = hex64(hash);
  const auto [lo, hi] = rom_range(cfg);
  const rom::FomContext fom(*p.spaces, make_lifting(p, cfg), ins_params(cfg, 1.0));
  const rom::SnapshotSet snaps = rom::collect_snapshots(fom, rom::equispaced({lo, hi, cfg.rom.n_snapshots}));
  for (const auto& w : snaps.warnings) run.warn(w);
  for (double mu : snaps.failed) {
    run.warn("snapshot solve failed at mu " + mu_tag(mu));
    run.failure({{"phase", "rom offline"}, {"mu", mu}, {"reason", "nonconvergence"}});
  }
  const int n_r = *std::max_element(cfg.rom.n_r.begin(), cfg.rom.n_r.end());
  const int ns = static_cast<int>(snaps.mu.size());
  if (n_r > ns || cfg.rom.n_m > ns) {
    throw Error(ErrorKind::Constraint, "N_r and N_m cannot exceed the " + std::to_string(ns) + " converged snapshots");
  }
  const rom::ReducedBasis basis = rom::pod(snaps.velocity, n_r, &fom.mass());
  const rom::DeimData deim = rom::deim(snaps.nonlinearity, cfg.rom.n_m);
  rom::RomArtifact art;
  art.mesh_hash = hash;
  art.ops = rom::project_operators(fom, basis, deim);
  art.deim_indices = deim.indices;
  art.deim_basis = deim.U;
  art.eigenvalues = basis.eigenvalues;
  art.training_mu = snaps.mu;
  fs::create_directories(run.path("rom"));
  rom::save_artifact(run.path("rom/artifact.bin").string(), art);
  run.record("rom/artifact.bin");
  run["deim_condition"] = deim.condition;

  if (cfg.output.wants("csv")) {
    io::CsvWriter eig({"mode", "eigenvalue_normalized"});
    for (std::size_t i = 0; i < basis.eigenvalues.size(); ++i) {
      eig.cell(static_cast<long long>(i + 1)).cell(basis.eigenvalues[i]);
      eig.end_row();
    }
    run.write("rom/eigenvalues.csv", eig.text());
    io::CsvWriter s({"mu", "status"});
    std::vector<std::pair<double, const char*>> all;
    for (double mu : snaps.mu) all.emplace_back(mu, "ok");
    for (double mu : snaps.failed) all.emplace_back(mu, "failed");
    std::sort(all.begin(), all.end());
    for (const auto& [mu, st] : all) {
      s.cell(mu).cell(std::string_view(st));
      s.end_row();
    }
    run.write("rom/snapshots.csv", s.text());
  }
  run.log() << "  " << ns << " snapshots, N_r " << n_r << ", N_m " << cfg.rom.n_m << '\n';
}

void cmd_rom_online(Run& run, const ScenarioConfig& cfg, std::optional<double> mu_override) {
  const Persisted p = load_persisted(run);
  const std::uint64_t hash = p.mesh->content_hash();
  run["mesh_hash"] = hex64(hash);
  const rom::RomArtifact art = rom::load_artifact(run.path("rom/artifact.bin").string(), hash);
  const double mu = mu_override.value_or(cfg.wind.mu.front());
  const rom::RomSolution s = rom::solve_rom(mu, art.ops);
  if (s.extrapolated) run.warn("mu " + mu_tag(mu) + " lies outside the training range by more than 10%");
  const fem::Vector u = s.reconstruct(art.ops);
  const std::string stem = "wind/rom_mu_" + mu_tag(mu);
  io::save_wind(run.path(stem + ".bin"), {hash, mu, true, u, fem::Vector()});
  run.record(stem + ".bin");
  write_wind_vtk(run, cfg, p, stem, u, nullptr);
  run["rom_generated"] = true;
  run["rom_online"] = {{"mu", mu},
                       {"N_r", art.ops.n_r()},
                       {"newton_iters", s.iterations},
                       {"residual", s.residual_history.back()},
                       {"extrapolated", s.extrapolated}};
  run.log() << "  mu " << mu << ": " << s.iterations << " reduced Newton iterations\n";
}

void cmd_rom_benchmark(Run& run, const ScenarioConfig& cfg, std::uint64_t seed) {
  const Persisted p = load_persisted(run);
  const std::uint64_t hash = p.mesh->content_hash();
  run["mesh_hash"] = hex64(hash);
  const rom::RomArtifact art = rom::load_artifact(run.path("rom/artifact.bin").string(), hash);
  for (int n : cfg.rom.n_r) {
    if (n > art.ops.n_r()) {
      throw Error(ErrorKind::Config, "[rom] N_r " + std::to_string(n) + " exceeds the artifact basis size " +
                                         std::to_string(art.ops.n_r()));
    }
  }
  const auto [lo, hi] = rom_range(cfg);
  const rom::FomContext fom(*p.spaces, make_lifting(p, cfg), ins_params(cfg, 1.0));
  const auto test = rom::random_samples({lo, hi, cfg.rom.n_test}, seed, art.training_mu);
  const rom::RomBenchmark b = rom::benchmark(fom, art.ops, test, cfg.rom.n_r, cfg.rom.repetitions);
  for (double mu : b.failed) {
    run.warn("benchmark FOM solve failed at mu " + mu_tag(mu));
    run.failure({{"phase", "rom benchmark"}, {"mu", mu}, {"reason", "nonconvergence"}});
  }
  for (int n : cfg.rom.n_r) {
    io::CsvWriter csv({"mu", "error_rel", "t_fom_s", "t_rom_s", "speedup"});
    for (const auto& r : b.rows) {
      if (r.n_r != n) continue;
      csv.cell(r.mu).cell(r.error_rel).cell(r.t_fom_s).cell(r.t_rom_s).cell(r.speedup);
      csv.end_row();
    }
    run.write("rom/benchmark_nr" + std::to_string(n) + ".csv", csv.text());
    run.log() << "  N_r " << n << ": max error " << b.max_error(n) << ", min speedup " << b.min_speedup(n) << '\n';
  }
}

}  // namespace

int execute(const Invocation& inv, std::ostream& log, std::ostream& err) {
  std::unique_ptr<Run> run;
  try {
    const ScenarioConfig cfg = load_config(inv.config);
    const std::uint64_t seed = inv.seed.value_or(cfg.rom.seed);
    std::string name = inv.command;
    if (inv.command == "rom") {
      if (inv.phase != "offline" && inv.phase != "online" && inv.phase != "benchmark") {
        throw Error(ErrorKind::Config, "rom needs a phase: offline, online or benchmark");
      }
      name += " " + inv.phase;
    }
    run = std::make_unique<Run>(resolve_output_dir(inv, cfg), name, cfg, seed, log);

    if (inv.command == "mesh") {
      run->phase("mesh", [&] { cmd_mesh(*run, cfg); });
    } else if (inv.command == "wind") {
      run->phase("wind", [&] { cmd_wind(*run, cfg); });
    } else if (inv.command == "transport") {
      run->phase("transport", [&] { cmd_transport(*run, cfg); });
    } else if (inv.command == "rom" && inv.phase == "offline") {
      run->phase("rom_offline", [&] { cmd_rom_offline(*run, cfg); });
    } else if (inv.command == "rom" && inv.phase == "online") {
      run->phase("rom_online", [&] { cmd_rom_online(*run, cfg, inv.mu); });
    } else if (inv.command == "rom") {
      run->phase("rom_benchmark", [&] { cmd_rom_benchmark(*run, cfg, seed); });
    } else if (inv.command == "run-all") {
      run->phase("mesh", [&] { cmd_mesh(*run, cfg); });
      run->phase("wind", [&] { cmd_wind(*run, cfg); });
      run->phase("transport", [&] { cmd_transport(*run, cfg); });
      if (cfg.wind.mu_range) {
        run->phase("rom_offline", [&] { cmd_rom_offline(*run, cfg); });
        run->phase("rom_online", [&] { cmd_rom_online(*run, cfg, inv.mu); });
      }
    } else {
      throw Error(ErrorKind::Config, "unknown command '" + inv.command + "'");
    }
    run->finish("ok");
    return kExitOk;
  } catch (const Error& e) {
    err << "error [" << kind_name(e.kind()) << "]: " << e.what() << '\n';
    if (run) {
      try {
        run->finish("error", e.what());
      } catch (const std::exception&) {
      }
    }
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error [internal]: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace urbanflow::cli
