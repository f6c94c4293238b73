// One PASS/FAIL line per acceptance criterion. Tolerances and runtime limits
// are fixed here; the exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flows.hpp"
#include "transport.hpp"
#include "urbanflow/advect.hpp"
#include "urbanflow/cli.hpp"
#include "urbanflow/hash.hpp"
#include "urbanflow/ins.hpp"
#include "urbanflow/rom.hpp"

using namespace urbanflow;
namespace fs = std::filesystem;

namespace {

const fs::path kData = URBANFLOW_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

advect::AdParams ad_params(double k, double dt, double t_final) {
  advect::AdParams p;
  p.k = k;
  p.dt = dt;
  p.t_final = t_final;
  return p;
}

// --- 1: blockage ratio ------------------------------------------------------------

// Covered length of a set of intervals by an event sweep.
double covered_length(std::vector<std::pair<double, double>> iv) {
  std::vector<std::pair<double, int>> events;
  for (auto [a, b] : iv) {
    events.emplace_back(a, +1);
    events.emplace_back(b, -1);
  }
  std::sort(events.begin(), events.end(), [](auto x, auto y) {
    return x.first < y.first || (x.first == y.first && x.second > y.second);
  });
  double total = 0.0, start = 0.0;
  int depth = 0;
  for (auto [x, d] : events) {
    if (depth == 0 && d > 0) start = x;
    depth += d;
    if (depth == 0 && d < 0) total += x - start;
  }
  return total;
}

Outcome blockage_ratio() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> pos(-100.0, 100.0), size(3.0, 40.0), angle(0.0, std::numbers::pi);
  std::uniform_int_distribution<int> count(1, 8), axis(0, 3);
  const Point axes[4] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
  double worst_br = 0.0, worst_diff = 0.0;
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    geo::BuildingSet b;
    b.coordinates = geo::CoordinateKind::LocalMeters;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const Point c{pos(rng), pos(rng)};
      const double w = size(rng), h = size(rng), th = angle(rng);
      const Point ex{std::cos(th), std::sin(th)}, ey{-std::sin(th), std::cos(th)};
      b.polygons.push_back({{c - 0.5 * w * ex - 0.5 * h * ey, c + 0.5 * w * ex - 0.5 * h * ey,
                             c + 0.5 * w * ex + 0.5 * h * ey, c - 0.5 * w * ex + 0.5 * h * ey},
                            std::to_string(i)});
    }
    const Point wind = axes[axis(rng)];
    const geo::DomainSpec d = geo::compute_domain_bounds(b, wind);
    const double br = geo::blockage_ratio(b, d);

    const bool cross_x = wind.x == 0.0;
    const double lo = cross_x ? d.bounds.xmin : d.bounds.ymin, hi = cross_x ? d.bounds.xmax : d.bounds.ymax;
    std::vector<std::pair<double, double>> iv;
    for (const auto& p : b.polygons) {
      double a = INFINITY, z = -INFINITY;
      for (Point q : p.ring) {
        a = std::min(a, cross_x ? q.x : q.y);
        z = std::max(z, cross_x ? q.x : q.y);
      }
      iv.emplace_back(std::max(a, lo), std::min(z, hi));
    }
    const double oracle = covered_length(iv) / (hi - lo);
    worst_br = std::max(worst_br, br);
    worst_diff = std::max(worst_diff, std::fabs(br - oracle));
    if (!(br < 0.17)) ++violations;
  }
  return {violations == 0 && worst_diff <= 1e-12,
          fmt("100 clusters: max BR %.6f (< 0.17), %d violations, max |BR - oracle| %.2e (<= 1e-12)", worst_br,
              violations, worst_diff)};
}

// --- 2: mesh validity -----------------------------------------------------------------

Outcome mesh_validity() {
  const cli::ScenarioConfig cfg = cli::load_config(kData / "scenario_demo.ini");
  const cli::MeshProducts mp = cli::build_mesh(cfg);
  const mesh::TriMesh& m = mp.mesh;
  const Box box = mp.domain.domain.bounds;

  std::map<std::pair<int, int>, int> uses;
  for (const auto& t : m.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      ++uses[{std::min(a, b), std::max(a, b)}];
    }
  }
  int bad_count = 0, stray_boundary = 0;
  std::size_t boundary = 0;
  const double scale = std::max(box.width(), box.height());
  for (const auto& [e, n] : uses) {
    if (n != 1 && n != 2) ++bad_count;
    if (n != 1) continue;
    ++boundary;
    const Point a = m.vertices()[e.first], b = m.vertices()[e.second];
    const Point mid = 0.5 * (a + b);
    const double tol = 1e-9 * scale;
    bool on = std::fabs(mid.x - box.xmin) < tol || std::fabs(mid.x - box.xmax) < tol ||
              std::fabs(mid.y - box.ymin) < tol || std::fabs(mid.y - box.ymax) < tol;
    for (const auto& p : mp.buildings.polygons) {
      for (std::size_t i = 0; i < p.ring.size() && !on; ++i) {
        on = point_segment_distance(mid, p.ring[i], p.ring[(i + 1) % p.ring.size()]) < tol;
      }
    }
    if (!on) ++stray_boundary;
  }
  const bool conform = bad_count == 0 && stray_boundary == 0 && boundary == m.boundary_edges().size();

  double min_angle = 180.0;
  for (const auto& t : m.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const Point p = m.vertices()[t[k]], q = m.vertices()[t[(k + 1) % 3]], r = m.vertices()[t[(k + 2) % 3]];
      const Point u = q - p, v = r - p;
      min_angle = std::min(min_angle, std::atan2(std::fabs(cross(u, v)), dot(u, v)) * 180.0 / std::numbers::pi);
    }
  }

  double tri_area = 0.0;
  for (const auto& t : m.triangles()) {
    const Point a = m.vertices()[t[0]], b = m.vertices()[t[1]], c = m.vertices()[t[2]];
    tri_area += 0.5 * cross(b - a, c - a);
  }
  double expected = box.area();
  for (const auto& p : mp.buildings.polygons) expected -= std::fabs(signed_area(p.ring));
  const double area_rel = std::fabs(tri_area - expected) / expected;

  const double lc_gap = cfg.mesh.size.lc_gap, gap = cfg.mesh.size.gap_distance;
  int gap_tris = 0, gap_bad = 0;
  double worst = 0.0;
  for (const auto& t : m.triangles()) {
    const Point a = m.vertices()[t[0]], b = m.vertices()[t[1]], c = m.vertices()[t[2]];
    const Point g = (1.0 / 3.0) * (a + b + c);
    double dist = INFINITY;
    for (const auto& p : mp.buildings.polygons) {
      for (std::size_t i = 0; i < p.ring.size(); ++i) {
        dist = std::min(dist, point_segment_distance(g, p.ring[i], p.ring[(i + 1) % p.ring.size()]));
      }
    }
    if (dist > gap) continue;
    ++gap_tris;
    const double la = distance(b, c), lb = distance(c, a), lcc = distance(a, b);
    const double R = la * lb * lcc / (4.0 * 0.5 * std::fabs(cross(b - a, c - a)));
    worst = std::max(worst, R / lc_gap);
    if (R > 1.5 * lc_gap) ++gap_bad;
  }

  return {conform && min_angle >= 20.0 && area_rel <= 1e-9 && gap_tris > 0 && gap_bad == 0,
          fmt("%zu triangles; conforming %s; min angle %.3f deg (>= 20); area rel err %.2e (<= 1e-9); "
              "%d gap triangles, max R/lc_gap %.3f (<= 1.5)",
              m.triangle_count(), conform ? "yes" : "no", min_angle, area_rel, gap_tris, worst)};
}

// --- 3: Taylor-Hood convergence -----------------------------------------------------------

Outcome taylor_hood() {
  const int ns[4] = {4, 8, 16, 32};
  testing::MmsErrors e[4];
  for (int i = 0; i < 4; ++i) e[i] = testing::solve_manufactured(ns[i], 0.5);
  double rv = INFINITY, rp = INFINITY;
  std::string rates;
  for (int i = 0; i < 3; ++i) {
    const double a = std::log2(e[i].velocity_l2 / e[i + 1].velocity_l2);
    const double b = std::log2(e[i].pressure_l2 / e[i + 1].pressure_l2);
    rv = std::min(rv, a);
    rp = std::min(rp, b);
    rates += fmt(" %d->%d: %.2f/%.2f;", ns[i], ns[i + 1], a, b);
  }
  return {rv >= 2.5 && rp >= 1.8,
          fmt("velocity/pressure L2 orders%s min %.2f (>= 2.5) / %.2f (>= 1.8)", rates.c_str(), rv, rp)};
}

// --- 4: Poiseuille channel -----------------------------------------------------------------

Outcome channel() {
  const double width = 1.0, length = 8.0, nu = 1.0;
  const Box box{0.0, 0.0, width, length};
  const geo::DomainSpec domain = geo::make_domain(box, {0.0, 1.0});
  geo::BuildingSet none;
  none.coordinates = geo::CoordinateKind::LocalMeters;
  const mesh::TriMesh m = mesh::triangulate(domain, none, {0.08, 0.08, 0.08, 1.0});
  const ins::TaylorHood th(m);
  const ins::LiftingFunction lift = ins::build_lifting(th, domain, {1.0, 0.0});
  ins::InsParams params;
  params.nu = nu;
  params.mu = 1.0;
  const ins::WindField w = ins::solve_steady_ins(th, lift, params);
  const double re = ins::reynolds_number(w, th, domain, nu);

  const mesh::PointLocator loc(m);
  const double y = length * (1.0 - 1e-12);
  const int n = 2000;  // Simpson panels across the outflow section
  double flux = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = std::clamp(width * i / n, 1e-12, width - 1e-12);
    const auto u = fem::evaluate_vector(th.velocity, w.velocity, loc, {x, y});
    if (!u) return {false, "outflow sample outside the mesh"};
    const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    flux += wgt * u->y;
  }
  flux *= width / n / 3.0;
  const double mean = flux / width;
  const double center = fem::evaluate_vector(th.velocity, w.velocity, loc, {0.5 * width, y})->y;
  const double ratio = center / mean;
  const double err = std::fabs(ratio - 1.5) / 1.5;
  return {err <= 0.02, fmt("%zu triangles, Re %.2f; outflow centerline/mean %.5f vs 1.5, rel err %.2e (<= 2e-2)",
                           m.triangle_count(), re, ratio, err)};
}

// --- 5: transport consistency and conservation ------------------------------------------------

Outcome ad_consistency() {
  std::string detail;
  bool pass = true;

  {  // constant field under a computed wind
    const cli::ScenarioConfig cfg = cli::load_config(kData / "scenario_demo.ini");
    const cli::MeshProducts mp = cli::build_mesh(cfg);
    const ins::TaylorHood th(mp.mesh);
    const auto lift = ins::build_lifting(th, mp.domain.domain, {cfg.wind.base_speed, 0.0});
    ins::InsParams ip;
    ip.nu = cfg.wind.nu;
    ip.base_inflow_speed = cfg.wind.base_speed;
    const ins::WindField w = ins::solve_steady_ins(th, lift, ip);
    const fem::DofMap p1(mp.mesh, fem::SpaceKind::ScalarP1);
    const advect::AdParams ap = ad_params(0.5, 1.0, 10.0);
    const auto sys = advect::assemble_ad_system(p1, th.velocity, w.velocity, ap);
    advect::ConcentrationField c{fem::Vector::Ones(static_cast<Eigen::Index>(p1.size())), 0.0};
    double drift = 0.0;
    for (int s = 0; s < 10; ++s) {
      c = advect::step(c, sys);
      drift = std::max(drift, (c.values.array() - 1.0).abs().maxCoeff());
    }
    pass = pass && drift <= 1e-10;
    detail += fmt("constant field max drift %.2e (<= 1e-10); ", drift);
  }

  const Box box{-20, -20, 20, 20};
  const mesh::TriMesh m = mesh::tag_boundaries(mesh::structured_rectangle(box, 80, 80), geo::make_domain(box, {0, 1}));
  const ins::TaylorHood th(m);
  const fem::DofMap p1(m, fem::SpaceKind::ScalarP1);
  const fem::Vector still = fem::Vector::Zero(static_cast<Eigen::Index>(th.velocity.size()));
  const double k = 0.5, dt = 0.1;
  const advect::AdParams ap = ad_params(k, dt, 100 * dt);
  const auto sys = advect::assemble_ad_system(p1, th.velocity, still, ap);
  advect::ConcentrationField c = advect::gaussian_initial(p1, {{0, 0}, 1e4, 12.0, 2.0});

  double worst_mass = 0.0, worst_var = 0.0;
  testing::Moments prev = testing::moments(p1, c.values);
  double prev_mass = advect::total_mass(sys, c.values);
  const double mass0 = prev_mass;
  for (int s = 0; s < 100; ++s) {
    c = advect::step(c, sys);
    const double mass = advect::total_mass(sys, c.values);
    worst_mass = std::max(worst_mass, std::fabs(mass - prev_mass) / mass0);
    prev_mass = mass;
    const testing::Moments mo = testing::moments(p1, c.values);
    for (double g : {mo.var_x - prev.var_x, mo.var_y - prev.var_y}) {
      worst_var = std::max(worst_var, std::fabs(g / (2.0 * k * dt) - 1.0));
    }
    prev = mo;
  }
  pass = pass && worst_mass <= 1e-9 && worst_var <= 0.05;
  detail += fmt("zero-wind mass drift max %.2e per step (<= 1e-9); variance growth vs 2k dt max rel err %.2e "
                "(<= 5e-2) over 100 steps",
                worst_mass, worst_var);
  return {pass, detail};
}

// --- 6: plume advection -------------------------------------------------------------------

Outcome plume() {
  const Box box{-30, -20, 30, 100};
  const mesh::TriMesh m = mesh::tag_boundaries(mesh::structured_rectangle(box, 60, 120), geo::make_domain(box, {0, 1}));
  const ins::TaylorHood th(m);
  const fem::DofMap p1(m, fem::SpaceKind::ScalarP1);
  const Point u{0.0, 1.0};
  const fem::Vector wind = fem::interpolate(th.velocity, [u](Point) { return u; });
  const double dt = 0.5, t_final = 50.0;
  const advect::AdParams ap = ad_params(0.1, dt, t_final);
  const auto sys = advect::assemble_ad_system(p1, th.velocity, wind, ap);
  const advect::InitialPlume pl{{0, 0}, 1e4, 12.0, 4.0};
  const advect::ConcentrationField c0 = advect::gaussian_initial(p1, pl);
  const auto result = advect::run_transient(p1, c0, sys, ap, {});
  const testing::Moments a = testing::moments(p1, c0.values), b = testing::moments(p1, result.final.values);
  const double travelled = b.center.y - a.center.y;
  const double expected = u.y * dt * static_cast<double>(ap.step_count());
  const double err = std::fabs(travelled - expected) / expected;
  return {err <= 0.05 && c0.values.maxCoeff() > 0.99e4,
          fmt("peak %.0f ppm; center of mass moved %.4f m vs integral of u %.1f m, rel err %.2e (<= 5e-2)",
              c0.values.maxCoeff(), travelled, expected, err)};
}

// --- 7-10: reduced-order model on the desk-scale fixture ---------------------------------------

struct RomFixture {
  cli::ScenarioConfig cfg;
  cli::MeshProducts mp;
  std::unique_ptr<ins::TaylorHood> th;
  std::unique_ptr<rom::FomContext> fom;
  rom::SnapshotSet snaps;
  double re_min = 0.0, re_max = 0.0;
  double snapshot_seconds = 0.0;

  RomFixture() {
    const auto t0 = Clock::now();
    cfg = cli::load_config(kData / "rom_fixture.ini");
    mp = cli::build_mesh(cfg);
    th = std::make_unique<ins::TaylorHood>(mp.mesh);
    auto lift = ins::build_lifting(*th, mp.domain.domain, {cfg.wind.base_speed, cfg.wind.ramp_width});
    ins::InsParams p;
    p.nu = cfg.wind.nu;
    p.base_inflow_speed = cfg.wind.base_speed;
    fom = std::make_unique<rom::FomContext>(*th, std::move(lift), p);
    const auto [lo, hi] = *cfg.wind.mu_range;
    snaps = rom::collect_snapshots(*fom, rom::equispaced({lo, hi, cfg.rom.n_snapshots}));
    auto re = [&](std::size_t i) {
      const fem::Vector u = snaps.velocity.col(static_cast<Eigen::Index>(i)) + snaps.mu[i] * fom->lifting().velocity;
      return ins::max_speed(th->velocity, u) * mp.domain.domain.characteristic_length / cfg.wind.nu;
    };
    re_min = re(0);
    re_max = re(snaps.mu.size() - 1);
    snapshot_seconds = seconds_since(t0);
  }
};

RomFixture& rom_fixture() {
  static RomFixture f;
  return f;
}

struct RomResults {
  rom::ReducedBasis basis;
  rom::DeimData deim;
  rom::RomBenchmark bench;
  std::vector<double> test_mu;
  double seconds = 0.0;
};

Outcome pod_spectrum() {
  RomFixture& f = rom_fixture();
  const rom::ReducedBasis basis = rom::pod(f.snaps.velocity, 10, &f.fom->mass());
  const double l20 = basis.eigenvalues.at(19);
  const bool range_ok = f.re_min >= 5.0 && f.re_max <= 100.0;
  return {range_ok && f.snaps.mu.size() == 50 && l20 <= 1e-6,
          fmt("%zu snapshots (%zu failed), Re %.2f..%.2f (within [5, 100]); lambda_20/lambda_1 %.2e (<= 1e-6), "
              "lambda_10/lambda_1 %.2e",
              f.snaps.mu.size(), f.snaps.failed.size(), f.re_min, f.re_max, l20, basis.eigenvalues.at(9))};
}

RomResults& rom_results() {
  static RomResults r = [] {
    RomFixture& f = rom_fixture();
    const auto t0 = Clock::now();
    RomResults out;
    out.basis = rom::pod(f.snaps.velocity, 10, &f.fom->mass());
    out.deim = rom::deim(f.snaps.nonlinearity, f.cfg.rom.n_m);
    const rom::RomOperators ops = rom::project_operators(*f.fom, out.basis, out.deim);
    const auto [lo, hi] = *f.cfg.wind.mu_range;
    out.test_mu = rom::random_samples({lo, hi, f.cfg.rom.n_test}, f.cfg.rom.seed, f.snaps.mu);
    out.bench = rom::benchmark(*f.fom, ops, out.test_mu, {2, 4, 6, 8, 10}, f.cfg.rom.repetitions);
    out.seconds = seconds_since(t0);
    return out;
  }();
  return r;
}

Outcome rom_accuracy(double& elapsed) {
  RomFixture& f = rom_fixture();
  RomResults& r = rom_results();
  elapsed = f.snapshot_seconds + r.seconds;
  std::string errs;
  for (int n : {2, 4, 6, 8, 10}) errs += fmt(" N_r=%d: %.2e;", n, r.bench.max_error(n));
  const double e6 = r.bench.max_error(6), e10 = r.bench.max_error(10);
  const bool complete = r.bench.failed.empty() && r.bench.rows.size() == 5 * r.test_mu.size() && r.test_mu.size() == 20;
  return {complete && e6 < 0.02 && e10 < 0.001,
          fmt("20 test samples, N_m %d; max relative error%s N_r=6 %.2e (< 2e-2), N_r=10 %.2e (< 1e-3)",
              r.deim.n_m(), errs.c_str(), e6, e10)};
}

Outcome rom_speedup() {
  RomResults& r = rom_results();
  double worst = INFINITY;
  std::string s;
  for (int n : {2, 4, 6, 8, 10}) {
    worst = std::min(worst, r.bench.min_speedup(n));
    s += fmt(" N_r=%d: %.1f;", n, r.bench.min_speedup(n));
  }
  return {r.bench.failed.empty() && !r.bench.rows.empty() && worst > 1.0,
          fmt("min speedup per N_r%s overall %.1f (> 1)", s.c_str(), worst)};
}

Outcome deim_oracle() {
  RomFixture& f = rom_fixture();
  const rom::DeimData d = rom::deim(f.snaps.nonlinearity, f.cfg.rom.n_m);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  double in_span = 0.0, worst_ratio = 0.0;
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd a(d.n_m());
    for (auto& v : a) v = normal(rng);
    const fem::Vector g = d.U * a;
    in_span = std::max(in_span, (g - d.interpolate(g)).norm() / g.norm());
  }
  // Outside the span: random vectors, and true nonlinear terms at unseen mu.
  std::vector<fem::Vector> outside;
  for (int i = 0; i < 40; ++i) {
    fem::Vector r(d.U.rows());
    for (auto& v : r) v = normal(rng);
    outside.push_back(r);
  }
  const auto [lo, hi] = *f.cfg.wind.mu_range;
  for (double mu : rom::random_samples({lo, hi, 10}, 5, f.snaps.mu)) {
    outside.push_back(f.fom->nonlinearity(f.fom->solve(mu).velocity));
  }
  for (const fem::Vector& g : outside) {
    const double proj = (g - d.U * (d.U.transpose() * g)).norm();
    const double err = (g - d.interpolate(g)).norm();
    worst_ratio = std::max(worst_ratio, err / (d.condition * proj));
  }
  return {in_span <= 1e-8 && worst_ratio <= 1.0,
          fmt("N_m %d, condition %.2f; in-span max rel err %.2e (<= 1e-8); out-of-span max err/(cond*proj err) "
              "%.3f (<= 1) over %zu vectors",
              d.n_m(), d.condition, in_span, worst_ratio, outside.size())};
}

// --- 11: determinism -----------------------------------------------------------------------

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "urbanflow_acceptance_determinism";
  fs::remove_all(root);
  std::vector<nlohmann::ordered_json> manifests;
  std::ostringstream log, err;
  for (const char* run : {"a", "b"}) {
    cli::Invocation inv;
    inv.command = "run-all";
    inv.config = kData / "scenario_demo.ini";
    inv.output = root / run;
    inv.seed = 11;
    const int rc = cli::execute(inv, log, err);
    if (rc != 0) return {false, "run-all exited with " + std::to_string(rc) + ": " + err.str()};
    manifests.push_back(nlohmann::ordered_json::parse(io::read_file(root / run / "manifest.json")));
  }
  // Wall-clock phase timings are the only field allowed to differ.
  for (auto& m : manifests) m.erase("timing_s");
  const bool same_manifest = manifests[0] == manifests[1];
  int csv = 0, csv_diff = 0, files = 0;
  for (const auto& f : manifests[0]["files"]) {
    const std::string rel = f["path"];
    ++files;
    if (rel.ends_with(".csv")) {
      ++csv;
      csv_diff += io::read_file(root / "a" / rel) != io::read_file(root / "b" / rel);
    }
  }
  const bool same_hash = manifests[0]["mesh_hash"] == manifests[1]["mesh_hash"] && !manifests[0]["mesh_hash"].is_null();
  fs::remove_all(root);
  return {same_manifest && same_hash && csv > 0 && csv_diff == 0,
          fmt("manifests identical apart from timing: %s; %d/%d CSV files differ; mesh hash %s; %d files inventoried",
              same_manifest ? "yes" : "no", csv_diff, csv, std::string(manifests[0]["mesh_hash"]).c_str(), files)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome(double&)> run;
  };
  auto timed = [](Outcome (*f)()) {
    return [f](double&) { return f(); };
  };
  const std::vector<Criterion> criteria = {
      {1, "blockage ratio", 5.0, timed(blockage_ratio)},
      {2, "mesh validity", 30.0, timed(mesh_validity)},
      {3, "Taylor-Hood convergence", 120.0, timed(taylor_hood)},
      {4, "Poiseuille channel", 30.0, timed(channel)},
      {5, "transport consistency", 60.0, timed(ad_consistency)},
      {6, "plume advection", 60.0, timed(plume)},
      {7, "POD spectrum", 0.0, timed(pod_spectrum)},
      {8, "ROM accuracy", 600.0, rom_accuracy},
      {9, "ROM speedup", 0.0, timed(rom_speedup)},
      {10, "DEIM oracle", 10.0, timed(deim_oracle)},
      {11, "determinism", 0.0, timed(determinism)},
  };

  int passed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    double reported = -1.0;
    try {
      o = c.run(reported);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = reported >= 0.0 ? reported : seconds_since(t0);
    const bool in_time = c.limit_s <= 0.0 || elapsed < c.limit_s;
    const bool ok = o.pass && in_time;
    passed += ok;
    std::string timing = fmt("%.2f s", elapsed);
    if (c.limit_s > 0.0) timing += fmt(" (limit %.0f s)", c.limit_s);
    std::printf("%s  %2d  %-24s %s [%s]\n", ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
