#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "doctest.h"
#include "urbanflow/cli.hpp"
#include "urbanflow/hash.hpp"
#include "urbanflow/ins.hpp"

using namespace urbanflow;
using namespace urbanflow::cli;

namespace {

const fs::path kData = URBANFLOW_DATA_DIR;

// A fresh scratch directory holding a config that points at the two-building
// fixture.
struct Scratch {
  fs::path dir;

  explicit Scratch(const std::string& name, const std::string& extra = {}) {
    dir = fs::temp_directory_path() / ("urbanflow_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    io::write_file(config(), base_config() + extra);
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path config() const { return dir / "scenario.ini"; }
  fs::path out() const { return dir / "out"; }

  static std::string base_config() {
    return "buildings_path = " + (kData / "two_buildings.geojson").string() +
           "\n[wind]\ndirection = north\nnu = 0.5\nmu = 1 0.5 2\nmu_range = 0.5 2\n"
           "[mesh]\nlc_building = 3\nlc_gap = 5\nlc_far = 30\ngap_distance = 15\n"
           "[transport]\nk = 0.5\ndt = 1\nt_final = 100\nprobes = 0 40; 0 100\n"
           "[plume]\ncenter = 0 -60\nradius = 20\nwidth = 6\n"
           "[rom]\nn_snapshots = 6\nn_test = 2\nN_r = 3\nN_m = 4\nrepetitions = 1\n"
           "[output]\nsave_interval = 10\n";
  }

  int run(const std::string& command, const std::string& phase = {}, std::optional<double> mu = {}) {
    Invocation inv;
    inv.command = command;
    inv.phase = phase;
    inv.config = config();
    inv.output = out();
    inv.mu = mu;
    log.str("");
    err.str("");
    return execute(inv, log, err);
  }

  std::ostringstream log, err;
};

std::set<std::string> files_under(const fs::path& root) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.insert(fs::relative(e.path(), root).generic_string());
  }
  return out;
}

ScenarioConfig parse(const std::string& text) { return parse_config(text, "/base"); }

}  // namespace

TEST_CASE("config parsing") {
  const std::string head = "buildings_path = b.geojson\n";
  SUBCASE("defaults and path resolution") {
    const ScenarioConfig c = parse(head);
    CHECK(c.buildings_path == fs::path("/base/b.geojson"));
    CHECK(c.output.directory == fs::path("/base/output"));
    CHECK(c.wind.mu == std::vector<double>{1.0});
    CHECK(c.mesh.br_max == 0.17);
    CHECK(c.output.wants("vtk"));
  }
  SUBCASE("values") {
    const ScenarioConfig c = parse(head +
                                   "[wind]\ndirection = -1 0\nmu = 0.5, 1.5\nmu_range = 0.1 3\n"
                                   "[transport]\nprobes = 1 2; 3 4\ncontour_levels = 5\n"
                                   "[rom]\nN_r = 2 4 6\nseed = 99\n"
                                   "[output]\nformats = CSV\nvtk_quadratic = yes\n");
    CHECK(c.wind.direction == Point{-1, 0});
    CHECK(c.wind.mu == std::vector<double>{0.5, 1.5});
    CHECK(c.wind.mu_range->second == 3.0);
    REQUIRE(c.transport.probes.size() == 2);
    CHECK(c.transport.probes[1] == Point{3, 4});
    CHECK(c.rom.n_r == std::vector<int>{2, 4, 6});
    CHECK(c.rom.seed == 99);
    CHECK(c.output.formats == std::set<std::string>{"csv"});
    CHECK(c.output.vtk_quadratic);
  }
  SUBCASE("errors are config errors") {
    for (const std::string& bad : {
             std::string("[wind]\nnu = 0.1\n"),
             head + "colour = red\n",
             head + "[wnd]\nnu = 1\n",
             head + "[wind]\nnu = fast\n",
             head + "[wind]\nnu = -1\n",
             head + "[wind]\nmu_range = 2 1\n",
             head + "[wind]\ndirection = 1 1\n",
             head + "[mesh]\nlc_building = 5\nlc_gap = 2\n",
             head + "[mesh]\nbr_max = 1.5\n",
             head + "[transport]\ndt = 0\n",
             head + "[plume]\nwidth = 0\n",
             head + "[rom]\nN_r = 60\n",
             head + "[rom]\nn_snapshots = -3\n",
             head + "[output]\nformats = vtk png\n",
             head + "[output]\nsave_interval = 0\n",
         }) {
      CAPTURE(bad);
      try {
        parse(bad);
        FAIL("expected a config error");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
      }
    }
  }
}

TEST_CASE("exit code table") {
  CHECK(exit_code(ErrorKind::Config) == 2);
  CHECK(exit_code(ErrorKind::Io) == 3);
  CHECK(exit_code(ErrorKind::Parse) == 3);
  CHECK(exit_code(ErrorKind::Constraint) == 4);
  CHECK(exit_code(ErrorKind::NonConvergence) == 5);
  CHECK(exit_code(ErrorKind::Singular) == 5);
  CHECK(exit_code(ErrorKind::Instability) == 6);
  CHECK(exit_code(ErrorKind::Internal) == 1);
}

TEST_CASE("output directory precedence") {
  Scratch s("precedence");
  const ScenarioConfig cfg = load_config(s.config());
  Invocation inv;
  inv.config = s.config();
  ::unsetenv("URBANFLOW_OUTPUT_DIR");
  CHECK(resolve_output_dir(inv, cfg) == cfg.output.directory);
  ::setenv("URBANFLOW_OUTPUT_DIR", "/tmp/from_env", 1);
  CHECK(resolve_output_dir(inv, cfg) == fs::path("/tmp/from_env"));
  inv.output = "/tmp/from_flag";
  CHECK(resolve_output_dir(inv, cfg) == fs::path("/tmp/from_flag"));
  ::unsetenv("URBANFLOW_OUTPUT_DIR");
}

TEST_CASE("missing buildings file is an I/O error naming the path") {
  Scratch s("missing");
  io::write_file(s.config(), "buildings_path = nowhere/none.geojson\n");
  CHECK(s.run("mesh") == kExitIo);
  CHECK(s.err.str().find("none.geojson") != std::string::npos);
}

TEST_CASE("blockage violation cites the ratio") {
  Scratch s("blockage");
  std::string cfg = Scratch::base_config();
  cfg.insert(cfg.find("[mesh]\n") + 7, "domain = -40 -60 40 60\n");
  io::write_file(s.config(), cfg);
  CHECK(s.run("mesh") == kExitConstraint);
  CHECK(s.err.str().find("blockage ratio 0.4750") != std::string::npos);
}

TEST_CASE("mesh command writes an exact inventory") {
  Scratch s("mesh");
  REQUIRE(s.run("mesh") == kExitOk);
  const auto m = nlohmann::json::parse(io::read_file(s.out() / "manifest_mesh.json"));
  std::set<std::string> listed;
  for (const auto& f : m["files"]) {
    const std::string rel = f["path"];
    listed.insert(rel);
    Fnv1a h;
    h.update(io::read_file(s.out() / rel));
    CHECK(f["fnv1a64"] == hex64(h.digest()));
  }
  std::set<std::string> present = files_under(s.out());
  present.erase("manifest_mesh.json");
  CHECK(listed == present);
  CHECK(m["status"] == "ok");
  CHECK(m["version"] == kToolVersion);
  CHECK(m["config"]["mesh"]["lc_gap_m"] == 5.0);

  const auto q = io::read_file(s.out() / "mesh/quality.csv");
  const auto line = q.substr(q.find('\n') + 1);
  CHECK(std::stod(line.substr(0, line.find(','))) >= 20.0);
}

TEST_CASE("wind sweep, transport and online ROM through the commands") {
  Scratch s("pipeline");
  REQUIRE(s.run("mesh") == kExitOk);
  REQUIRE(s.run("wind") == kExitOk);
  for (const char* mu : {"0.5", "1", "2"}) CHECK(fs::exists(s.out() / ("wind/wind_mu_" + std::string(mu) + ".vtk")));
  const std::string csv = io::read_file(s.out() / "wind/wind.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  // Re recomputed from the stored field.
  const auto mesh = io::deserialize_mesh(io::read_file(s.out() / "mesh/mesh.txt"));
  const auto domain = io::deserialize_domain(io::read_file(s.out() / "mesh/domain.json"));
  const ins::TaylorHood th(mesh);
  const auto w = io::load_wind(s.out() / "wind/wind_mu_2.bin", mesh.content_hash());
  const double re = ins::max_speed(th.velocity, w.velocity) * domain.domain.characteristic_length / 0.5;
  const std::string row = csv.substr(csv.rfind("\n2,") + 3);
  CHECK(std::stod(row.substr(0, row.find(','))) == doctest::Approx(re).epsilon(1e-12));

  REQUIRE(s.run("transport") == kExitOk);
  int vtk = 0;
  for (const auto& f : files_under(s.out() / "transport")) vtk += f.ends_with(".vtk");
  CHECK(vtk == 11);
  std::istringstream mass(io::read_file(s.out() / "transport/mass.csv"));
  std::string line;
  std::getline(mass, line);
  double last_t = -1.0;
  int rows = 0;
  while (std::getline(mass, line)) {
    const double t = std::stod(line.substr(line.find(',') + 1));
    CHECK(t > last_t);
    last_t = t;
    ++rows;
  }
  CHECK(rows == 101);

  REQUIRE(s.run("rom", "offline") == kExitOk);
  REQUIRE(s.run("rom", "online", 1.2) == kExitOk);
  const auto m = nlohmann::json::parse(io::read_file(s.out() / "manifest_rom_online.json"));
  CHECK(m["rom_generated"] == true);
  CHECK(io::load_wind(s.out() / "wind/rom_mu_1.2.bin").rom_generated);
  CHECK(s.run("rom", "sideways") == kExitConfig);
}

TEST_CASE("nonconvergent wind sample is recorded and the sweep continues") {
  Scratch s("nonconv");
  std::string cfg = Scratch::base_config();
  cfg.replace(cfg.find("mu = 1 0.5 2"), 12, "mu = 1 1e6");
  io::write_file(s.config(), cfg);
  REQUIRE(s.run("mesh") == kExitOk);
  CHECK(s.run("wind") == kExitOk);
  const std::string ok = io::read_file(s.out() / "wind/wind.csv");
  const std::string failed = io::read_file(s.out() / "wind/failures.csv");
  CHECK(std::count(ok.begin(), ok.end(), '\n') == 2);
  CHECK(std::count(failed.begin(), failed.end(), '\n') == 2);
  const auto m = nlohmann::json::parse(io::read_file(s.out() / "manifest_wind.json"));
  REQUIRE(m["failures"].size() == 1);
  CHECK(m["failures"][0]["mu"] == 1e6);
}

TEST_CASE("phases need their persisted inputs") {
  Scratch s("order");
  CHECK(s.run("wind") == kExitIo);
  CHECK(s.err.str().find("mesh.txt") != std::string::npos);
}
