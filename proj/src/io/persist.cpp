#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "urbanflow/error.hpp"
#include "urbanflow/hash.hpp"
#include "urbanflow/io.hpp"

namespace urbanflow::io {

using nlohmann::ordered_json;

// --- Mesh text ------------------------------------------------------------------

std::string serialize_mesh(const mesh::TriMesh& mesh) {
  std::string out = "urbanflow-mesh 1\n";
  out += "hash " + hex64(mesh.content_hash()) + '\n';
  out += "vertices " + std::to_string(mesh.vertex_count()) + '\n';
  for (const Point& p : mesh.vertices()) out += format_double(p.x) + ' ' + format_double(p.y) + '\n';
  out += "triangles " + std::to_string(mesh.triangle_count()) + '\n';
  for (const auto& t : mesh.triangles()) {
    out += std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
  }
  out += "boundary " + std::to_string(mesh.boundary_edges().size()) + '\n';
  for (const auto& e : mesh.boundary_edges()) {
    out += std::to_string(e.v[0]) + ' ' + std::to_string(e.v[1]) + ' ' + std::to_string(static_cast<int>(e.tag)) +
           '\n';
  }
  return out;
}

namespace {

class Tokens {
 public:
  explicit Tokens(std::string_view text) : text_(text) {}

  std::string_view word() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("unexpected end of mesh file", pos_);
    return text_.substr(start, pos_ - start);
  }

  void expect(std::string_view w) {
    const std::size_t at = pos_;
    if (word() != w) throw ParseError("expected '" + std::string(w) + "'", at);
  }

  template <typename T>
  T number() {
    const std::size_t at = pos_;
    const std::string_view w = word();
    T v{};
    const auto r = std::from_chars(w.data(), w.data() + w.size(), v);
    if (r.ec != std::errc() || r.ptr != w.data() + w.size()) {
      throw ParseError("bad number '" + std::string(w) + "'", at);
    }
    return v;
  }

  std::size_t offset() const { return pos_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

mesh::TriMesh deserialize_mesh(std::string_view text) {
  Tokens tok(text);
  tok.expect("urbanflow-mesh");
  if (tok.number<int>() != 1) throw ParseError("unsupported mesh format version", 0);
  tok.expect("hash");
  const std::string hash(tok.word());

  tok.expect("vertices");
  const auto nv = tok.number<std::size_t>();
  std::vector<Point> vertices(nv);
  for (Point& p : vertices) {
    p.x = tok.number<double>();
    p.y = tok.number<double>();
  }
  tok.expect("triangles");
  const auto nt = tok.number<std::size_t>();
  std::vector<mesh::Triangle> tris(nt);
  for (auto& t : tris) {
    for (int& v : t) {
      const std::size_t at = tok.offset();
      v = tok.number<int>();
      if (v < 0 || static_cast<std::size_t>(v) >= nv) throw ParseError("vertex index out of range", at);
    }
  }
  tok.expect("boundary");
  const auto nb = tok.number<std::size_t>();
  std::vector<mesh::BoundaryEdge> boundary(nb);
  for (auto& e : boundary) {
    e.v[0] = tok.number<int>();
    e.v[1] = tok.number<int>();
    const std::size_t at = tok.offset();
    const int tag = tok.number<int>();
    if (tag < 0 || tag > static_cast<int>(mesh::BoundaryTag::BuildingWall)) throw ParseError("bad boundary tag", at);
    e.tag = static_cast<mesh::BoundaryTag>(tag);
  }
  mesh::TriMesh m(std::move(vertices), std::move(tris), std::move(boundary));
  if (hex64(m.content_hash()) != hash) {
    throw Error(ErrorKind::Io, "mesh file hash mismatch: header " + hash + ", content " + hex64(m.content_hash()));
  }
  return m;
}

// --- Domain JSON --------------------------------------------------------------------

std::string serialize_domain(const DomainRecord& r) {
  const geo::DomainSpec& d = r.domain;
  ordered_json j;
  j["bounds"] = {d.bounds.xmin, d.bounds.ymin, d.bounds.xmax, d.bounds.ymax};
  j["wind_direction"] = {d.wind_direction.x, d.wind_direction.y};
  j["inflow"] = geo::side_name(d.inflow);
  j["outflow"] = geo::side_name(d.outflow);
  j["characteristic_length_m"] = d.characteristic_length;
  if (r.origin) {
    j["origin"] = {{"latitude", r.origin->latitude}, {"longitude", r.origin->longitude}};
  } else {
    j["origin"] = nullptr;
  }
  j["blockage_ratio"] = r.blockage_ratio;
  j["mesh_hash"] = hex64(r.mesh_hash);
  return j.dump(2) + '\n';
}

DomainRecord deserialize_domain(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(std::string("malformed domain file: ") + e.what(), e.byte);
  }
  try {
    DomainRecord r;
    const auto b = j.at("bounds");
    const auto w = j.at("wind_direction");
    r.domain = geo::make_domain(Box{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                                    b.at(3).get<double>()},
                                Point{w.at(0).get<double>(), w.at(1).get<double>()});
    if (!j.at("origin").is_null()) {
      r.origin = geo::GeoOrigin{j["origin"].at("latitude").get<double>(), j["origin"].at("longitude").get<double>()};
    }
    r.blockage_ratio = j.at("blockage_ratio").get<double>();
    r.mesh_hash = std::stoull(j.at("mesh_hash").get<std::string>(), nullptr, 16);
    return r;
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("invalid domain file: ") + e.what(), 0);
  }
}

// --- Wind binary -----------------------------------------------------------------------

namespace {

constexpr char kWindMagic[8] = {'U', 'F', 'W', 'I', 'N', 'D', '0', '1'};

template <typename T>
void put(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_vector(std::string& out, const fem::Vector& v) {
  put(out, static_cast<std::uint64_t>(v.size()));
  out.append(reinterpret_cast<const char*>(v.data()), static_cast<std::size_t>(v.size()) * sizeof(double));
}

struct Reader {
  std::string_view data;
  std::size_t pos = 0;
  const fs::path* path;

  template <typename T>
  T get() {
    if (data.size() - pos < sizeof(T)) throw Error(ErrorKind::Io, "truncated wind file '" + path->string() + "'");
    T v;
    std::memcpy(&v, data.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }

  fem::Vector vector() {
    const auto n = get<std::uint64_t>();
    if ((data.size() - pos) / sizeof(double) < n) {
      throw Error(ErrorKind::Io, "truncated wind file '" + path->string() + "'");
    }
    fem::Vector v(static_cast<Eigen::Index>(n));
    std::memcpy(v.data(), data.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    return v;
  }
};

}  // namespace

void save_wind(const fs::path& path, const StoredWind& wind) {
  std::string out(kWindMagic, sizeof kWindMagic);
  put(out, wind.mesh_hash);
  put(out, wind.mu);
  put(out, static_cast<std::uint8_t>(wind.rom_generated ? 1 : 0));
  put_vector(out, wind.velocity);
  put_vector(out, wind.pressure);
  write_file(path, out);
}

StoredWind load_wind(const fs::path& path, std::uint64_t expected_mesh_hash) {
  const std::string data = read_file(path);
  if (data.size() < sizeof kWindMagic || std::memcmp(data.data(), kWindMagic, sizeof kWindMagic) != 0) {
    throw Error(ErrorKind::Io, "'" + path.string() + "' is not a wind field file");
  }
  Reader r{data, sizeof kWindMagic, &path};
  StoredWind w;
  w.mesh_hash = r.get<std::uint64_t>();
  w.mu = r.get<double>();
  w.rom_generated = r.get<std::uint8_t>() != 0;
  w.velocity = r.vector();
  w.pressure = r.vector();
  if (r.pos != data.size()) throw Error(ErrorKind::Io, "trailing bytes in wind file '" + path.string() + "'");
  if (expected_mesh_hash != 0 && w.mesh_hash != expected_mesh_hash) {
    throw Error(ErrorKind::Io, "wind file '" + path.string() + "' was computed on mesh " + hex64(w.mesh_hash) +
                                   ", expected " + hex64(expected_mesh_hash));
  }
  return w;
}

}  // namespace urbanflow::io
