#include <cstring>
#include <fstream>

#include "urbanflow/error.hpp"
#include "urbanflow/hash.hpp"
#include "urbanflow/rom.hpp"

namespace urbanflow::rom {

namespace {

constexpr char kMagic[8] = {'U', 'F', 'R', 'O', 'M', 'A', 'R', 'T'};

// Native byte order; the container is written and read on the same host class.
class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  }
  template <typename T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void matrix(const Matrix& m) {
    pod<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
    pod<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
    out_.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
  }
  void vector(const Vector& v) { matrix(v); }
  void doubles(const std::vector<double>& v) {
    pod<std::uint64_t>(v.size());
    out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * v.size()));
  }
  void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void finish(const std::string& path) {
    out_.flush();
    if (!out_) throw Error(ErrorKind::Io, "failed writing " + path);
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorKind::Io, "cannot open ROM artifact " + path);
  }
  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    check();
    return v;
  }
  Matrix matrix() {
    const auto r = pod<std::uint64_t>(), c = pod<std::uint64_t>();
    if (r > (1u << 28) || c > (1u << 20) || r * c > (1ull << 31)) fail("implausible matrix size");
    Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    in_.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
    check();
    return m;
  }
  Vector vector() {
    const Matrix m = matrix();
    if (m.cols() != 1 && m.size() != 0) fail("expected a column vector");
    return m.size() == 0 ? Vector() : Vector(m.col(0));
  }
  std::vector<double> doubles() {
    const auto n = pod<std::uint64_t>();
    if (n > (1u << 24)) fail("implausible list length");
    std::vector<double> v(n);
    in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * n));
    check();
    return v;
  }
  void raw(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    check();
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Io, "malformed ROM artifact " + path_ + ": " + what);
  }

 private:
  void check() {
    if (!in_) fail("truncated file");
  }
  std::string path_;
  std::ifstream in_;
};

}  // namespace

void save_artifact(const std::string& path, const RomArtifact& a) {
  const RomOperators& o = a.ops;
  Writer w(path);
  w.raw(kMagic, sizeof kMagic);
  w.pod<std::uint32_t>(kArtifactVersion);
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(o.n_r()));
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(o.H.size()));
  w.pod<std::uint64_t>(static_cast<std::uint64_t>(o.V.rows()));
  w.pod<std::uint64_t>(a.mesh_hash);
  w.pod<double>(o.mu_min);
  w.pod<double>(o.mu_max);
  w.matrix(o.V);
  w.vector(o.lifting);
  w.matrix(o.A);
  w.vector(o.a);
  w.matrix(o.E);
  for (const Matrix& h : o.H) w.matrix(h);
  w.matrix(a.deim_basis);
  w.pod<std::uint64_t>(a.deim_indices.size());
  for (int i : a.deim_indices) w.pod<std::int32_t>(i);
  w.doubles(a.eigenvalues);
  w.doubles(a.training_mu);
  w.finish(path);
}

RomArtifact load_artifact(const std::string& path, std::uint64_t expected_mesh_hash) {
  Reader r(path);
  char magic[sizeof kMagic];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) r.fail("bad magic");
  const auto version = r.pod<std::uint32_t>();
  if (version != kArtifactVersion) r.fail("unsupported format version " + std::to_string(version));
  const auto nr = r.pod<std::uint32_t>();
  const auto nm = r.pod<std::uint32_t>();
  const auto dofs = r.pod<std::uint64_t>();
  RomArtifact a;
  a.mesh_hash = r.pod<std::uint64_t>();
  if (expected_mesh_hash != 0 && a.mesh_hash != expected_mesh_hash) {
    throw Error(ErrorKind::Io, "ROM artifact " + path + " was built on a different mesh (hash " +
                                   hex64(a.mesh_hash) + ", expected " + hex64(expected_mesh_hash) + ")");
  }
  RomOperators& o = a.ops;
  o.mu_min = r.pod<double>();
  o.mu_max = r.pod<double>();
  o.V = r.matrix();
  o.lifting = r.vector();
  o.A = r.matrix();
  o.a = r.vector();
  o.E = r.matrix();
  for (std::uint32_t i = 0; i < nm; ++i) o.H.push_back(r.matrix());
  a.deim_basis = r.matrix();
  const auto ni = r.pod<std::uint64_t>();
  if (ni != nm) r.fail("DEIM index count mismatch");
  for (std::uint64_t i = 0; i < ni; ++i) a.deim_indices.push_back(r.pod<std::int32_t>());
  a.eigenvalues = r.doubles();
  a.training_mu = r.doubles();

  const auto n = static_cast<Eigen::Index>(dofs), k = static_cast<Eigen::Index>(nr);
  bool ok = o.V.rows() == n && o.V.cols() == k && o.lifting.size() == n && o.A.rows() == k && o.A.cols() == k &&
            o.a.size() == k && o.E.rows() == k && o.E.cols() == static_cast<Eigen::Index>(nm) &&
            a.deim_basis.rows() == n && a.deim_basis.cols() == static_cast<Eigen::Index>(nm);
  for (const Matrix& h : o.H) ok = ok && h.rows() == k + 1 && h.cols() == k + 1;
  if (!ok) r.fail("inconsistent dimensions");
  return a;
}

}  // namespace urbanflow::rom
