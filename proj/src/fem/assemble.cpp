#include <cmath>

#include "urbanflow/error.hpp"
#include "urbanflow/fem.hpp"

namespace urbanflow::fem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct Element {
  std::array<Point, 3> x;
  std::array<Point, 3> dl;
  double area;
};

Element element(const mesh::TriMesh& m, std::size_t t) {
  const auto& tri = m.triangles()[t];
  Element e;
  e.x = {m.vertices()[tri[0]], m.vertices()[tri[1]], m.vertices()[tri[2]]};
  e.dl = barycentric_gradients(e.x[0], e.x[1], e.x[2]);
  e.area = m.triangle_area(t);
  return e;
}

// Scalar shape functions of a space at one quadrature point.
struct Shape {
  int n = 0;
  std::array<double, 6> phi{};
  std::array<Point, 6> grad{};
};

Shape shape(const DofMap& space, const QuadPoint& q, const Element& e) {
  Shape s;
  if (space.degree() == 1) {
    s.n = 3;
    for (int k = 0; k < 3; ++k) {
      s.phi[k] = q.bary[k];
      s.grad[k] = e.dl[k];
    }
  } else {
    s.n = 6;
    s.phi = p2_values(q.bary);
    s.grad = p2_gradients(q.bary, e.dl);
  }
  return s;
}

SparseMatrix finish(Triplets& trip, std::size_t rows, std::size_t cols) {
  SparseMatrix A(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  A.setFromTriplets(trip.begin(), trip.end());
  A.prune(0.0, 0.0);
  A.makeCompressed();
  return A;
}

void check_same_mesh(const DofMap& a, const DofMap& b) {
  if (a.mesh_hash() != b.mesh_hash()) {
    throw Error(ErrorKind::Internal, "spaces are defined on different meshes");
  }
}

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorKind::Internal, std::string("non-finite coefficient in ") + what);
}

// Bilinear forms on one scalar space, replicated over vector components.
template <typename Integrand>
SparseMatrix scalar_bilinear(const DofMap& space, int degree, Integrand&& integrand) {
  const mesh::TriMesh& m = space.mesh();
  const int npe = space.nodes_per_element();
  const int nc = space.components();
  Triplets trip;
  trip.reserve(m.triangle_count() * static_cast<std::size_t>(npe * npe * nc));
  const auto rule = triangle_rule(degree);
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const Element e = element(m, t);
    std::array<std::array<double, 6>, 6> local{};
    for (const QuadPoint& q : rule) {
      const Shape s = shape(space, q, e);
      const double w = q.weight * e.area;
      for (int i = 0; i < npe; ++i) {
        for (int j = 0; j < npe; ++j) local[i][j] += w * integrand(s, i, j);
      }
    }
    const auto nodes = space.element_nodes(t);
    for (int c = 0; c < nc; ++c) {
      for (int i = 0; i < npe; ++i) {
        for (int j = 0; j < npe; ++j) {
          trip.emplace_back(space.dof(nodes[i], c), space.dof(nodes[j], c), local[i][j]);
        }
      }
    }
  }
  return finish(trip, space.size(), space.size());
}

SparseMatrix assemble_divergence(const DofMap& trial, const DofMap& test) {
  if (trial.kind() != SpaceKind::VelocityP2Vector || test.degree() != 1) {
    throw Error(ErrorKind::Internal, "divergence form needs P2 vector trial and P1 test spaces");
  }
  const mesh::TriMesh& m = trial.mesh();
  Triplets trip;
  trip.reserve(m.triangle_count() * 36);
  const auto rule = triangle_rule(4);
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const Element e = element(m, t);
    double bx[3][6] = {}, by[3][6] = {};
    for (const QuadPoint& q : rule) {
      const auto g = p2_gradients(q.bary, e.dl);
      const double w = q.weight * e.area;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 6; ++j) {
          bx[i][j] -= w * q.bary[i] * g[j].x;
          by[i][j] -= w * q.bary[i] * g[j].y;
        }
      }
    }
    const auto pn = test.element_nodes(t);
    const auto un = trial.element_nodes(t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 6; ++j) {
        trip.emplace_back(pn[i], trial.dof(un[j], 0), bx[i][j]);
        trip.emplace_back(pn[i], trial.dof(un[j], 1), by[i][j]);
      }
    }
  }
  return finish(trip, test.size(), trial.size());
}

SparseMatrix assemble_convection(const Convection& form, const DofMap& space) {
  if (space.kind() != SpaceKind::VelocityP2Vector) {
    throw Error(ErrorKind::Internal, "convection form needs the P2 vector space");
  }
  if (form.w == nullptr || form.w->size() != static_cast<Eigen::Index>(space.size())) {
    throw Error(ErrorKind::Internal, "convection coefficient does not match the space");
  }
  check_finite(*form.w, "convection form");
  const Vector& w = *form.w;
  const mesh::TriMesh& m = space.mesh();
  Triplets trip;
  trip.reserve(m.triangle_count() * (form.newton ? 144 : 72));
  const auto rule = triangle_rule(6);
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const Element e = element(m, t);
    const auto nodes = space.element_nodes(t);
    double wl[2][6];
    for (int k = 0; k < 6; ++k) {
      wl[0][k] = w[space.dof(nodes[k], 0)];
      wl[1][k] = w[space.dof(nodes[k], 1)];
    }
    // local[c][d][i][j]: test component c node i, trial component d node j.
    double local[2][2][6][6] = {};
    for (const QuadPoint& q : rule) {
      const auto phi = p2_values(q.bary);
      const auto g = p2_gradients(q.bary, e.dl);
      Point wq{0, 0};
      double gw[2][2] = {};  // gw[c][d] = d w_c / d x_d
      for (int k = 0; k < 6; ++k) {
        wq = wq + phi[k] * Point{wl[0][k], wl[1][k]};
        for (int c = 0; c < 2; ++c) {
          gw[c][0] += wl[c][k] * g[k].x;
          gw[c][1] += wl[c][k] * g[k].y;
        }
      }
      const double wt = q.weight * e.area;
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          const double adv = wt * phi[i] * dot(wq, g[j]);
          local[0][0][i][j] += adv;
          local[1][1][i][j] += adv;
          if (form.newton) {
            const double pp = wt * phi[i] * phi[j];
            for (int c = 0; c < 2; ++c) {
              for (int d = 0; d < 2; ++d) local[c][d][i][j] += pp * gw[c][d];
            }
          }
        }
      }
    }
    for (int c = 0; c < 2; ++c) {
      for (int d = 0; d < 2; ++d) {
        if (!form.newton && c != d) continue;
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < 6; ++j) {
            trip.emplace_back(space.dof(nodes[i], c), space.dof(nodes[j], d), local[c][d][i][j]);
          }
        }
      }
    }
  }
  return finish(trip, space.size(), space.size());
}

SparseMatrix assemble_ad(const AdCoefficients& c, const DofMap& space, bool lhs) {
  if (space.kind() == SpaceKind::VelocityP2Vector) {
    throw Error(ErrorKind::Internal, "transport forms need a scalar P1 space");
  }
  if (c.wind_space == nullptr || c.wind == nullptr) {
    throw Error(ErrorKind::Internal, "transport forms need a wind field");
  }
  if (c.wind_space->mesh_hash() != space.mesh_hash()) {
    throw Error(ErrorKind::Internal, "wind and concentration live on different meshes");
  }
  if (c.wind->size() != static_cast<Eigen::Index>(c.wind_space->size())) {
    throw Error(ErrorKind::Internal, "wind vector does not match its space");
  }
  check_finite(*c.wind, "transport form");
  const DofMap& ws = *c.wind_space;
  const Vector& u = *c.wind;
  const mesh::TriMesh& m = space.mesh();
  Triplets trip;
  trip.reserve(m.triangle_count() * 9);
  const auto rule = triangle_rule(4);
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const Element e = element(m, t);
    const auto wn = ws.element_nodes(t);
    double local[3][3] = {};
    for (const QuadPoint& q : rule) {
      const auto phi2 = p2_values(q.bary);
      Point uq{0, 0};
      for (int k = 0; k < 6; ++k) {
        uq = uq + phi2[k] * Point{u[ws.dof(wn[k], 0)], u[ws.dof(wn[k], 1)]};
      }
      const double h = streamline_length(e.x[0], e.x[1], e.x[2], uq);
      const double tau = c.tau_scale == 0.0 ? 0.0 : c.tau_scale * supg_tau(h, norm(uq), c.k, c.dt);
      const double wt = q.weight * e.area;
      for (int i = 0; i < 3; ++i) {
        const double ugi = dot(uq, e.dl[i]);
        for (int j = 0; j < 3; ++j) {
          const double ugj = dot(uq, e.dl[j]);
          double v = q.bary[i] * q.bary[j] + tau * ugi * q.bary[j];
          if (lhs) {
            v += c.dt * (q.bary[i] * ugj + c.k * dot(e.dl[i], e.dl[j]) + tau * ugi * ugj);
          }
          local[i][j] += wt * v;
        }
      }
    }
    const auto nodes = space.element_nodes(t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) trip.emplace_back(nodes[i], nodes[j], local[i][j]);
    }
  }
  return finish(trip, space.size(), space.size());
}

}  // namespace

SparseMatrix assemble(const Form& form, const DofMap& trial, const DofMap& test) {
  check_same_mesh(trial, test);
  return std::visit(
      [&](const auto& f) -> SparseMatrix {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Divergence>) {
          return assemble_divergence(trial, test);
        } else {
          if (trial.kind() != test.kind()) {
            throw Error(ErrorKind::Internal, "form needs identical trial and test spaces");
          }
          if constexpr (std::is_same_v<T, Viscous>) {
            if (!std::isfinite(f.nu)) throw Error(ErrorKind::Internal, "non-finite viscosity");
            const double nu = f.nu;
            return scalar_bilinear(trial, 4, [nu](const Shape& s, int i, int j) {
              return nu * dot(s.grad[i], s.grad[j]);
            });
          } else if constexpr (std::is_same_v<T, Mass>) {
            return scalar_bilinear(trial, 4, [](const Shape& s, int i, int j) {
              return s.phi[i] * s.phi[j];
            });
          } else if constexpr (std::is_same_v<T, Convection>) {
            return assemble_convection(f, trial);
          } else if constexpr (std::is_same_v<T, AdLhs>) {
            return assemble_ad(f.c, trial, true);
          } else {
            return assemble_ad(f.c, trial, false);
          }
        }
      },
      form);
}

Vector convection_vector(const DofMap& space, const Vector& u) {
  if (space.kind() != SpaceKind::VelocityP2Vector) {
    throw Error(ErrorKind::Internal, "convection vector needs the P2 vector space");
  }
  check_finite(u, "convection vector");
  const mesh::TriMesh& m = space.mesh();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  const auto rule = triangle_rule(6);
  for (std::size_t t = 0; t < m.triangle_count(); ++t) {
    const Element e = element(m, t);
    const auto nodes = space.element_nodes(t);
    double local[2][6] = {};
    for (const QuadPoint& q : rule) {
      const auto phi = p2_values(q.bary);
      const auto g = p2_gradients(q.bary, e.dl);
      Point uq{0, 0};
      Point gx{0, 0}, gy{0, 0};  // gradients of u_x and u_y
      for (int k = 0; k < 6; ++k) {
        const double ux = u[space.dof(nodes[k], 0)], uy = u[space.dof(nodes[k], 1)];
        uq = uq + phi[k] * Point{ux, uy};
        gx = gx + ux * g[k];
        gy = gy + uy * g[k];
      }
      const double wt = q.weight * e.area;
      const double cx = dot(uq, gx), cy = dot(uq, gy);
      for (int i = 0; i < 6; ++i) {
        local[0][i] += wt * cx * phi[i];
        local[1][i] += wt * cy * phi[i];
      }
    }
    for (int i = 0; i < 6; ++i) {
      out[space.dof(nodes[i], 0)] += local[0][i];
      out[space.dof(nodes[i], 1)] += local[1][i];
    }
  }
  return out;
}

}  // namespace urbanflow::fem
