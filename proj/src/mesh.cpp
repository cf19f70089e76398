#include "shapegrad/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace shapegrad {

namespace {

Vec2 rot90(const Vec2& v) { return {-v.y, v.x}; }

double signed_area(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  const Vec2 a = p1 - p0, b = p2 - p0;
  return 0.5 * (a.x * b.y - a.y * b.x);
}

}  // namespace

SimplicialMesh::SimplicialMesh(int dim, std::vector<Vec2> vertices,
                               std::vector<std::array<int, 3>> simplices)
    : dim_(dim), vertices_(std::move(vertices)), simplices_(std::move(simplices)) {
  if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("mesh dimension must be 1 or 2");
  const int nv = num_vertices();
  for (auto& s : simplices_) {
    for (int k = 0; k <= dim_; ++k) {
      if (s[k] < 0 || s[k] >= nv) throw std::invalid_argument("simplex index out of range");
    }
    if (dim_ == 1) {
      s[2] = -1;
      if (vertices_[s[0]].x > vertices_[s[1]].x) std::swap(s[0], s[1]);
    } else if (signed_area(vertices_[s[0]], vertices_[s[1]], vertices_[s[2]]) < 0.0) {
      std::swap(s[1], s[2]);
    }
  }
  build_caches();
}

void SimplicialMesh::build_caches() {
  const int nv = num_vertices();
  const int ns = num_simplices();
  const int vps = vertices_per_simplex();

  volume_.assign(ns, 0.0);
  grad_phi_.assign(ns, {});
  lumped_mass_.assign(nv, 0.0);
  vertex_elements_.assign(nv, {});
  element_neighbors_.assign(ns, {-1, -1, -1});
  total_volume_ = 0.0;

  for (int t = 0; t < ns; ++t) {
    const auto& s = simplices_[t];
    if (dim_ == 1) {
      const double len = vertices_[s[1]].x - vertices_[s[0]].x;
      if (!(len > 0.0)) throw std::invalid_argument("degenerate 1D element " + std::to_string(t));
      volume_[t] = len;
      grad_phi_[t][0] = {-1.0 / len, 0.0};
      grad_phi_[t][1] = {1.0 / len, 0.0};
    } else {
      const double area = signed_area(vertices_[s[0]], vertices_[s[1]], vertices_[s[2]]);
      if (!(area > 0.0)) throw std::invalid_argument("degenerate triangle " + std::to_string(t));
      volume_[t] = area;
      for (int k = 0; k < 3; ++k) {
        const Vec2 e = vertices_[s[(k + 2) % 3]] - vertices_[s[(k + 1) % 3]];
        grad_phi_[t][k] = (1.0 / (2.0 * area)) * rot90(e);
      }
    }
    total_volume_ += volume_[t];
    for (int k = 0; k < vps; ++k) {
      lumped_mass_[s[k]] += volume_[t] / vps;
      vertex_elements_[s[k]].push_back(t);
    }
  }

  // Facet -> (element, opposite local vertex); facets seen once are boundary.
  boundary_.clear();
  if (dim_ == 1) {
    std::map<int, std::vector<std::pair<int, int>>> at_vertex;
    for (int t = 0; t < ns; ++t) {
      at_vertex[simplices_[t][0]].push_back({t, 1});
      at_vertex[simplices_[t][1]].push_back({t, 0});
    }
    for (const auto& [v, owners] : at_vertex) {
      if (owners.size() > 2) throw std::invalid_argument("non-manifold 1D mesh");
      if (owners.size() == 2) {
        element_neighbors_[owners[0].first][owners[0].second] = owners[1].first;
        element_neighbors_[owners[1].first][owners[1].second] = owners[0].first;
        continue;
      }
      BoundaryFacet f;
      f.v = {v, -1};
      f.adjacent_element = owners[0].first;
      f.measure = 1.0;
      f.midpoint = vertices_[v];
      const Vec2 c = centroid(f.adjacent_element);
      f.normal = {vertices_[v].x > c.x ? 1.0 : -1.0, 0.0};
      boundary_.push_back(f);
    }
  } else {
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> at_edge;
    for (int t = 0; t < ns; ++t) {
      for (int k = 0; k < 3; ++k) {
        int a = simplices_[t][(k + 1) % 3];
        int b = simplices_[t][(k + 2) % 3];
        if (a > b) std::swap(a, b);
        at_edge[{a, b}].push_back({t, k});
      }
    }
    for (const auto& [edge, owners] : at_edge) {
      if (owners.size() > 2) throw std::invalid_argument("non-manifold edge");
      if (owners.size() == 2) {
        element_neighbors_[owners[0].first][owners[0].second] = owners[1].first;
        element_neighbors_[owners[1].first][owners[1].second] = owners[0].first;
        continue;
      }
      BoundaryFacet f;
      f.v = {edge.first, edge.second};
      f.adjacent_element = owners[0].first;
      const Vec2 pa = vertices_[edge.first], pb = vertices_[edge.second];
      f.measure = norm(pb - pa);
      if (!(f.measure > 0.0)) throw std::invalid_argument("degenerate boundary edge");
      f.midpoint = 0.5 * (pa + pb);
      Vec2 n = rot90(pb - pa);
      n = (1.0 / norm(n)) * n;
      if (dot(n, f.midpoint - centroid(f.adjacent_element)) < 0.0) n = -n;
      f.normal = n;
      boundary_.push_back(f);
    }
  }

  vertex_on_boundary_.assign(nv, 0);
  for (const auto& f : boundary_) {
    vertex_on_boundary_[f.v[0]] = 1;
    if (f.v[1] >= 0) vertex_on_boundary_[f.v[1]] = 1;
  }

  vertex_neighbors_.assign(nv, {});
  {
    std::vector<std::set<int>> nb(nv);
    for (const auto& s : simplices_) {
      for (int k = 0; k < vps; ++k) {
        for (int l = 0; l < vps; ++l) {
          if (k != l) nb[s[k]].insert(s[l]);
        }
      }
    }
    for (int i = 0; i < nv; ++i) vertex_neighbors_[i].assign(nb[i].begin(), nb[i].end());
  }
}

Vec2 SimplicialMesh::centroid(int t) const {
  const auto& s = simplices_[t];
  Vec2 c = vertices_[s[0]] + vertices_[s[1]];
  double cnt = 2.0;
  if (dim_ == 2) {
    c += vertices_[s[2]];
    cnt = 3.0;
  }
  return (1.0 / cnt) * c;
}

SimplicialMesh SimplicialMesh::interval(double a, double b, int n) {
  if (n < 1 || !(b > a)) throw std::invalid_argument("interval(a,b,n) needs b > a, n >= 1");
  std::vector<Vec2> verts(n + 1);
  for (int i = 0; i <= n; ++i) verts[i] = {a + (b - a) * i / n, 0.0};
  std::vector<std::array<int, 3>> simp(n);
  for (int i = 0; i < n; ++i) simp[i] = {i, i + 1, -1};
  return SimplicialMesh(1, std::move(verts), std::move(simp));
}

SimplicialMesh SimplicialMesh::square(int n) {
  if (n < 1) throw std::invalid_argument("square(n) needs n >= 1");
  const int m = n + 1;
  std::vector<Vec2> verts(m * m);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      verts[i + j * m] = {static_cast<double>(i) / n, static_cast<double>(j) / n};
    }
  }
  std::vector<std::array<int, 3>> simp;
  simp.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = i + j * m, v10 = v00 + 1, v01 = v00 + m, v11 = v01 + 1;
      simp.push_back({v00, v10, v11});
      simp.push_back({v00, v11, v01});
    }
  }
  return SimplicialMesh(2, std::move(verts), std::move(simp));
}

SimplicialMesh SimplicialMesh::disk(double radius, int n) {
  if (n < 1 || !(radius > 0.0)) throw std::invalid_argument("disk(r,n) needs r > 0, n >= 1");
  const auto ring_base = [](int i) { return 1 + 3 * i * (i - 1); };
  std::vector<Vec2> verts;
  verts.push_back({0.0, 0.0});
  for (int i = 1; i <= n; ++i) {
    const int cnt = 6 * i;
    const double rho = radius * i / n;
    for (int k = 0; k < cnt; ++k) {
      const double th = 2.0 * std::numbers::pi * k / cnt;
      verts.push_back({rho * std::cos(th), rho * std::sin(th)});
    }
  }
  std::vector<std::array<int, 3>> simp;
  simp.reserve(6 * n * n);
  for (int s = 0; s < 6; ++s) {
    simp.push_back({ring_base(1) + s, ring_base(1) + (s + 1) % 6, 0});
  }
  for (int i = 2; i <= n; ++i) {
    const int out_base = ring_base(i), out_cnt = 6 * i;
    const int in_base = ring_base(i - 1), in_cnt = 6 * (i - 1);
    for (int s = 0; s < 6; ++s) {
      const auto out = [&](int j) { return out_base + (s * i + j) % out_cnt; };
      const auto in = [&](int j) { return in_base + (s * (i - 1) + j) % in_cnt; };
      for (int j = 0; j < i; ++j) simp.push_back({out(j), out(j + 1), in(j)});
      for (int j = 0; j + 1 < i; ++j) simp.push_back({in(j + 1), in(j), out(j + 1)});
    }
  }
  return SimplicialMesh(2, std::move(verts), std::move(simp));
}

SimplicialMesh SimplicialMesh::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read mesh file: " + path);
  int dim = 0, nv = 0, ns = 0, nb = 0;
  if (!(in >> dim >> nv >> ns >> nb)) throw std::runtime_error("bad mesh header: " + path);
  std::vector<Vec2> verts(nv);
  for (int i = 0; i < nv; ++i) {
    in >> verts[i].x;
    if (dim == 2) in >> verts[i].y;
  }
  std::vector<std::array<int, 3>> simp(ns, {-1, -1, -1});
  for (int t = 0; t < ns; ++t) {
    for (int k = 0; k <= dim; ++k) in >> simp[t][k];
  }
  std::set<std::pair<int, int>> listed;
  for (int b = 0; b < nb; ++b) {
    int a = -1, c = -1;
    in >> a;
    if (dim == 2) in >> c;
    if (a > c && dim == 2) std::swap(a, c);
    listed.insert({a, c});
  }
  if (!in) throw std::runtime_error("truncated mesh file: " + path);
  SimplicialMesh mesh(dim, std::move(verts), std::move(simp));
  std::set<std::pair<int, int>> derived;
  for (const auto& f : mesh.boundary_) {
    int a = f.v[0], c = f.v[1];
    if (dim == 2 && a > c) std::swap(a, c);
    derived.insert({a, c});
  }
  if (derived != listed) {
    throw std::runtime_error("boundary facets inconsistent with connectivity: " + path);
  }
  return mesh;
}

void SimplicialMesh::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  char buf[80];
  out << dim_ << ' ' << num_vertices() << ' ' << num_simplices() << ' '
      << num_boundary_facets() << '\n';
  for (const auto& v : vertices_) {
    if (dim_ == 1) {
      std::snprintf(buf, sizeof buf, "%.17g\n", v.x);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x, v.y);
    }
    out << buf;
  }
  for (const auto& s : simplices_) {
    out << s[0] << ' ' << s[1];
    if (dim_ == 2) out << ' ' << s[2];
    out << '\n';
  }
  for (const auto& f : boundary_) {
    out << f.v[0];
    if (dim_ == 2) out << ' ' << f.v[1];
    out << '\n';
  }
}

std::vector<BoundaryQuadraturePoint> SimplicialMesh::boundary_quadrature() const {
  std::vector<BoundaryQuadraturePoint> q;
  q.reserve(boundary_.size());
  for (int b = 0; b < num_boundary_facets(); ++b) {
    const auto& f = boundary_[b];
    q.push_back({f.midpoint, f.measure, f.normal, b});
  }
  return q;
}

double SimplicialMesh::boundary_measure() const {
  double s = 0.0;
  for (const auto& f : boundary_) s += f.measure;
  return s;
}

}  // namespace shapegrad
