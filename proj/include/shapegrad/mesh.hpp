#pragma once

#include <array>
#include <string>
#include <vector>

#include "shapegrad/linalg.hpp"

namespace shapegrad {

struct BoundaryFacet {
  std::array<int, 2> v{-1, -1};  // facet vertices (1 in 1D, 2 in 2D)
  int adjacent_element = -1;
  Vec2 normal;       // outward unit normal
  double measure = 0.0;
  Vec2 midpoint;
};

struct BoundaryQuadraturePoint {
  Vec2 point;
  double weight = 0.0;
  Vec2 normal;
  int facet = -1;
};

// Conforming simplicial mesh in dimension 1 or 2. Immutable after
// construction; all cached element data is precomputed so that assembly
// loops are plain reads.
class SimplicialMesh {
 public:
  SimplicialMesh(int dim, std::vector<Vec2> vertices,
                 std::vector<std::array<int, 3>> simplices);

  // Generators.
  static SimplicialMesh interval(double a, double b, int n);
  static SimplicialMesh square(int n);                 // unit square (0,1)^2
  static SimplicialMesh disk(double radius, int n);    // hex-pattern polygon, 6 n^2 triangles

  // Text format: "dim nv ns nb", nv coordinate lines, ns simplex lines,
  // nb boundary facet lines (0-based indices). Facets are re-derived from
  // connectivity on load and checked against the listed ones.
  static SimplicialMesh read_file(const std::string& path);
  void write_file(const std::string& path) const;

  int dim() const { return dim_; }
  int vertices_per_simplex() const { return dim_ + 1; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_simplices() const { return static_cast<int>(simplices_.size()); }
  int num_boundary_facets() const { return static_cast<int>(boundary_.size()); }

  const Vec2& vertex(int i) const { return vertices_[i]; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::array<int, 3>& simplex(int t) const { return simplices_[t]; }
  const std::vector<std::array<int, 3>>& simplices() const { return simplices_; }
  const BoundaryFacet& boundary_facet(int b) const { return boundary_[b]; }
  const std::vector<BoundaryFacet>& boundary_facets() const { return boundary_; }

  double volume(int t) const { return volume_[t]; }
  double total_volume() const { return total_volume_; }
  Vec2 centroid(int t) const;

  // Gradient of the P1 hat function of local vertex k on simplex t.
  const Vec2& grad_phi(int t, int k) const { return grad_phi_[t][k]; }

  // Row sum of the P1 mass matrix (equals the lumped mass).
  double lumped_mass(int i) const { return lumped_mass_[i]; }
  const std::vector<double>& lumped_masses() const { return lumped_mass_; }

  bool vertex_on_boundary(int i) const { return vertex_on_boundary_[i] != 0; }

  // Vertices adjacent to i through an element edge.
  const std::vector<int>& vertex_neighbors(int i) const { return vertex_neighbors_[i]; }
  // Elements incident to vertex i, ascending.
  const std::vector<int>& vertex_elements(int i) const { return vertex_elements_[i]; }
  // Element across the facet opposite local vertex k of element t; -1 on the boundary.
  int element_neighbor(int t, int k) const { return element_neighbors_[t][k]; }

  std::vector<BoundaryQuadraturePoint> boundary_quadrature() const;

  double boundary_measure() const;

 private:
  void build_caches();

  int dim_;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> simplices_;
  std::vector<BoundaryFacet> boundary_;
  std::vector<double> volume_;
  std::vector<std::array<Vec2, 3>> grad_phi_;
  std::vector<double> lumped_mass_;
  std::vector<char> vertex_on_boundary_;
  std::vector<std::vector<int>> vertex_neighbors_;
  std::vector<std::vector<int>> vertex_elements_;
  std::vector<std::array<int, 3>> element_neighbors_;
  double total_volume_ = 0.0;
};

}  // namespace shapegrad
