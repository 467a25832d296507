#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pqlap {

using Point = std::array<double, 2>;

/// Axis-aligned interval (1D) or rectangle (2D), plus the padding used to
/// build the enlarged domain that contains its closure.
struct DomainSpec {
  int dimension = 1;
  Point lower{0.0, 0.0};
  Point upper{1.0, 1.0};
  double padding = 0.0;

  void check() const;
  double axis_length(int axis) const { return upper[axis] - lower[axis]; }
  double min_axis_length() const;
  /// Radius of the largest ball inside the domain.
  double inradius() const { return 0.5 * min_axis_length(); }
};

/// Padding of a quarter of the shortest axis.
double default_padding(const DomainSpec& spec);

/// A quadrature point of the element rule: 1D midpoint, 2D three interior
/// points at barycentric coordinates (2/3, 1/6, 1/6) and permutations.
struct QuadraturePoint {
  std::size_t element = 0;
  std::array<double, 3> shape{};  // P1 basis values of the element's nodes
  double weight = 0.0;            // includes the element measure
  Point x{};
};

/// Uniform simplicial mesh of a box: segments in 1D, triangles from split
/// rectangles in 2D. Immutable after construction.
class Mesh {
 public:
  Mesh(int dimension, Point lower, Point upper, std::array<int, 2> cells);

  int dimension() const { return dim_; }
  int nodes_per_element() const { return dim_ + 1; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t element_count() const { return elements_.size(); }

  const Point& node(std::size_t i) const { return nodes_[i]; }
  const std::array<std::size_t, 3>& element(std::size_t e) const { return elements_[e]; }
  double measure(std::size_t e) const { return measures_[e]; }
  /// Constant gradients of the P1 basis functions of element e.
  const std::array<Point, 3>& shape_gradients(std::size_t e) const { return gradients_[e]; }

  bool is_boundary(std::size_t i) const { return boundary_[i]; }
  std::size_t interior_count() const { return interior_count_; }

  /// Characteristic spacing: largest per-axis cell width.
  double spacing() const { return spacing_; }

  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }
  const std::array<int, 2>& cells() const { return cells_; }

  const std::vector<QuadraturePoint>& quadrature() const { return quadrature_; }
  int points_per_element() const { return dim_ == 1 ? 1 : 3; }

  /// Element containing x and the barycentric weights of its nodes, or
  /// nullopt when x lies outside the mesh hull (tolerance 1e-12).
  std::optional<std::pair<std::size_t, std::array<double, 3>>> locate(const Point& x) const;

 private:
  std::size_t node_index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(cells_[0] + 1) +
           static_cast<std::size_t>(i);
  }

  int dim_;
  Point lower_, upper_;
  std::array<int, 2> cells_;
  double spacing_ = 0.0;
  std::vector<Point> nodes_;
  std::vector<std::array<std::size_t, 3>> elements_;
  std::vector<double> measures_;
  std::vector<std::array<Point, 3>> gradients_;
  std::vector<bool> boundary_;
  std::size_t interior_count_ = 0;
  std::vector<QuadraturePoint> quadrature_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Nodal scalar function on a mesh.
class Field {
 public:
  Field() = default;  // detached, no mesh
  explicit Field(MeshPtr mesh);
  Field(MeshPtr mesh, Eigen::VectorXd values);

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }

  /// Values of the P1 interpolant at every quadrature point of the mesh.
  Eigen::VectorXd at_quadrature() const;

 private:
  MeshPtr mesh_;
  Eigen::VectorXd values_;
};

Field interpolate(const MeshPtr& mesh, const std::function<double(const Point&)>& f);

/// Boolean per node. strip_width is set when the mask is a boundary strip.
struct RegionMask {
  MeshPtr mesh;
  std::vector<bool> inside;
  std::optional<double> strip_width;

  std::size_t count() const;
  RegionMask complement() const;
};

RegionMask whole_domain(const MeshPtr& mesh);
RegionMask interior_nodes(const MeshPtr& mesh);
RegionMask mask_where(const MeshPtr& mesh, const std::function<bool(std::size_t)>& pred);

/// Uniform mesh of the domain with n subdivisions per axis.
MeshPtr build_mesh(const DomainSpec& spec, int n);

/// Mesh of the enlarged domain (bounds expanded by spec.padding per axis)
/// with n subdivisions per axis.
MeshPtr enlarged_mesh(const DomainSpec& spec, int n);

/// Enlarged-domain mesh whose spacing matches build_mesh(spec, n), so that the
/// nodes of the original mesh are nodes of the enlarged one whenever the
/// padding is a multiple of the spacing.
MeshPtr aligned_enlarged_mesh(const DomainSpec& spec, int n);

/// Distance of each node to the boundary of its own mesh domain.
Field distance_to_boundary(const MeshPtr& mesh);

/// Nodes with dist(x, boundary) < strip_width. Requires
/// 0 < strip_width < inradius / 2.
RegionMask boundary_strip(const MeshPtr& mesh, double strip_width);

/// Piecewise-linear interpolation of a field at the target mesh nodes.
Field transfer(const Field& field, const MeshPtr& target);

struct Extrema {
  double min = 0.0;
  double max = 0.0;
  std::size_t argmin = 0;
  std::size_t argmax = 0;
};

Extrema field_extrema(const Field& field, const RegionMask& mask);
Extrema field_extrema(const Field& field);

/// Writes node coordinates and element connectivity as comma-separated
/// records, each section introduced by a '#' header line.
void write_mesh_csv(const Mesh& mesh, std::ostream& out);

/// One record per node: index,x[,y],value. Lines starting with '#' are comments.
void write_field_csv(const Field& field, std::ostream& out, const std::string& value_name = "value");
/// Reads what write_field_csv wrote; node count and coordinates must match the mesh.
Field read_field_csv(const MeshPtr& mesh, std::istream& in);

}  // namespace pqlap
