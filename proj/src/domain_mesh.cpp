#include "pqlap/domain_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include "pqlap/errors.hpp"

namespace pqlap {

namespace {

constexpr double kCoordTol = 1e-12;

void check_field_mesh(const Field& a, const MeshPtr& m) {
  if (a.mesh_ptr() != m) throw InvalidArgument("field and mask live on different meshes");
}

}  // namespace

void DomainSpec::check() const {
  if (dimension != 1 && dimension != 2)
    throw InvalidArgument("domain dimension must be 1 or 2");
  for (int a = 0; a < dimension; ++a) {
    if (!(lower[a] < upper[a]) || !std::isfinite(lower[a]) || !std::isfinite(upper[a]))
      throw InvalidArgument("degenerate domain bounds on axis " + std::to_string(a));
  }
  if (!(padding >= 0.0)) throw InvalidArgument("padding must be nonnegative");
}

double DomainSpec::min_axis_length() const {
  double m = axis_length(0);
  if (dimension == 2) m = std::min(m, axis_length(1));
  return m;
}

double default_padding(const DomainSpec& spec) { return 0.25 * spec.min_axis_length(); }

Mesh::Mesh(int dimension, Point lower, Point upper, std::array<int, 2> cells)
    : dim_(dimension), lower_(lower), upper_(upper), cells_(cells) {
  if (dim_ == 1) {
    cells_[1] = 0;
    lower_[1] = upper_[1] = 0.0;
  }
  const int nx = cells_[0];
  const int ny = cells_[1];
  const double hx = (upper_[0] - lower_[0]) / nx;
  const double hy = dim_ == 2 ? (upper_[1] - lower_[1]) / ny : 0.0;
  spacing_ = std::max(hx, hy);

  // Coordinates are computed from the index, with the last node pinned to the
  // upper bound, so boundary nodes sit exactly on the boundary.
  auto coord = [](double lo, double hi, int i, int n) {
    return i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / n;
  };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      nodes_.push_back({coord(lower_[0], upper_[0], i, nx),
                        dim_ == 2 ? coord(lower_[1], upper_[1], j, ny) : 0.0});
      bool on_boundary = i == 0 || i == nx;
      if (dim_ == 2) on_boundary = on_boundary || j == 0 || j == ny;
      boundary_.push_back(on_boundary);
      if (!on_boundary) ++interior_count_;
    }
  }

  if (dim_ == 1) {
    for (int i = 0; i < nx; ++i) {
      const auto a = static_cast<std::size_t>(i);
      elements_.push_back({a, a + 1, 0});
    }
  } else {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t a = node_index(i, j), b = node_index(i + 1, j);
        const std::size_t c = node_index(i + 1, j + 1), d = node_index(i, j + 1);
        elements_.push_back({a, b, c});
        elements_.push_back({a, c, d});
      }
    }
  }

  measures_.reserve(elements_.size());
  gradients_.reserve(elements_.size());
  for (const auto& el : elements_) {
    std::array<Point, 3> g{};
    double meas = 0.0;
    if (dim_ == 1) {
      const double len = nodes_[el[1]][0] - nodes_[el[0]][0];
      meas = len;
      g[0] = {-1.0 / len, 0.0};
      g[1] = {1.0 / len, 0.0};
    } else {
      const Point& p0 = nodes_[el[0]];
      const Point& p1 = nodes_[el[1]];
      const Point& p2 = nodes_[el[2]];
      const double a11 = p1[0] - p0[0], a12 = p2[0] - p0[0];
      const double a21 = p1[1] - p0[1], a22 = p2[1] - p0[1];
      const double det = a11 * a22 - a12 * a21;
      meas = 0.5 * std::abs(det);
      // rows of J^{-1} are the gradients of the reference coordinates
      g[1] = {a22 / det, -a12 / det};
      g[2] = {-a21 / det, a11 / det};
      g[0] = {-g[1][0] - g[2][0], -g[1][1] - g[2][1]};
    }
    if (!(meas > 0.0)) throw InvalidArgument("mesh element with nonpositive measure");
    measures_.push_back(meas);
    gradients_.push_back(g);
  }

  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& el = elements_[e];
    if (dim_ == 1) {
      QuadraturePoint q;
      q.element = e;
      q.shape = {0.5, 0.5, 0.0};
      q.weight = measures_[e];
      q.x = {0.5 * (nodes_[el[0]][0] + nodes_[el[1]][0]), 0.0};
      quadrature_.push_back(q);
    } else {
      constexpr double big = 2.0 / 3.0, small = 1.0 / 6.0;
      const std::array<std::array<double, 3>, 3> bary{
          {{big, small, small}, {small, big, small}, {small, small, big}}};
      for (const auto& b : bary) {
        QuadraturePoint q;
        q.element = e;
        q.shape = b;
        q.weight = measures_[e] / 3.0;
        for (int a = 0; a < 2; ++a)
          q.x[a] = b[0] * nodes_[el[0]][a] + b[1] * nodes_[el[1]][a] + b[2] * nodes_[el[2]][a];
        quadrature_.push_back(q);
      }
    }
  }
}

std::optional<std::pair<std::size_t, std::array<double, 3>>> Mesh::locate(const Point& x) const {
  std::array<double, 2> local{};
  std::array<int, 2> cell{};
  for (int a = 0; a < dim_; ++a) {
    const double len = upper_[a] - lower_[a];
    const double tol = kCoordTol * std::max(1.0, len);
    if (x[a] < lower_[a] - tol || x[a] > upper_[a] + tol) return std::nullopt;
    const double t = std::clamp((x[a] - lower_[a]) / len, 0.0, 1.0) * cells_[a];
    cell[a] = std::min(static_cast<int>(std::floor(t)), cells_[a] - 1);
    local[a] = std::clamp(t - cell[a], 0.0, 1.0);
  }
  if (dim_ == 1) {
    return std::make_pair(static_cast<std::size_t>(cell[0]),
                          std::array<double, 3>{1.0 - local[0], local[0], 0.0});
  }
  const std::size_t base = 2 * (static_cast<std::size_t>(cell[1]) * cells_[0] + cell[0]);
  const double s = local[0], t = local[1];
  if (s >= t) return std::make_pair(base, std::array<double, 3>{1.0 - s, s - t, t});
  return std::make_pair(base + 1, std::array<double, 3>{1.0 - t, s, t - s});
}

Field::Field(MeshPtr mesh) : mesh_(std::move(mesh)) {
  if (!mesh_) throw InvalidArgument("field requires a mesh");
  values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh_->node_count()));
}

Field::Field(MeshPtr mesh, Eigen::VectorXd values) : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw InvalidArgument("field requires a mesh");
  if (static_cast<std::size_t>(values_.size()) != mesh_->node_count())
    throw InvalidArgument("field length does not match node count");
  if (!values_.allFinite()) throw InvalidArgument("field values must be finite");
}

Eigen::VectorXd Field::at_quadrature() const {
  const auto& quad = mesh_->quadrature();
  Eigen::VectorXd out(static_cast<Eigen::Index>(quad.size()));
  const int npe = mesh_->nodes_per_element();
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const auto& el = mesh_->element(quad[k].element);
    double v = 0.0;
    for (int a = 0; a < npe; ++a) v += quad[k].shape[a] * values_[static_cast<Eigen::Index>(el[a])];
    out[static_cast<Eigen::Index>(k)] = v;
  }
  return out;
}

Field interpolate(const MeshPtr& mesh, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->node_count()));
  for (std::size_t i = 0; i < mesh->node_count(); ++i) v[static_cast<Eigen::Index>(i)] = f(mesh->node(i));
  return Field(mesh, std::move(v));
}

std::size_t RegionMask::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), true));
}

RegionMask RegionMask::complement() const {
  RegionMask out{mesh, inside, std::nullopt};
  out.inside.flip();
  return out;
}

RegionMask whole_domain(const MeshPtr& mesh) {
  return RegionMask{mesh, std::vector<bool>(mesh->node_count(), true), std::nullopt};
}

RegionMask interior_nodes(const MeshPtr& mesh) {
  return mask_where(mesh, [&](std::size_t i) { return !mesh->is_boundary(i); });
}

RegionMask mask_where(const MeshPtr& mesh, const std::function<bool(std::size_t)>& pred) {
  RegionMask m{mesh, std::vector<bool>(mesh->node_count(), false), std::nullopt};
  for (std::size_t i = 0; i < mesh->node_count(); ++i) m.inside[i] = pred(i);
  return m;
}

MeshPtr build_mesh(const DomainSpec& spec, int n) {
  spec.check();
  if (n < 2) throw InvalidArgument("mesh needs at least 2 subdivisions per axis");
  return std::make_shared<const Mesh>(spec.dimension, spec.lower, spec.upper, std::array<int, 2>{n, n});
}

namespace {

DomainSpec padded(const DomainSpec& spec) {
  spec.check();
  if (!(spec.padding > 0.0)) throw InvalidArgument("enlarged domain requires padding > 0");
  DomainSpec out = spec;
  for (int a = 0; a < spec.dimension; ++a) {
    out.lower[a] -= spec.padding;
    out.upper[a] += spec.padding;
  }
  out.padding = 0.0;
  return out;
}

}  // namespace

MeshPtr enlarged_mesh(const DomainSpec& spec, int n) {
  const DomainSpec big = padded(spec);
  if (n < 2) throw InvalidArgument("mesh needs at least 2 subdivisions per axis");
  return std::make_shared<const Mesh>(big.dimension, big.lower, big.upper, std::array<int, 2>{n, n});
}

MeshPtr aligned_enlarged_mesh(const DomainSpec& spec, int n) {
  const DomainSpec big = padded(spec);
  if (n < 2) throw InvalidArgument("mesh needs at least 2 subdivisions per axis");
  std::array<int, 2> cells{1, 1};
  for (int a = 0; a < spec.dimension; ++a) {
    const double ratio = big.axis_length(a) / spec.axis_length(a);
    cells[a] = std::max(2, static_cast<int>(std::lround(ratio * n)));
  }
  return std::make_shared<const Mesh>(big.dimension, big.lower, big.upper, cells);
}

Field distance_to_boundary(const MeshPtr& mesh) {
  const int dim = mesh->dimension();
  return interpolate(mesh, [&](const Point& x) {
    double d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim; ++a)
      d = std::min({d, x[a] - mesh->lower()[a], mesh->upper()[a] - x[a]});
    return std::max(d, 0.0);
  });
}

RegionMask boundary_strip(const MeshPtr& mesh, double strip_width) {
  double inradius = 0.5 * (mesh->upper()[0] - mesh->lower()[0]);
  if (mesh->dimension() == 2) inradius = std::min(inradius, 0.5 * (mesh->upper()[1] - mesh->lower()[1]));
  if (!(strip_width > 0.0) || !(strip_width < 0.5 * inradius)) {
    std::ostringstream msg;
    msg << "strip width " << strip_width << " outside (0, " << 0.5 * inradius << ")";
    throw InvalidArgument(msg.str());
  }
  const Field d = distance_to_boundary(mesh);
  RegionMask m = mask_where(mesh, [&](std::size_t i) { return d[i] < strip_width; });
  m.strip_width = strip_width;
  return m;
}

Field transfer(const Field& field, const MeshPtr& target) {
  const Mesh& src = field.mesh();
  Eigen::VectorXd out(static_cast<Eigen::Index>(target->node_count()));
  for (std::size_t i = 0; i < target->node_count(); ++i) {
    const auto hit = src.locate(target->node(i));
    if (!hit) {
      std::ostringstream msg;
      msg << "target node " << i << " lies outside the source mesh";
      throw InvalidArgument(msg.str());
    }
    const auto& el = src.element(hit->first);
    double v = 0.0;
    for (int a = 0; a < src.nodes_per_element(); ++a) v += hit->second[a] * field[el[a]];
    out[static_cast<Eigen::Index>(i)] = v;
  }
  return Field(target, std::move(out));
}

Extrema field_extrema(const Field& field, const RegionMask& mask) {
  check_field_mesh(field, mask.mesh);
  Extrema ex{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0, 0};
  bool any = false;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!mask.inside[i]) continue;
    any = true;
    if (field[i] < ex.min) {
      ex.min = field[i];
      ex.argmin = i;
    }
    if (field[i] > ex.max) {
      ex.max = field[i];
      ex.argmax = i;
    }
  }
  if (!any) throw InvalidArgument("field_extrema over an empty mask");
  return ex;
}

Extrema field_extrema(const Field& field) { return field_extrema(field, whole_domain(field.mesh_ptr())); }

void write_mesh_csv(const Mesh& mesh, std::ostream& out) {
  out.precision(17);
  out << (mesh.dimension() == 1 ? "# nodes: index,x,boundary\n" : "# nodes: index,x,y,boundary\n");
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    out << i << ',' << mesh.node(i)[0];
    if (mesh.dimension() == 2) out << ',' << mesh.node(i)[1];
    out << ',' << (mesh.is_boundary(i) ? 1 : 0) << '\n';
  }
  out << (mesh.dimension() == 1 ? "# elements: index,n0,n1\n" : "# elements: index,n0,n1,n2\n");
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.element(e);
    out << e;
    for (int a = 0; a < mesh.nodes_per_element(); ++a) out << ',' << el[a];
    out << '\n';
  }
}

void write_field_csv(const Field& field, std::ostream& out, const std::string& value_name) {
  const Mesh& mesh = field.mesh();
  out.precision(17);
  out << (mesh.dimension() == 1 ? "# index,x," : "# index,x,y,") << value_name << '\n';
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    out << i << ',' << mesh.node(i)[0];
    if (mesh.dimension() == 2) out << ',' << mesh.node(i)[1];
    out << ',' << field[i] << '\n';
  }
}

Field read_field_csv(const MeshPtr& mesh, std::istream& in) {
  Eigen::VectorXd values(static_cast<Eigen::Index>(mesh->node_count()));
  std::size_t seen = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream rec(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(rec, cell, ',')) cols.push_back(std::stod(cell));
    if (cols.size() != static_cast<std::size_t>(mesh->dimension()) + 2)
      throw InvalidArgument("field record with wrong column count: " + line);
    const auto i = static_cast<std::size_t>(cols[0]);
    if (i != seen || i >= mesh->node_count()) throw InvalidArgument("field records out of order at: " + line);
    for (int d = 0; d < mesh->dimension(); ++d)
      if (std::abs(cols[1 + d] - mesh->node(i)[d]) > 1e-9)
        throw InvalidArgument("field coordinates do not match the mesh at node " + std::to_string(i));
    values[static_cast<Eigen::Index>(i)] = cols.back();
    ++seen;
  }
  if (seen != mesh->node_count()) throw InvalidArgument("field file has " + std::to_string(seen) + " records");
  return Field(mesh, std::move(values));
}

}  // namespace pqlap
