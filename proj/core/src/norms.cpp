#include "rigidity/norms.hpp"

#include "rigidity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace rigidity {

QuadratureGrid build_grid(const ThinDomain& domain, GridResolution res, int panel_order) {
  if (res.n_t < 2 || res.n_theta < 2 || res.n_z < 2) {
    throw std::invalid_argument("build_grid: every resolution count must be >= 2");
  }
  const CoordRect& rect = domain.rect();
  const QuadratureRule rt = gauss_legendre(std::min(res.n_t, 64));
  const QuadratureRule rth =
      composite_gauss_legendre(rect.theta_min, rect.theta_max, res.n_theta, panel_order);
  const QuadratureRule rz = composite_gauss_legendre(rect.z_min, rect.z_max, res.n_z, panel_order);

  QuadratureGrid grid{domain, {static_cast<int>(rt.nodes.size()),
                               static_cast<int>(rth.nodes.size()),
                               static_cast<int>(rz.nodes.size())},
                      {}};
  grid.nodes.reserve(rt.nodes.size() * rth.nodes.size() * rz.nodes.size());
  const ThicknessProfile& prof = domain.profile();
  for (std::size_t i = 0; i < rth.nodes.size(); ++i) {
    const double theta = rth.nodes[i];
    for (std::size_t j = 0; j < rz.nodes.size(); ++j) {
      const double z = rz.nodes[j];
      const SurfacePoint sp = domain.surface().evaluate(theta, z);
      const double lo = -prof.g1(theta, z);
      const double hi = prof.g2(theta, z);
      const double half = 0.5 * (hi - lo);
      const double mid = 0.5 * (hi + lo);
      for (std::size_t k = 0; k < rt.nodes.size(); ++k) {
        const double t = mid + half * rt.nodes[k];
        double jac = 0.0;
        try {
          jac = volume_jacobian(sp, t);
        } catch (const ChartDegeneracyError&) {
          std::ostringstream msg;
          msg << "build_grid: chart degenerates at node (t, theta, z) = (" << t << ", " << theta
              << ", " << z << ")";
          throw ChartDegeneracyError(msg.str());
        }
        grid.nodes.push_back(
            GridNode{t, theta, z, rth.weights[i] * rz.weights[j] * half * rt.weights[k] * jac});
      }
    }
  }
  return grid;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 32) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t mid = v.size() / 2;
  return pairwise_sum(v.first(mid)) + pairwise_sum(v.subspan(mid));
}

double QuadratureGrid::volume() const {
  std::vector<double> w(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) w[i] = nodes[i].weight;
  return pairwise_sum(w);
}

void check_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    std::ostringstream msg;
    msg << "L^p exponent p = " << p << " is unsupported: the estimates hold for 1 < p < infinity";
    throw UnsupportedExponentError(msg.str());
  }
}

double lp_norm_weighted(std::span<const double> magnitudes, std::span<const double> weights,
                        double p) {
  check_exponent(p);
  if (magnitudes.size() != weights.size()) {
    throw std::invalid_argument("lp_norm: values and weights differ in length");
  }
  // Factor out the largest magnitude so |v|^p neither overflows nor underflows.
  double vmax = 0.0;
  for (double m : magnitudes) {
    if (!std::isfinite(m)) throw std::domain_error("lp_norm: non-finite value");
    vmax = std::max(vmax, std::abs(m));
  }
  if (vmax == 0.0) return 0.0;
  std::vector<double> terms(magnitudes.size());
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    terms[i] = weights[i] * std::pow(std::abs(magnitudes[i]) / vmax, p);
  }
  return vmax * std::pow(pairwise_sum(terms), 1.0 / p);
}

namespace {

std::vector<double> grid_weights(const QuadratureGrid& grid) {
  std::vector<double> w(grid.nodes.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = grid.nodes[i].weight;
  return w;
}

void check_size(std::size_t n, const QuadratureGrid& grid) {
  if (n != grid.nodes.size()) throw std::invalid_argument("lp_norm: one value per grid node");
}

}  // namespace

double lp_norm(std::span<const double> values, const QuadratureGrid& grid, double p) {
  check_size(values.size(), grid);
  const std::vector<double> w = grid_weights(grid);
  return lp_norm_weighted(values, w, p);
}

double lp_norm(std::span<const Vec3> values, const QuadratureGrid& grid, double p) {
  check_size(values.size(), grid);
  std::vector<double> m(values.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = values[i].norm();
  const std::vector<double> w = grid_weights(grid);
  return lp_norm_weighted(m, w, p);
}

double lp_norm(std::span<const Mat3> values, const QuadratureGrid& grid, double p) {
  check_size(values.size(), grid);
  std::vector<double> m(values.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = values[i].norm();
  const std::vector<double> w = grid_weights(grid);
  return lp_norm_weighted(m, w, p);
}

void write_samples_csv(std::ostream& out, const QuadratureGrid& grid, const FrameField& field) {
  const auto old_precision = out.precision(17);
  out << "t,theta,z,v1,v2,v3\n";
  for (const GridNode& n : grid.nodes) {
    const Vec3 v = field.value(ChartPoint{n.t, n.theta, n.z});
    out << n.t << ',' << n.theta << ',' << n.z << ',' << v[0] << ',' << v[1] << ',' << v[2]
        << '\n';
  }
  out.precision(old_precision);
}

// ---------------------------------------------------------------------------
// SampledField

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return cells;
}

std::vector<double> unique_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v) {
    if (out.empty() || std::abs(x - out.back()) > 1e-12 * std::max(1.0, std::abs(x))) {
      out.push_back(x);
    }
  }
  return out;
}

std::size_t axis_index(const std::vector<double>& axis, double x) {
  const auto it = std::lower_bound(axis.begin(), axis.end(), x - 1e-12 * std::max(1.0, std::abs(x)));
  if (it == axis.end() || std::abs(*it - x) > 1e-12 * std::max(1.0, std::abs(x))) {
    throw std::invalid_argument("sampled field: row coordinate is not on the lattice");
  }
  return static_cast<std::size_t>(it - axis.begin());
}

/// Indices and Lagrange weights of the (up to) four samples around x.
struct Stencil {
  std::size_t first = 0;
  int count = 0;
  double w[4] = {0, 0, 0, 0};
};

Stencil stencil(const std::vector<double>& axis, double x, const char* name) {
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  if (x < axis.front() - tol || x > axis.back() + tol) {
    std::ostringstream msg;
    msg << "sampled field: " << name << " = " << x << " outside [" << axis.front() << ", "
        << axis.back() << "]";
    throw DomainError(msg.str());
  }
  Stencil s;
  if (axis.size() == 1) {
    s.count = 1;
    s.w[0] = 1.0;
    return s;
  }
  const std::size_t n = axis.size();
  std::size_t i = static_cast<std::size_t>(std::upper_bound(axis.begin(), axis.end(), x) - axis.begin());
  i = std::clamp<std::size_t>(i, 1, n - 1);  // axis[i-1] <= x <= axis[i]
  if (n < 4) {
    s.first = i - 1;
    s.count = 2;
  } else {
    s.count = 4;
    s.first = std::clamp<std::size_t>(i >= 2 ? i - 2 : 0, 0, n - 4);
  }
  for (int a = 0; a < s.count; ++a) {
    double w = 1.0;
    for (int b = 0; b < s.count; ++b) {
      if (a == b) continue;
      w *= (x - axis[s.first + b]) / (axis[s.first + a] - axis[s.first + b]);
    }
    s.w[a] = w;
  }
  return s;
}

}  // namespace

SampledField SampledField::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("sampled field: empty CSV");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 6 || header[0] != "t" || header[1] != "theta" || header[2] != "z" ||
      header[3] != "v1") {
    throw std::invalid_argument("sampled field: header must be t,theta,z,v1,...,vk with k >= 3");
  }
  struct Row {
    double t, theta, z;
    Vec3 v;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("sampled field: wrong column count on line " +
                                  std::to_string(line_no));
    }
    Row r{};
    try {
      r.t = std::stod(cells[0]);
      r.theta = std::stod(cells[1]);
      r.z = std::stod(cells[2]);
      r.v = Vec3(std::stod(cells[3]), std::stod(cells[4]), std::stod(cells[5]));
    } catch (const std::exception&) {
      throw std::invalid_argument("sampled field: unparsable number on line " +
                                  std::to_string(line_no));
    }
    if (!r.v.allFinite()) {
      throw std::invalid_argument("sampled field: non-finite value on line " +
                                  std::to_string(line_no));
    }
    rows.push_back(r);
  }
  SampledField f;
  std::vector<double> ts, ths, zs;
  for (const Row& r : rows) {
    ts.push_back(r.t);
    ths.push_back(r.theta);
    zs.push_back(r.z);
  }
  f.t_ = unique_sorted(std::move(ts));
  f.theta_ = unique_sorted(std::move(ths));
  f.z_ = unique_sorted(std::move(zs));
  const std::size_t total = f.t_.size() * f.theta_.size() * f.z_.size();
  if (total != rows.size() || total == 0) {
    throw std::invalid_argument(
        "sampled field: rows do not form a full rectilinear (t, theta, z) lattice");
  }
  f.values_.assign(total, Vec3::Constant(std::numeric_limits<double>::quiet_NaN()));
  for (const Row& r : rows) {
    const std::size_t idx =
        (axis_index(f.t_, r.t) * f.theta_.size() + axis_index(f.theta_, r.theta)) * f.z_.size() +
        axis_index(f.z_, r.z);
    f.values_[idx] = r.v;
  }
  for (const Vec3& v : f.values_) {
    if (!v.allFinite()) throw std::invalid_argument("sampled field: duplicate lattice rows");
  }
  return f;
}

Vec3 SampledField::interpolate(const ChartPoint& q) const {
  const Stencil st = stencil(t_, q.t, "t");
  const Stencil sth = stencil(theta_, q.theta, "theta");
  const Stencil sz = stencil(z_, q.z, "z");
  Vec3 out = Vec3::Zero();
  for (int a = 0; a < st.count; ++a) {
    for (int b = 0; b < sth.count; ++b) {
      for (int c = 0; c < sz.count; ++c) {
        const std::size_t idx =
            ((st.first + a) * theta_.size() + (sth.first + b)) * z_.size() + (sz.first + c);
        out += st.w[a] * sth.w[b] * sz.w[c] * values_[idx];
      }
    }
  }
  return out;
}

FrameField SampledField::to_field(FieldKind kind, std::string label) const {
  ChartBox box{t_.front(), t_.back(),
               CoordRect{theta_.front(), theta_.back(), z_.front(), z_.back()}};
  SampledField copy = *this;
  return field_from_values(
      kind, [copy = std::move(copy)](const ChartPoint& q) { return copy.interpolate(q); }, box,
      std::move(label), 1e-5);
}

}  // namespace rigidity
