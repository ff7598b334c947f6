#pragma once

// Both sides of the interpolation estimate
//   |grad y - R|_p^2 <= C ( |y - Rx - b|_p |dist(grad y, SO(3))|_p / h
//                           + |y - Rx - b|_p^2 + |dist(grad y, SO(3))|_p^2 ),
// its linearisation (Korn version), the two-term balance form and the
// expression-level equivalence between the product and balance forms.

#include "rigidity/fields.hpp"
#include "rigidity/norms.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace rigidity {

/// Per-node quantities of a field on a grid, all in Euclidean coordinates.
struct NodeSamples {
  std::vector<Vec3> position;   // X
  std::vector<Vec3> value;      // Y (or U)
  std::vector<Mat3> gradient;   // DY, Euclidean Jacobian
  std::vector<double> dist;     // dist(DY, SO(3)) for deformations, dist(I + DU) for displacements
  std::vector<double> strain;   // |sym DU|_F; zero for deformations
};

/// Evaluates the field and its frame gradient at every node (in parallel,
/// results stored by node index).
NodeSamples sample_field(const FrameField& field, const QuadratureGrid& grid);

enum class ReportStatus { ok, degenerate_exact, impossible };

const char* to_string(ReportStatus status);

struct InequalityReport {
  double lhs = 0.0;           // |grad y - R|_p^2
  double rhs_product = 0.0;   // |y - Rx - b|_p |dist|_p / h
  double rhs_field_sq = 0.0;  // |y - Rx - b|_p^2
  double rhs_dist_sq = 0.0;   // |dist(grad y, SO(3))|_p^2
  double p = 2.0;
  double h = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 offset = Vec3::Zero();
  double ratio = 0.0;  // lhs / rhs sum; NaN unless status == ok
  ReportStatus status = ReportStatus::ok;
  double volume = 0.0;

  double rhs_sum() const { return rhs_product + rhs_field_sq + rhs_dist_sq; }
  nlohmann::json to_json() const;
};

/// Assembles all four quantities with the given rotation; when `offset` is
/// empty the grid mean of y - Rx is used. Throws std::invalid_argument if
/// `rotation` is not in SO(3) within 1e-10 or the field is not a deformation.
InequalityReport interpolation_sides(const FrameField& y, const Mat3& rotation,
                                     std::optional<Vec3> offset, const QuadratureGrid& grid,
                                     double p);
InequalityReport interpolation_sides(const NodeSamples& samples, const Mat3& rotation,
                                     std::optional<Vec3> offset, const QuadratureGrid& grid,
                                     double p);

/// Rotation minimising the L^2 distance of grad y to a constant rotation.
Mat3 best_fit_rotation(const NodeSamples& samples, const QuadratureGrid& grid);

/// Weighted grid mean of a vector quantity.
Vec3 grid_mean(const std::vector<Vec3>& values, const QuadratureGrid& grid);

struct KornReport {
  double grad_sq = 0.0;      // |grad u|_p^2
  double rhs_product = 0.0;  // |u|_p |e(u)|_p / h
  double field_sq = 0.0;     // |u|_p^2
  double strain_sq = 0.0;    // |e(u)|_p^2
  double p = 2.0;
  double h = 0.0;
  double ratio = 0.0;
  ReportStatus status = ReportStatus::ok;

  double rhs_sum() const { return rhs_product + field_sq + strain_sq; }
  nlohmann::json to_json() const;
};

KornReport korn_linear_sides(const FrameField& u, const QuadratureGrid& grid, double p);

/// The two terms |v|_p^2 / h^s and |dist(grad v + I, SO(3))|_p^2 / h^(2 - s).
struct BalanceForm {
  double s = 1.0;
  double term_field = 0.0;
  double term_dist = 0.0;
  double field_norm = 0.0;
  double dist_norm = 0.0;
  double h = 0.0;
};

BalanceForm balance_form(const FrameField& v, const QuadratureGrid& grid, double p, double s);
BalanceForm balance_form(double field_norm, double dist_norm, double h, double s);

/// Exponent s0 in [0, 2] with h^s0 = h |v| / |dist|, i.e. where both balance
/// terms agree (clamped to the interval).
double balanced_exponent(double field_norm, double dist_norm, double h);

/// Compares E1 = ab/h + a^2 + b^2 with E2* = min_{s in [0,2]} a^2/h^s + b^2/h^(2-s).
struct EquivalenceRecord {
  double a = 0.0, b = 0.0, h = 0.0;
  double e1 = 0.0;
  double e2_star = 0.0;
  double s_star = 0.0;
  double ratio_e2_over_e1 = 0.0;
  double ratio_e1_over_e2 = 0.0;
  bool upper_holds = false;  // E2* <= 3 E1
  bool lower_holds = false;  // E1 <= 2 E2* + a^2 + b^2
  bool amgm_holds = false;   // E2* >= 2ab/h
};

EquivalenceRecord equivalence_check(double a, double b, double h);

}  // namespace rigidity
