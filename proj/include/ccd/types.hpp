#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace ccd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr int kStates = 5;       // [M_f, M_r, T_h, T_c, T_r]
inline constexpr int kReducedStates = 4;  // [M_r, T_h, T_c, T_r]
inline constexpr int kInputs = 2;       // [mdot_f, mdot_r]
inline constexpr int kDisturbances = 3;  // [Qdot_h, T_s, mdot_e]

using StateVec = Eigen::Matrix<double, kStates, 1>;
using InputVec = Eigen::Matrix<double, kInputs, 1>;
using DistVec = Eigen::Matrix<double, kDisturbances, 1>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Componentwise interval [lower, upper]. Infinite entries mean "unbounded".
struct BoxSet {
  Vec lower;
  Vec upper;

  BoxSet() = default;
  BoxSet(Vec lo, Vec hi);

  static BoxSet unbounded(int dim);
  static BoxSet point(const Vec& v);

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vec& v, double tol = 0.0) const;
  Vec center() const { return 0.5 * (lower + upper); }
  Vec half_width() const { return 0.5 * (upper - lower); }
  Vec clamp(const Vec& v) const;
  /// Largest amount by which v leaves the box (0 when inside).
  double excess(const Vec& v) const;
};

class CcdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Total mixed flow fell below the admissible threshold.
class DegenerateFlow : public CcdError {
 public:
  using CcdError::CcdError;
};

/// Recirculation tank mass fell below the admissible threshold.
class SingularMass : public CcdError {
 public:
  using CcdError::CcdError;
};

class DimensionMismatch : public CcdError {
 public:
  using CcdError::CcdError;
};

}  // namespace ccd
