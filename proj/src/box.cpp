#include "ccd/types.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace ccd {

BoxSet::BoxSet(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) {
    throw DimensionMismatch("BoxSet: lower/upper sizes differ");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (lower(i) > upper(i)) {
      throw CcdError("BoxSet: lower > upper at component " + std::to_string(i));
    }
  }
}

BoxSet BoxSet::unbounded(int dim) {
  return BoxSet(Vec::Constant(dim, -kInf), Vec::Constant(dim, kInf));
}

BoxSet BoxSet::point(const Vec& v) { return BoxSet(v, v); }

bool BoxSet::contains(const Vec& v, double tol) const {
  return excess(v) <= tol;
}

Vec BoxSet::clamp(const Vec& v) const {
  return v.cwiseMax(lower).cwiseMin(upper);
}

double BoxSet::excess(const Vec& v) const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    worst = std::max({worst, lower(i) - v(i), v(i) - upper(i)});
  }
  return worst;
}

}  // namespace ccd
