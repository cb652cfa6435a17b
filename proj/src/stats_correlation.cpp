#include <cmath>

#include "sipkit/error.hpp"
#include "sipkit/stats.hpp"

namespace sipkit {

DistanceMatrix pattern_distance(const CorrelationMap& map) {
  if (map.rho.rows() != static_cast<Eigen::Index>(map.rows.size()) ||
      map.rho.cols() != static_cast<Eigen::Index>(map.cols.size())) {
    throw Error(ErrorCode::DimensionMismatch, "correlation map labels do not match its shape");
  }
  Eigen::MatrixXd rho = map.rho;
  DistanceMatrix out;
  out.ids = map.cols;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      if (!std::isfinite(rho(i, j))) {
        rho(i, j) = 0.0;
        ++out.missing_treated_as_zero;
      }
    }
  }
  const Eigen::Index k = rho.cols();
  out.distance = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const double d = (rho.col(a) - rho.col(b)).norm();
      out.distance(a, b) = d;
      out.distance(b, a) = d;
    }
  }
  return out;
}

}  // namespace sipkit
