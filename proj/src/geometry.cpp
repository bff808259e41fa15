#include "roi_nbv/geometry.hpp"

namespace roi_nbv {

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho_err = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho_err <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

}  // namespace roi_nbv
