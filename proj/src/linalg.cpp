#include "cgs/linalg.hpp"

#include <algorithm>
#include <limits>

namespace cgs::linalg {

namespace {

double cutoff(const Eigen::VectorXd& sv, Eigen::Index rows, Eigen::Index cols, double rel_tol) {
  if (sv.size() == 0) return 0.0;
  const double rel = rel_tol >= 0.0
                         ? rel_tol
                         : static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
  return rel * sv(0);
}

}  // namespace

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cut = cutoff(sv, m.rows(), m.cols(), rel_tol);
  if (sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  return rank;
}

double projection_residual(const Eigen::MatrixXd& basis, const Eigen::VectorXd& v) {
  if (basis.cols() == 0) return v.norm();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::VectorXd coeffs = qr.solve(v);
  return (v - basis * coeffs).norm();
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double rel_tol) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cut = cutoff(sv, m.rows(), m.cols(), rel_tol);
  Eigen::Index rank = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > cut) ++rank;
    }
  }
  return svd.matrixV().rightCols(n - rank);
}

Eigen::VectorXd coordinates(const Eigen::MatrixXd& basis, const Eigen::VectorXd& v) {
  return basis.colPivHouseholderQr().solve(v);
}

}  // namespace cgs::linalg
