#include "echoscore/pca.hpp"

#include <Eigen/Eigenvalues>

namespace echoscore {

Eigen::MatrixXd pca_2d(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(z.rows(), 2);
  if (z.rows() == 0 || z.cols() == 0) return out;
  const Eigen::MatrixXd centered = z.rowwise() - z.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(z.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::Index d = z.cols();
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, d); ++k) {
    Eigen::VectorXd axis = solver.eigenvectors().col(d - 1 - k);  // eigenvalues ascend
    Eigen::Index top = 0;
    axis.cwiseAbs().maxCoeff(&top);
    if (axis(top) < 0.0) axis = -axis;
    out.col(k) = centered * axis;
  }
  return out;
}

}  // namespace echoscore
