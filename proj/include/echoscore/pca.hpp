#pragma once

#include <Eigen/Dense>

namespace echoscore {

/// Projects rows of `z` onto the top-2 principal axes of the centered data.
/// Each axis is sign-fixed so its largest-magnitude loading is positive.
Eigen::MatrixXd pca_2d(const Eigen::MatrixXd& z);

}  // namespace echoscore
