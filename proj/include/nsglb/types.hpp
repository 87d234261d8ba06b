#pragma once

#include <Eigen/Dense>

namespace nsglb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace nsglb
