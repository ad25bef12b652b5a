#pragma once

#include <Eigen/Dense>

namespace lr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace lr
