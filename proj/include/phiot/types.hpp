#pragma once

#include <Eigen/Core>

namespace phiot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace phiot
