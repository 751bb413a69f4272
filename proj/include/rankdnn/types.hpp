#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace rankdnn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ClassId = std::uint32_t;

}  // namespace rankdnn
