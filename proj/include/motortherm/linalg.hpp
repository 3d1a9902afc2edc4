// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace motortherm {

// Time series are stored one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

}  // namespace motortherm
