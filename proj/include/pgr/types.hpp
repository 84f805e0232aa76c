#pragma once

#include <Eigen/Dense>

namespace pgr {

template <class Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// double is the reference numeric mode throughout
using Matrix = MatX<double>;
using Vector = VecX<double>;

}  // namespace pgr
