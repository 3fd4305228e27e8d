#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace h2r {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Vector7 = Eigen::Matrix<Scalar, 7, 1>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec3 = Vector3<double>;
using Vec6 = Vector6<double>;
using Vec7 = Vector7<double>;
using VecX = VectorX<double>;
using MatX = MatrixX<double>;
using Quat = Eigen::Quaterniond;
using Iso3 = Eigen::Isometry3d;

// Observation layout sizes.
inline constexpr int kNumJoints = 6;
inline constexpr int kActionDim = 7;
inline constexpr int kStateDim = 37;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using ActionVec = Vec7;

}  // namespace h2r
