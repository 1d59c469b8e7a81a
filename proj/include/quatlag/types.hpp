#pragma once

#include <Eigen/Dense>

namespace quatlag {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat43 = Eigen::Matrix<double, 4, 3>;
using Mat36 = Eigen::Matrix<double, 3, 6>;
using Mat46 = Eigen::Matrix<double, 4, 6>;
using Mat49 = Eigen::Matrix<double, 4, 9>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

} // namespace quatlag
