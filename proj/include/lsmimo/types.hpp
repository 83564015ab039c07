// Common dense-algebra aliases used across the toolkit. Eigen is the only
// math dependency; positions are column-stored so distance kernels vectorize.
#pragma once

#include <complex>
#include <Eigen/Dense>

namespace lsmimo {

using scalar = double;
using cscalar = std::complex<double>;

using Vec2 = Eigen::Vector2d;
using VecX = Eigen::VectorXd;
using VecXc = Eigen::VectorXcd;
using MatX = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;
using Points = Eigen::Matrix2Xd; // one column per point, meters

} // namespace lsmimo
