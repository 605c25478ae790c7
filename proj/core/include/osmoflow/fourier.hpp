#pragma once

#include <Eigen/Dense>

namespace osmoflow {

// How derivatives of periodic boundary data are computed. Fd4 is the default;
// Spectral requires an even number of samples.
enum class DerivScheme { Fd4, Spectral };

// d^order/dphi^order of a 2*pi-periodic sample vector (order 1 or 2).
Eigen::ArrayXd periodic_derivative(const Eigen::ArrayXd& f, int order, DerivScheme scheme);

}  // namespace osmoflow
