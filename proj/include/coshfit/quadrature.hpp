#pragma once

#include <functional>

namespace coshfit {

/// Adaptive Gauss-Kronrod integral of f over [a, b]. Infinite limits are allowed.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

}  // namespace coshfit
