#include "coshfit/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace coshfit {

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  if (a == b) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  double l1 = 0.0;
  // Boost terminates on a relative criterion; tighten it until the absolute
  // target is met or the relative floor is reached.
  double rel_tol = 1e-12;
  double value = 0.0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    value = gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol, &error, &l1);
    if (error <= abs_tol || rel_tol <= 1e-15) break;
    rel_tol *= 1e-1;
  }
  return value;
}

}  // namespace coshfit
