#pragma once

// Quadrature, angular averaging, root finding and fixed-point iteration
// shared by the physics modules.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ebind {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& v);

namespace numerics {

/// Default absolute tolerance for radial integrals and fixed points.
inline constexpr double default_tolerance = 1e-10;

/// Adaptive Gauss-Kronrod settings for one-dimensional radial integrals.
struct RadialQuadrature {
    std::string scheme = "gauss-kronrod-31";
    double tolerance = default_tolerance;
    unsigned max_subdivisions = 18;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

/// Integrates f over [a, b], splitting at every breakpoint inside the open
/// interval. b may be +infinity. Throws ConvergenceError when the error
/// estimate stays above max(tol, tol*|value|).
QuadratureResult integrate_radial(const std::function<double(double)>& f, double a, double b,
                                  const RadialQuadrature& quad = {},
                                  std::span<const double> breakpoints = {});

/// Fixed-order node/weight rule on an interval.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    void append(const GaussRule& other);
};

/// n-point Gauss-Legendre rule mapped to [a, b].
GaussRule gauss_legendre(std::size_t n, double a, double b);

/// Composite Gauss-Legendre rule: [a, b] is split at the breakpoints and each
/// piece into `panels` equal panels carrying `order` nodes.
GaussRule composite_gauss(double a, double b, std::size_t order, std::size_t panels,
                          std::span<const double> breakpoints = {});

/// Rule for [r0, infinity) against an exp(-2 kappa r) envelope: geometric
/// panels close to r0, then panels of width 0.5/kappa out to r0 + span/kappa.
GaussRule exponential_tail_rule(double r0, double kappa, std::size_t order = 16, double span = 60.0);

/// Product rule on the unit sphere: Gauss-Legendre in cos(theta) times a
/// uniform azimuthal grid shifted off the coordinate half-axes. No node sits
/// on the k3-axis. Weights sum to one (normalized measure dOmega / 4 pi).
class AngularScheme {
public:
    AngularScheme(std::size_t n_theta, std::size_t n_phi);

    static AngularScheme standard() { return AngularScheme(10, 20); }

    const std::vector<Vec3>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return nodes_.size(); }

    /// Largest total degree of spherical polynomials integrated exactly.
    std::size_t degree() const { return degree_; }

private:
    std::vector<Vec3> nodes_;
    std::vector<double> weights_;
    std::size_t degree_;
};

/// (1/4pi) * integral of g over the unit sphere.
double angular_average(const std::function<double(const Vec3&)>& g, const AngularScheme& scheme);

struct FixedPointResult {
    double value = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/// Iterates x <- map(x) until |x - map(x)| <= tol. Throws ConvergenceError
/// with the iterate trace on a growing residual or the iteration cap.
FixedPointResult fixed_point(const std::function<double(double)>& map, double initial_guess,
                             double tol = default_tolerance, int max_iterations = 500);

/// Root of f on [lo, hi] via TOMS 748; f(lo) and f(hi) must differ in sign.
double solve_bracketed(const std::function<double(double)>& f, double lo, double hi,
                       int digits = 50, int max_iterations = 400);

/// Ordinary least-squares line y = intercept + slope * x.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double residual_rms = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Slope of log(y) against log(x).
LinearFit log_log_fit(std::span<const double> x, std::span<const double> y);

}  // namespace numerics
}  // namespace ebind
