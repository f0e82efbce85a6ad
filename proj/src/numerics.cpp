#include "ebind/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "ebind/errors.hpp"

namespace ebind {

double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

namespace numerics {

namespace {

std::vector<double> split_points(double a, double b, std::span<const double> breakpoints) {
    std::vector<double> pts{a};
    for (double p : breakpoints) {
        if (p > a && p < b) pts.push_back(p);
    }
    std::sort(pts.begin() + 1, pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    pts.push_back(b);
    return pts;
}

}  // namespace

QuadratureResult integrate_radial(const std::function<double(double)>& f, double a, double b,
                                  const RadialQuadrature& quad, std::span<const double> breakpoints) {
    if (!(a <= b)) throw InvalidInput("integrate_radial: interval bounds out of order");
    if (quad.tolerance <= 0.0) throw InvalidInput("integrate_radial: tolerance must be positive");
    if (a == b) return {};

    using boost::math::quadrature::gauss_kronrod;
    const auto pts = split_points(a, b, breakpoints);
    // boost's criterion is relative; tighter than ~1e-13 it only chases roundoff
    const double inner_tol = std::max(quad.tolerance * 1e-2, 1e-13);
    QuadratureResult total;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double err = 0.0;
        double l1 = 0.0;
        double piece = 0.0;
        if (std::isinf(pts[i + 1])) {
            piece = gauss_kronrod<double, 31>::integrate(f, pts[i], pts[i + 1], quad.max_subdivisions, inner_tol, &err,
                                                         &l1);
        } else {
            const double mid = 0.5 * (pts[i] + pts[i + 1]);
            const double half = 0.5 * (pts[i + 1] - pts[i]);
            piece = gauss_kronrod<double, 31>::integrate([&](double u) { return half * f(mid + half * u); }, -1.0,
                                                         1.0, quad.max_subdivisions, inner_tol, &err, &l1);
        }
        if (!std::isfinite(piece)) {
            throw ConvergenceError("integrate_radial: non-finite integrand on [" + std::to_string(pts[i]) + ", " +
                                       std::to_string(pts[i + 1]) + "]",
                                   piece);
        }
        total.value += piece;
        total.error += err;
    }
    const double allowed = std::max(quad.tolerance, quad.tolerance * std::abs(total.value));
    if (total.error > allowed) {
        std::ostringstream msg;
        msg << "integrate_radial: error estimate " << total.error << " above tolerance " << allowed
            << " after " << quad.max_subdivisions << " subdivision levels";
        throw ConvergenceError(msg.str(), total.value);
    }
    return total;
}

void GaussRule::append(const GaussRule& other) {
    nodes.insert(nodes.end(), other.nodes.begin(), other.nodes.end());
    weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

GaussRule gauss_legendre(std::size_t n, double a, double b) {
    if (n == 0) throw InvalidInput("gauss_legendre: need at least one node");
    GaussRule rule;
    if (n == 1) {
        rule.nodes = {0.5 * (a + b)};
        rule.weights = {b - a};
        return rule;
    }
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = p2;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

GaussRule composite_gauss(double a, double b, std::size_t order, std::size_t panels,
                          std::span<const double> breakpoints) {
    if (!(a < b)) throw InvalidInput("composite_gauss: empty interval");
    if (panels == 0) throw InvalidInput("composite_gauss: need at least one panel");
    const auto pts = split_points(a, b, breakpoints);
    GaussRule rule;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double width = (pts[i + 1] - pts[i]) / static_cast<double>(panels);
        for (std::size_t p = 0; p < panels; ++p) {
            const double lo = pts[i] + width * static_cast<double>(p);
            const double hi = (p + 1 == panels) ? pts[i + 1] : lo + width;
            rule.append(gauss_legendre(order, lo, hi));
        }
    }
    return rule;
}

GaussRule exponential_tail_rule(double r0, double kappa, std::size_t order, double span) {
    if (!(r0 > 0.0) || !(kappa > 0.0)) throw InvalidInput("exponential_tail_rule: need r0 > 0 and kappa > 0");
    const double decay_width = 0.5 / kappa;
    const double end = r0 + span / kappa;
    GaussRule rule;
    double lo = r0;
    // Geometric panels resolve the algebraic 1/r^n factors near r0.
    while (lo < end) {
        double width = std::min(lo, decay_width);
        double hi = std::min(lo + width, end);
        rule.append(gauss_legendre(order, lo, hi));
        lo = hi;
    }
    return rule;
}

AngularScheme::AngularScheme(std::size_t n_theta, std::size_t n_phi) {
    if (n_theta < 3 || n_phi < 5) throw InvalidInput("AngularScheme: need n_theta >= 3 and n_phi >= 5");
    const GaussRule polar = gauss_legendre(n_theta, -1.0, 1.0);
    constexpr double azimuth_offset = 0.3731;  // keeps nodes off multiples of pi/4
    nodes_.reserve(n_theta * n_phi);
    weights_.reserve(n_theta * n_phi);
    for (std::size_t i = 0; i < n_theta; ++i) {
        const double ct = polar.nodes[i];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (std::size_t j = 0; j < n_phi; ++j) {
            const double phi = 2.0 * std::numbers::pi * (static_cast<double>(j) + azimuth_offset) /
                               static_cast<double>(n_phi);
            Vec3 n{st * std::cos(phi), st * std::sin(phi), ct};
            const double len = norm(n);
            for (double& c : n) c /= len;
            nodes_.push_back(n);
            weights_.push_back(0.5 * polar.weights[i] / static_cast<double>(n_phi));
        }
    }
    degree_ = std::min(2 * n_theta - 1, n_phi - 1);
}

double angular_average(const std::function<double(const Vec3&)>& g, const AngularScheme& scheme) {
    double sum = 0.0;
    const auto& nodes = scheme.nodes();
    const auto& weights = scheme.weights();
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * g(nodes[i]);
    return sum;
}

FixedPointResult fixed_point(const std::function<double(double)>& map, double initial_guess, double tol,
                             int max_iterations) {
    if (tol <= 0.0) throw InvalidInput("fixed_point: tolerance must be positive");
    std::vector<double> trace{initial_guess};
    double x = initial_guess;
    double previous_residual = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    for (int it = 1; it <= max_iterations; ++it) {
        const double next = map(x);
        if (!std::isfinite(next)) throw ConvergenceError("fixed_point: map returned a non-finite value", x, trace);
        const double residual = std::abs(next - x);
        trace.push_back(next);
        if (residual <= tol) return {next, std::abs(map(next) - next), it};
        growth_streak = residual > previous_residual ? growth_streak + 1 : 0;
        if (growth_streak >= 5) throw ConvergenceError("fixed_point: residual keeps growing (divergence)", next, trace);
        previous_residual = residual;
        x = next;
    }
    throw ConvergenceError("fixed_point: iteration cap reached", x, trace);
}

double solve_bracketed(const std::function<double(double)>& f, double lo, double hi, int digits,
                       int max_iterations) {
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw BracketError("solve_bracketed: f has equal signs at both ends");
    boost::uintmax_t iters = static_cast<boost::uintmax_t>(max_iterations);
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(digits), iters);
    if (iters >= static_cast<boost::uintmax_t>(max_iterations)) {
        throw ConvergenceError("solve_bracketed: iteration cap reached", 0.5 * (a + b));
    }
    return 0.5 * (a + b);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InvalidInput("linear_fit: need at least two matching points");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw InvalidInput("linear_fit: degenerate abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

LinearFit log_log_fit(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidInput("log_log_fit: values must be positive");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return linear_fit(lx, ly);
}

}  // namespace numerics
}  // namespace ebind
