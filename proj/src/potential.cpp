#include "ebind/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ebind/errors.hpp"

namespace ebind {

RadialPotential::RadialPotential(Profile profile, double support, std::vector<double> breakpoints, std::string name,
                                 DecayParams decay)
    : profile_(std::move(profile)),
      support_(support),
      breakpoints_(std::move(breakpoints)),
      name_(std::move(name)),
      decay_(decay) {
    if (!profile_) throw InvalidInput("RadialPotential: empty profile");
    if (!(support_ > 0.0) || !std::isfinite(support_)) throw InvalidInput("RadialPotential: support must be finite and positive");
    std::erase_if(breakpoints_, [&](double b) { return !(b > 0.0 && b < support_); });
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

RadialPotential RadialPotential::indicator_well(double depth, double radius) {
    if (!(radius > 0.0)) throw InvalidInput("indicator_well: radius must be positive");
    return RadialPotential([depth](double) { return -depth; }, radius, {},
                           "indicator-well(depth=" + std::to_string(depth) + ", radius=" + std::to_string(radius) + ")",
                           DecayParams{radius, 1.0, 1.0});
}

RadialPotential RadialPotential::smooth_well(double depth, double radius) {
    if (!(radius > 0.0)) throw InvalidInput("smooth_well: radius must be positive");
    return RadialPotential(
        [depth, radius](double r) {
            const double t = 1.0 - (r / radius) * (r / radius);
            return -depth * t * t;
        },
        radius, {}, "smooth-well(depth=" + std::to_string(depth) + ", radius=" + std::to_string(radius) + ")",
        DecayParams{radius, 1.0, 1.0});
}

RadialPotential RadialPotential::exponential_well(double depth, double range, double r_max) {
    if (!(range > 0.0) || !(r_max > 0.0)) throw InvalidInput("exponential_well: range and r_max must be positive");
    // (1+r)^3 e^{-r/range} peaks at r = 3 range - 1.
    const double peak = std::max(0.0, 3.0 * range - 1.0);
    const double c = std::abs(depth) * std::pow(1.0 + peak, 3.0) * std::exp(-peak / range);
    return RadialPotential([depth, range](double r) { return -depth * std::exp(-r / range); }, r_max, {},
                           "exponential-well(depth=" + std::to_string(depth) + ", range=" + std::to_string(range) +
                               ", r_max=" + std::to_string(r_max) + ")",
                           DecayParams{0.0, c, 1.0});
}

RadialPotential RadialPotential::tabulated(std::vector<double> radii, std::vector<double> values) {
    if (radii.size() < 2 || radii.size() != values.size()) {
        throw InvalidInput("tabulated potential: need at least two (radius, value) rows");
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!std::isfinite(radii[i]) || !std::isfinite(values[i])) throw InvalidInput("tabulated potential: non-finite entry");
        if (radii[i] < 0.0) throw InvalidInput("tabulated potential: negative radius");
        if (i > 0 && !(radii[i] > radii[i - 1])) throw InvalidInput("tabulated potential: radii must increase strictly");
    }
    const double support = radii.back();
    std::vector<double> kinks(radii.begin(), radii.end());
    auto profile = [radii = std::move(radii), values = std::move(values)](double r) {
        if (r <= radii.front()) return values.front();
        if (r >= radii.back()) return values.back();
        const auto it = std::upper_bound(radii.begin(), radii.end(), r);
        const std::size_t hi = static_cast<std::size_t>(it - radii.begin());
        const std::size_t lo = hi - 1;
        const double t = (r - radii[lo]) / (radii[hi] - radii[lo]);
        return (1.0 - t) * values[lo] + t * values[hi];
    };
    return RadialPotential(std::move(profile), support, std::move(kinks), "tabulated", DecayParams{support, 1.0, 1.0});
}

RadialPotential RadialPotential::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("tabulated potential: cannot open " + path.string());
    std::vector<double> radii;
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        double r = 0.0;
        double w = 0.0;
        if (!(row >> r)) continue;
        if (!(row >> w)) throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
        radii.push_back(r);
        values.push_back(w);
    }
    auto pot = tabulated(std::move(radii), std::move(values));
    pot.name_ = "tabulated(" + path.filename().string() + ")";
    return pot;
}

double RadialPotential::operator()(double r) const {
    if (r > support_) return 0.0;
    return profile_(r);
}

bool RadialPotential::has_negative_part() const {
    constexpr int samples = 4000;
    for (int i = 0; i < samples; ++i) {
        const double r = support_ * (static_cast<double>(i) + 0.5) / samples;
        if ((*this)(r) < 0.0) return true;
    }
    return false;
}

RadialPotential RadialPotential::scaled(double factor) const {
    auto p = profile_;
    DecayParams d = decay_;
    d.c *= std::abs(factor);
    return RadialPotential([p, factor](double r) { return factor * p(r); }, support_, breakpoints_,
                           std::to_string(factor) + "*" + name_, d);
}

RadialPotential RadialPotential::squared() const {
    auto p = profile_;
    return RadialPotential(
        [p](double r) {
            const double v = p(r);
            return v * v;
        },
        support_, breakpoints_, "(" + name_ + ")^2", decay_);
}

namespace {

// Sign changes of w, located on a sampling grid inside each smooth piece.
std::vector<double> zero_crossings(const RadialPotential& w) {
    constexpr int samples = 64;
    std::vector<double> edges{0.0};
    edges.insert(edges.end(), w.breakpoints().begin(), w.breakpoints().end());
    edges.push_back(w.support());
    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double a = edges[i];
        const double h = (edges[i + 1] - a) / samples;
        double x0 = a;
        double f0 = w(a);
        for (int j = 1; j <= samples; ++j) {
            const double x1 = j == samples ? edges[i + 1] : a + j * h;
            const double f1 = w(x1);
            if (f0 != 0.0 && f1 != 0.0 && (f0 > 0.0) != (f1 > 0.0))
                roots.push_back(numerics::solve_bracketed([&](double r) { return w(r); }, x0, x1));
            x0 = x1;
            f0 = f1;
        }
    }
    return roots;
}

std::vector<double> with_crossings(const RadialPotential& w) {
    std::vector<double> kinks = w.breakpoints();
    const auto roots = zero_crossings(w);
    kinks.insert(kinks.end(), roots.begin(), roots.end());
    return kinks;
}

}  // namespace

RadialPotential RadialPotential::absolute() const {
    auto p = profile_;
    return RadialPotential([p](double r) { return std::abs(p(r)); }, support_, with_crossings(*this), "|" + name_ + "|",
                           decay_);
}

RadialPotential positive_part(const RadialPotential& w) {
    auto copy = w;
    return RadialPotential([copy](double r) { return std::max(copy(r), 0.0); }, w.support(), with_crossings(w),
                           "(" + w.name() + ")_+", w.decay());
}

namespace {

// Pieces narrower than this fraction of the support get a fixed Gauss rule.
constexpr double narrow_piece = 1e-6;

double integrate_piece(const std::function<double(double)>& f, double a, double b, double support, double tol) {
    if (b - a < narrow_piece * support) return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, a, b, tol);
}

// int_0^R |v(s)| s ln((r+s)/|r-s|) ds, split at r and at the profile kinks.
double angular_kernel_inner(const RadialPotential& av, double r, const std::vector<double>& pts) {
    auto integrand = [&](double s) {
        if (s == r) return 0.0;
        return av(s) * s * std::log((r + s) / std::abs(r - s));
    };
    std::vector<double> cuts = pts;
    cuts.push_back(r);
    std::sort(cuts.begin(), cuts.end());
    const double min_width = 1e-12 * cuts.back();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] > min_width)
            sum += integrate_piece(integrand, cuts[i], cuts[i + 1], cuts.back(), 1e-12);
    }
    return sum;
}

}  // namespace

DFunctionalReport d_functional(const RadialPotential& v, const numerics::RadialQuadrature& quad) {
    const auto av = v.absolute();
    std::vector<double> pts{0.0};
    pts.insert(pts.end(), av.breakpoints().begin(), av.breakpoints().end());
    pts.push_back(v.support());

    DFunctionalReport report;

    const auto radial = numerics::integrate_radial([&](double t) { return t * av(t); }, 0.0, v.support(), quad,
                                                   av.breakpoints());
    if (!std::isfinite(radial.value)) throw ConvergenceError("d_functional: radial branch diverges", radial.value);
    report.radial = radial.value;

    // int_{S^2} dOmega_y / |x-y|^2 = (2 pi/(r s)) ln((r+s)/|r-s|) reduces the
    // six-dimensional integral to 8 pi^2 int int |v(r)||v(s)| r s ln(...) dr ds.
    double dbl = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        dbl += integrate_piece(
            [&](double r) {
                const double ar = av(r);
                if (ar == 0.0) return 0.0;
                return ar * r * angular_kernel_inner(av, r, pts);
            },
            pts[i], pts[i + 1], v.support(), 1e-10);
    }
    dbl *= 8.0 * std::numbers::pi * std::numbers::pi;
    if (!std::isfinite(dbl) || dbl < 0.0) throw ConvergenceError("d_functional: double-integral branch diverges", dbl);
    report.double_integral = std::sqrt(dbl) / (2.0 * std::numbers::pi);

    report.value = std::min(report.double_integral, *report.radial);
    return report;
}

MonteCarloEstimate d_functional_monte_carlo(const std::function<double(const Vec3&)>& v, double radius,
                                            std::uint64_t samples, std::uint64_t seed) {
    if (!(radius > 0.0) || samples < 2) throw InvalidInput("d_functional_monte_carlo: need radius > 0 and >= 2 samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto direction = [&]() {
        const double ct = 2.0 * unit(rng) - 1.0;
        const double st = std::sqrt(1.0 - ct * ct);
        const double phi = 2.0 * std::numbers::pi * unit(rng);
        return Vec3{st * std::cos(phi), st * std::sin(phi), ct};
    };
    // x uniform in the ball; z = y - x drawn with density 1/(8 pi R |z|^2) on
    // |z| < 2R, which cancels the kernel singularity exactly.
    const double ball = 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
    const double z_norm = 8.0 * std::numbers::pi * radius;
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t n = 1; n <= samples; ++n) {
        const double rx = radius * std::cbrt(unit(rng));
        const Vec3 dx = direction();
        const Vec3 x{rx * dx[0], rx * dx[1], rx * dx[2]};
        const double rz = 2.0 * radius * unit(rng);
        const Vec3 dz = direction();
        const Vec3 y{x[0] + rz * dz[0], x[1] + rz * dz[1], x[2] + rz * dz[2]};
        const double sample = norm(y) < radius ? ball * z_norm * std::abs(v(x)) * std::abs(v(y)) : 0.0;
        const double delta = sample - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (sample - mean);
    }
    const double var = m2 / static_cast<double>(samples - 1);
    const double se_integral = std::sqrt(var / static_cast<double>(samples));
    MonteCarloEstimate est;
    const double integral = std::max(mean, 0.0);
    est.value = std::sqrt(integral) / (2.0 * std::numbers::pi);
    // first-order propagation through the square root
    est.standard_error = integral > 0.0 ? se_integral / (4.0 * std::numbers::pi * std::sqrt(integral)) : se_integral;
    return est;
}

CwReport c_w_constant(double lambda0, const RadialPotential& w, const numerics::RadialQuadrature& quad) {
    if (!(lambda0 > 0.0)) throw InvalidInput("c_w_constant: lambda0 must be positive");
    CwReport report;
    report.lambda0 = lambda0;
    report.d_w_plus = d_functional(positive_part(w), quad);
    report.d_w_squared = d_functional(w.squared(), quad);
    report.c_w = lambda0 * lambda0 * (1.0 + lambda0 * report.d_w_plus.value) * report.d_w_squared.value;
    return report;
}

DecayCheckResult decay_check(const RadialPotential& w, std::size_t samples, std::optional<double> r_max) {
    const auto& d = w.decay();
    if (!(d.c > 0.0) || !(d.delta > 0.0) || d.a < 0.0) throw InvalidInput("decay_check: need c > 0, delta > 0, a >= 0");
    const double upper = r_max.value_or(std::max(w.support(), 10.0 * (1.0 + d.a)));
    DecayCheckResult result;
    if (!(upper > d.a) || samples < 2) return result;
    const double lo = std::log1p(d.a);
    const double hi = std::log1p(upper);
    for (std::size_t i = 1; i <= samples; ++i) {
        // log grid in (1 + r) strictly above a
        const double r = std::expm1(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples));
        const double bound = d.c * std::pow(1.0 + r, -2.0 - d.delta);
        const double ratio = std::abs(w(r)) / bound;
        if (ratio > result.worst_ratio) {
            result.worst_ratio = ratio;
            result.worst_radius = r;
        }
    }
    result.passed = result.worst_ratio <= 1.0 + 1e-12;
    return result;
}

}  // namespace ebind
