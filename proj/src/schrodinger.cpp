#include "ebind/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "ebind/errors.hpp"

namespace ebind {

namespace odeint = boost::numeric::odeint;

namespace {

using State1 = std::array<double, 1>;
using State2 = std::array<double, 2>;

constexpr double four_pi = 4.0 * std::numbers::pi;

std::vector<double> segment_points(const RadialPotential& w) {
    std::vector<double> pts{0.0};
    pts.insert(pts.end(), w.breakpoints().begin(), w.breakpoints().end());
    pts.push_back(w.support());
    return pts;
}

template <class State, class Rhs>
void integrate_segment(Rhs&& rhs, State& y, double a, double b, const SolverOptions& opts) {
    if (b <= a) return;
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(opts.ode_tolerance, opts.ode_tolerance);
    const double dt = std::min(opts.max_step, 0.25 * (b - a));
    // integrate_adaptive with a bounded step: march in max_step-sized chunks
    double t = a;
    while (t < b) {
        const double next = std::min(b, t + opts.max_step);
        odeint::integrate_adaptive(stepper, rhs, y, t, next, std::min(dt, next - t));
        t = next;
    }
}

}  // namespace

double prufer_angle(const RadialPotential& w, double mu, double kappa_sq, const SolverOptions& opts) {
    State1 theta{0.0};
    // Each segment has a smooth profile; evaluate W strictly inside it.
    const auto pts = segment_points(w);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double lo = pts[i];
        const double hi = pts[i + 1];
        auto rhs = [&](const State1& y, State1& dy, double r) {
            const double rr = std::clamp(r, lo, hi);
            const double s = std::sin(y[0]);
            const double c = std::cos(y[0]);
            dy[0] = c * c - (mu * w(rr) + kappa_sq) * s * s;
        };
        integrate_segment(rhs, theta, lo, hi, opts);
    }
    return theta[0];
}

double critical_coupling(const RadialPotential& w, const SolverOptions& opts) {
    if (!w.has_negative_part()) throw NoBinding("critical_coupling: W has no negative part, -Delta + lambda W never binds");
    const double half_pi = 0.5 * std::numbers::pi;
    auto mismatch = [&](double lambda) { return prufer_angle(w, lambda, 0.0, opts) - half_pi; };
    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (mismatch(hi) <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 200) throw BracketError("critical_coupling: no binding found below lambda = 2^200");
    }
    return numerics::solve_bracketed(mismatch, lo, hi, 52);
}

BoundStateSolution bound_state(const RadialPotential& w, double lambda, double gamma_reg, const SolverOptions& opts) {
    if (!(gamma_reg >= 0.0 && gamma_reg < 1.0)) throw InvalidInput("bound_state: gamma_reg must lie in [0, 1)");
    if (!(lambda > 0.0)) throw InvalidInput("bound_state: lambda must be positive");
    if (!w.has_negative_part()) throw NoBinding("bound_state: W has no negative part");
    const double mu = lambda / (1.0 - gamma_reg);
    const double half_pi = 0.5 * std::numbers::pi;

    // theta(R) must land on pi/2 + atan(kappa) so that u'/u = -kappa at R.
    auto mismatch = [&](double kappa) { return prufer_angle(w, mu, kappa * kappa, opts) - (half_pi + std::atan(kappa)); };
    const double at_zero = mismatch(0.0);
    if (!(at_zero > 0.0)) {
        throw NoBinding("bound_state: lambda/(1 - gamma_reg) does not exceed the critical coupling");
    }
    double depth = 0.0;
    for (int i = 0; i < 4000; ++i) {
        depth = std::max(depth, -w(w.support() * (i + 0.5) / 4000.0));
    }
    double hi = std::sqrt(mu * depth) + 1.0;
    int doublings = 0;
    while (mismatch(hi) >= 0.0) {
        hi *= 2.0;
        if (++doublings > 60) throw BracketError("bound_state: cannot bracket the decay rate");
    }
    const double kappa = numerics::solve_bracketed(mismatch, 0.0, hi, 52);

    BoundStateSolution sol;
    sol.lambda = lambda;
    sol.gamma_reg = gamma_reg;
    sol.kappa = kappa;
    sol.energy = -(1.0 - gamma_reg) * kappa * kappa;
    sol.support = w.support();

    // Interior nodes; integrate (u, u') through them, stopping at kinks of W.
    const double R = w.support();
    const auto interior = numerics::composite_gauss(0.0, R, opts.interior_order, opts.panels_per_interval,
                                                    w.breakpoints());
    const auto pts = segment_points(w);
    const double ksq = kappa * kappa;

    std::vector<double> u(interior.size());
    std::vector<double> du(interior.size());
    State2 y{0.0, 1.0};
    double pos = 0.0;
    std::size_t seg = 0;
    auto advance_to = [&](double target) {
        while (pos < target) {
            while (seg + 1 < pts.size() && pts[seg + 1] <= pos) ++seg;
            const double lo = pts[seg];
            const double hi_seg = pts[std::min(seg + 1, pts.size() - 1)];
            const double stop = std::min(target, hi_seg);
            auto rhs = [&](const State2& s, State2& ds, double r) {
                const double rr = std::clamp(r, lo, hi_seg);
                ds[0] = s[1];
                ds[1] = (mu * w(rr) + ksq) * s[0];
            };
            integrate_segment(rhs, y, pos, stop, opts);
            pos = stop;
        }
    };
    for (std::size_t i = 0; i < interior.size(); ++i) {
        advance_to(interior.nodes[i]);
        u[i] = y[0];
        du[i] = y[1];
    }
    advance_to(R);
    const double u_r = y[0];
    const double tail_rate = -y[1] / y[0];
    if (!(u_r > 0.0) || !(tail_rate > 0.0)) {
        throw ConvergenceError("bound_state: interior solution does not match a decaying exterior", tail_rate);
    }
    sol.tail_rate = tail_rate;

    const auto tail = numerics::exponential_tail_rule(R, tail_rate, opts.tail_order, opts.tail_span);
    sol.grid.r = interior.nodes;
    sol.grid.w = interior.weights;
    sol.grid.interior_size = interior.size();
    sol.grid.r.insert(sol.grid.r.end(), tail.nodes.begin(), tail.nodes.end());
    sol.grid.w.insert(sol.grid.w.end(), tail.weights.begin(), tail.weights.end());

    const std::size_t n = sol.grid.r.size();
    sol.f.resize(n);
    sol.df.resize(n);
    sol.d2f.resize(n);
    for (std::size_t i = 0; i < interior.size(); ++i) {
        const double r = sol.grid.r[i];
        const double d2u = (mu * w(r) + ksq) * u[i];
        sol.f[i] = u[i] / r;
        sol.df[i] = (du[i] - sol.f[i]) / r;
        sol.d2f[i] = (d2u - 2.0 * sol.df[i]) / r;
    }
    // Exterior: f = u(R) exp(-k (r - R)) / r, C^1 at R by the choice of k.
    for (std::size_t i = interior.size(); i < n; ++i) {
        const double r = sol.grid.r[i];
        const double k = tail_rate;
        const double e = u_r * std::exp(-k * (r - R));
        sol.f[i] = e / r;
        sol.df[i] = -e * (k * r + 1.0) / (r * r);
        sol.d2f[i] = e * (k * k * r * r + 2.0 * k * r + 2.0) / (r * r * r);
    }

    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm2 += sol.grid.w[i] * sol.grid.r[i] * sol.grid.r[i] * sol.f[i] * sol.f[i];
    norm2 *= four_pi;
    const double scale = 1.0 / std::sqrt(norm2);
    for (std::size_t i = 0; i < n; ++i) {
        sol.f[i] *= scale;
        sol.df[i] *= scale;
        sol.d2f[i] *= scale;
    }
    return sol;
}

namespace {

template <class F>
double radial_sum(const BoundStateSolution& sol, F&& integrand) {
    double s = 0.0;
    for (std::size_t i = 0; i < sol.grid.r.size(); ++i) {
        const double r = sol.grid.r[i];
        s += sol.grid.w[i] * r * r * integrand(i, r);
    }
    return four_pi * s;
}

}  // namespace

double norm_squared(const BoundStateSolution& sol) {
    return radial_sum(sol, [&](std::size_t i, double) { return sol.f[i] * sol.f[i]; });
}

GradientNorms gradient_norms(const BoundStateSolution& sol, const numerics::AngularScheme& scheme) {
    GradientNorms g;
    g.total = radial_sum(sol, [&](std::size_t i, double) { return sol.df[i] * sol.df[i]; });
    for (int axis = 0; axis < 3; ++axis) {
        const double share = numerics::angular_average([axis](const Vec3& n) { return n[axis] * n[axis]; }, scheme);
        g.per_axis[axis] = share * g.total;
    }
    return g;
}

double schrodinger_form(const BoundStateSolution& sol, const RadialPotential& w, double lambda) {
    return radial_sum(sol, [&](std::size_t i, double r) {
        return sol.df[i] * sol.df[i] + lambda * w(r) * sol.f[i] * sol.f[i];
    });
}

double regularized_form(const BoundStateSolution& sol, const RadialPotential& w) {
    return radial_sum(sol, [&](std::size_t i, double r) {
        return (1.0 - sol.gamma_reg) * sol.df[i] * sol.df[i] + sol.lambda * w(r) * sol.f[i] * sol.f[i];
    });
}

double laplacian_norm_squared(const BoundStateSolution& sol) {
    return radial_sum(sol, [&](std::size_t i, double r) {
        const double lap = sol.d2f[i] + 2.0 * sol.df[i] / r;
        return lap * lap;
    });
}

double potential_gradient_form(const BoundStateSolution& sol, const RadialPotential& w) {
    return radial_sum(sol, [&](std::size_t i, double r) { return w(r) * sol.df[i] * sol.df[i]; });
}

GradientExcessCheck gradient_excess_check(const BoundStateSolution& sol, const RadialPotential& w, double lambda, double c_w,
                            double slack) {
    GradientExcessCheck res;
    res.gradient_norm = gradient_norms(sol).total;
    res.lhs = laplacian_norm_squared(sol) + lambda * potential_gradient_form(sol, w);
    res.rhs = (c_w + slack) * res.gradient_norm;
    res.excess = res.lhs / res.gradient_norm - c_w;
    res.satisfied = res.lhs <= res.rhs;
    return res;
}

}  // namespace ebind
