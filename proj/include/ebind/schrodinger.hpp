#pragma once

// s-wave Schroedinger problems for -(1 - gamma_reg) Delta + lambda W:
// critical coupling, the regularized bound state f_gamma, and the
// gradient-form inequality used to control the theta dressing.

#include <array>
#include <vector>

#include "ebind/numerics.hpp"
#include "ebind/potential.hpp"

namespace ebind {

struct SolverOptions {
    double ode_tolerance = 1e-13;   ///< absolute and relative, for every shooting integration
    double max_step = 0.02;         ///< upper bound on the ODE step inside the potential support
    std::size_t interior_order = 24;
    std::size_t panels_per_interval = 8;
    std::size_t tail_order = 16;
    double tail_span = 60.0;        ///< tail grid reaches support + tail_span / kappa
};

/// Radial nodes on [0, infinity) with weights for dr (no r^2 factor).
struct RadialGrid {
    std::vector<double> r;
    std::vector<double> w;
    std::size_t interior_size = 0;  ///< nodes [0, interior_size) lie inside the support
};

/// Normalized s-wave ground state f(r) of -(1 - gamma_reg) Delta + lambda W.
struct BoundStateSolution {
    double lambda = 0.0;
    double gamma_reg = 0.0;
    double energy = 0.0;      ///< e_gamma < 0
    double kappa = 0.0;       ///< sqrt(-e/(1 - gamma_reg)) from the matching condition
    double tail_rate = 0.0;   ///< decay rate of the attached exterior solution
    double support = 0.0;     ///< matching radius

    RadialGrid grid;
    std::vector<double> f;
    std::vector<double> df;   ///< f'(r)
    std::vector<double> d2f;  ///< f''(r)
};

/// Prufer angle theta(R) of u'' = (mu W + kappa^2) u with u(0) = 0, u'(0) = 1,
/// where u = rho sin(theta), u' = rho cos(theta).
double prufer_angle(const RadialPotential& w, double mu, double kappa_sq, const SolverOptions& opts = {});

/// Smallest lambda at which -Delta + lambda W acquires an s-wave bound state.
double critical_coupling(const RadialPotential& w, const SolverOptions& opts = {});

/// Ground state of -(1 - gamma_reg) Delta + lambda W. Requires lambda/(1 - gamma_reg) > lambda_0.
BoundStateSolution bound_state(const RadialPotential& w, double lambda, double gamma_reg,
                               const SolverOptions& opts = {});

struct GradientNorms {
    double total = 0.0;
    std::array<double, 3> per_axis{};
};

GradientNorms gradient_norms(const BoundStateSolution& sol,
                             const numerics::AngularScheme& scheme = numerics::AngularScheme::standard());

/// ||f||^2 by quadrature on the solution grid.
double norm_squared(const BoundStateSolution& sol);

/// <(-Delta + lambda W) f, f>.
double schrodinger_form(const BoundStateSolution& sol, const RadialPotential& w, double lambda);

/// <h_gamma f, f> with the solution's own gamma_reg and lambda.
double regularized_form(const BoundStateSolution& sol, const RadialPotential& w);

/// ||Delta f||^2 = 4 pi int (f'' + 2 f'/r)^2 r^2 dr.
double laplacian_norm_squared(const BoundStateSolution& sol);

/// 4 pi int W f'^2 r^2 dr = sum_i <W d_i f, d_i f>.
double potential_gradient_form(const BoundStateSolution& sol, const RadialPotential& w);

struct GradientExcessCheck {
    double lhs = 0.0;          ///< sum_i <(-Delta + lambda W) d_i f, d_i f>
    double rhs = 0.0;          ///< (C_W + slack) ||grad f||^2
    double gradient_norm = 0.0;
    double excess = 0.0;       ///< lhs/||grad f||^2 - C_W
    bool satisfied = false;
};

GradientExcessCheck gradient_excess_check(const BoundStateSolution& sol, const RadialPotential& w, double lambda, double c_w,
                            double slack);

}  // namespace ebind
