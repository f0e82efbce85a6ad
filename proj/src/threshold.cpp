#include "ebind/threshold.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "ebind/errors.hpp"

namespace ebind {

double GammaPolicy::operator()(double alpha) const {
    if (!(alpha >= 0.0)) throw InvalidInput("GammaPolicy: alpha must be >= 0");
    const double raw = alpha > 0.0 ? scale * std::pow(alpha, power) : 0.0;
    return std::clamp(raw, floor, ceiling);
}

std::string GammaPolicy::describe() const {
    std::ostringstream out;
    out << "clamp(" << scale << " * alpha^" << power << ", " << floor << ", " << ceiling << ")";
    return out.str();
}

ModelContext make_context(const RadialPotential& w, const CutoffProfile& zeta, const TrialOptions& opts) {
    const double lambda0 = critical_coupling(w, opts.solver);
    CwReport cw = c_w_constant(lambda0, w, opts.quad);
    ModelContext ctx{w, zeta};
    ctx.lambda0 = lambda0;
    ctx.cw = cw;
    ctx.eta2 = eta_squared(zeta, cw.c_w, EtaMode::squared, opts.quad);
    ctx.eta2_literal = eta_squared(zeta, cw.c_w, EtaMode::literal, opts.quad);
    ctx.c_no = normal_ordering_constant(zeta);
    ctx.grid = make_photon_grid(zeta, opts.photon);
    return ctx;
}

namespace {

/// Element of the 0 (+) 1 photon space.
struct FieldVector {
    Spinor c{};
    OnePhotonAmplitude xi;
};

cplx inner(const FieldVector& x, const FieldVector& y) {
    return x.c[0] * std::conj(y.c[0]) + x.c[1] * std::conj(y.c[1]) + x.xi.inner(y.xi);
}

/// Coupling function of A(0)_m: v_m(k, lambda) = zeta/(2 pi |k|^{1/2}) eps_lambda,m(k).
double coupling(const CutoffProfile& zeta, const OnePhotonGrid::Node& n, int lambda, int m) {
    const Vec3& e = lambda == 1 ? n.eps1 : n.eps2;
    return kernel_prefactor(zeta, n.k_abs) * e[m];
}

/// D_m xi, a spinor.
Spinor annihilate(const OnePhotonAmplitude& xi, int m) {
    const auto& grid = *xi.grid();
    Spinor out{};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& n = grid.nodes()[i];
        for (int lambda = 1; lambda <= 2; ++lambda) {
            const double v = n.weight * coupling(grid.cutoff(), n, lambda, m);
            out[0] += v * xi.values()[i][amp_index(0, lambda)];
            out[1] += v * xi.values()[i][amp_index(1, lambda)];
        }
    }
    return out;
}

/// D*_m c, a one-photon amplitude.
OnePhotonAmplitude create(const GridPtr& grid, const Spinor& c, int m) {
    OnePhotonAmplitude out(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const auto& n = grid->nodes()[i];
        for (int lambda = 1; lambda <= 2; ++lambda) {
            const double v = coupling(grid->cutoff(), n, lambda, m);
            out.values()[i][amp_index(0, lambda)] = v * c[0];
            out.values()[i][amp_index(1, lambda)] = v * c[1];
        }
    }
    return out;
}

/// sigma . K(0) xi, a spinor.
Spinor sigma_k_annihilate(const OnePhotonAmplitude& xi) {
    const auto& grid = *xi.grid();
    Spinor out{};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& n = grid.nodes()[i];
        for (int lambda = 1; lambda <= 2; ++lambda) {
            const CVec3 kk = k_kernel(grid.cutoff(), n.k, lambda);
            const Spinor s{xi.values()[i][amp_index(0, lambda)], xi.values()[i][amp_index(1, lambda)]};
            const Spinor v = sigma_dot(kk, s);
            out[0] += n.weight * v[0];
            out[1] += n.weight * v[1];
        }
    }
    return out;
}

/// sigma . K*(0) c, a one-photon amplitude.
OnePhotonAmplitude sigma_k_create(const GridPtr& grid, const Spinor& c) {
    return OnePhotonAmplitude::from_values(grid, [&] {
        std::vector<Amp4> v(grid->size());
        const SpinorCoefficients s{c[0], c[1]};
        for (std::size_t i = 0; i < grid->size(); ++i) v[i] = sigma_k_star(grid->cutoff(), s, grid->nodes()[i].k);
        return v;
    }());
}

struct FieldOperators {
    GridPtr grid;
    double alpha;
    int g;
    double c_grid;
    double c_no;

    /// T(0) compressed to 0 (+) 1 photons (P = 0, normal ordered).
    FieldVector apply_t(const FieldVector& x) const {
        const double sa = std::sqrt(alpha);
        const double shift = alpha * (c_grid - c_no);
        FieldVector out{{}, OnePhotonAmplitude(grid)};
        // zero-photon sector
        out.c[0] = shift * x.c[0];
        out.c[1] = shift * x.c[1];
        if (g != 0) {
            const Spinor b = sigma_k_annihilate(x.xi);
            out.c[0] += sa * b[0];
            out.c[1] += sa * b[1];
        }
        for (int m = 0; m < 3; ++m) {
            const auto kxi = x.xi.multiplied([m](const OnePhotonGrid::Node& n) { return n.k[m]; });
            const Spinor d = annihilate(kxi, m);
            out.c[0] -= sa * d[0];
            out.c[1] -= sa * d[1];
        }
        // one-photon sector
        out.xi = x.xi.multiplied([shift](const OnePhotonGrid::Node& n) { return n.k_abs * n.k_abs + n.k_abs + shift; });
        if (g != 0) out.xi += cplx{sa} * sigma_k_create(grid, x.c);
        for (int m = 0; m < 3; ++m) {
            const auto created = create(grid, x.c, m);
            out.xi -= cplx{sa} * created.multiplied([m](const OnePhotonGrid::Node& n) { return n.k[m]; });
            out.xi += cplx{2.0 * alpha} * create(grid, annihilate(x.xi, m), m);
        }
        return out;
    }

    /// (P_f - sqrt(alpha) A(0))_m compressed to 0 (+) 1 photons.
    FieldVector apply_q(const FieldVector& x, int m) const {
        const double sa = std::sqrt(alpha);
        FieldVector out{{}, OnePhotonAmplitude(grid)};
        const Spinor d = annihilate(x.xi, m);
        out.c[0] = -sa * d[0];
        out.c[1] = -sa * d[1];
        out.xi = x.xi.multiplied([m](const OnePhotonGrid::Node& n) { return n.k[m]; });
        out.xi -= cplx{sa} * create(grid, x.c, m);
        return out;
    }
};

FieldTables build_field_tables(const TrialState& t) {
    const GridPtr& grid = t.context.grid;
    FieldTables tab;
    for (const auto& n : grid->nodes()) {
        for (int lambda = 1; lambda <= 2; ++lambda) {
            for (int m = 0; m < 3; ++m) {
                const double v = coupling(grid->cutoff(), n, lambda, m);
                tab.c_grid += n.weight * v * v;
            }
        }
    }
    const FieldOperators ops{grid, t.alpha, t.g, tab.c_grid, t.context.c_no};

    std::array<FieldVector, 4> basis;
    basis[0] = {t.dressed.spinor.spinor(), t.dressed.photon};
    const cplx pre = cplx{0.0, 1.0} * std::sqrt(t.alpha);
    for (int i = 0; i < 3; ++i) basis[i + 1] = {{}, pre * t.theta[i]};

    std::array<FieldVector, 4> t_basis;
    std::array<std::array<FieldVector, 4>, 3> q_basis;
    for (int a = 0; a < 4; ++a) {
        t_basis[a] = ops.apply_t(basis[a]);
        for (int m = 0; m < 3; ++m) q_basis[m][a] = ops.apply_q(basis[a], m);
    }
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            tab.overlap[a][b] = inner(basis[a], basis[b]);
            tab.self_energy[a][b] = inner(t_basis[a], basis[b]);
            for (int m = 0; m < 3; ++m) tab.q[m][a][b] = inner(q_basis[m][a], basis[b]);
        }
    }
    return tab;
}

ParticleTables build_particle_tables(const BoundStateSolution& sol, const RadialPotential& w,
                                     const numerics::AngularScheme& scheme) {
    ParticleTables tab;
    constexpr double four_pi = 4.0 * std::numbers::pi;
    for (std::size_t i = 0; i < sol.grid.r.size(); ++i) {
        const double r = sol.grid.r[i];
        const double f = sol.f[i];
        const double d1 = sol.df[i];
        const double d2 = sol.d2f[i];
        const double wr = four_pi * sol.grid.w[i] * r * r;
        const double wv = w(r);
        for (std::size_t j = 0; j < scheme.size(); ++j) {
            const Vec3& n = scheme.nodes()[j];
            const double wt = wr * scheme.weights()[j];
            std::array<double, 4> val{f, d1 * n[0], d1 * n[1], d1 * n[2]};
            // grad[a][m] = d_m phi_a; the Hessian of a radial f is f'' n n^T + (f'/r)(I - n n^T)
            std::array<std::array<double, 3>, 4> grad{};
            for (int m = 0; m < 3; ++m) {
                grad[0][m] = d1 * n[m];
                for (int a = 0; a < 3; ++a) {
                    const double nn = n[m] * n[a];
                    grad[a + 1][m] = d2 * nn + d1 / r * ((m == a ? 1.0 : 0.0) - nn);
                }
            }
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    const double vv = wt * val[a] * val[b];
                    tab.overlap[a][b] += vv;
                    tab.potential[a][b] += wv * vv;
                    double kin = 0.0;
                    for (int m = 0; m < 3; ++m) {
                        kin += grad[a][m] * grad[b][m];
                        tab.momentum[m][a][b] += wt * grad[a][m] * val[b];
                    }
                    tab.kinetic[a][b] += wt * kin;
                }
            }
        }
    }
    return tab;
}

void check_trial(const TrialState& t) {
    if (!(t.alpha >= 0.0)) throw InvalidInput("trial state: alpha must be >= 0");
    if (!(t.gamma_reg > 0.0 && t.gamma_reg < 1.0)) throw InvalidInput("trial state: gamma_reg must lie in (0, 1)");
    if (t.particle.f.empty() || !t.context.grid) throw InvalidInput("trial state: not assembled");
    for (const auto& th : t.theta)
        if (th.grid() != t.context.grid) throw InvalidInput("trial state: theta lives on a foreign grid");
    if (t.dressed.photon.grid() != t.context.grid) throw InvalidInput("trial state: dressed state lives on a foreign grid");
}

}  // namespace

double TrialState::norm_sq() const { return f_norm_sq * omega_norm_sq + alpha * grad_sq * theta_norm_sq; }

TrialState assemble_trial(const ModelContext& ctx, double alpha, double gamma_reg, const TrialOptions& opts) {
    ModelParams{alpha, opts.g}.validate();
    if (!(gamma_reg > 0.0 && gamma_reg < 1.0)) throw InvalidInput("assemble_trial: gamma_reg must lie in (0, 1)");
    opts.spinor.validate();

    TrialState t{ctx};
    t.alpha = alpha;
    t.gamma_reg = gamma_reg;
    t.g = opts.g;
    t.sigma0 = sigma0_truncated(alpha, ctx.cutoff, opts.g).energy;
    t.particle = bound_state(ctx.potential, ctx.lambda0, gamma_reg, opts.solver);
    t.dressed = truncated_ground_state(ctx.grid, opts.spinor, alpha, t.sigma0, opts.g);
    for (int i = 0; i < 3; ++i) t.theta[i] = theta_amplitude(ctx.grid, i, opts.spinor, ctx.cw.c_w);

    t.f_norm_sq = norm_squared(t.particle);
    t.grad_sq = gradient_norms(t.particle).total;
    t.laplacian_sq = laplacian_norm_squared(t.particle);
    t.potential_f = schrodinger_form(t.particle, ctx.potential, 1.0) - t.grad_sq;
    t.potential_grad = potential_gradient_form(t.particle, ctx.potential);

    const double dressed = (alpha == 0.0 || opts.g == 0) ? 0.0 : radial::dressed_norm_sq(ctx.cutoff, alpha, t.sigma0);
    t.omega_norm_sq = opts.spinor.norm_squared() + dressed;
    t.theta_norm_sq = radial::theta_norm_sq(ctx.cutoff, ctx.cw.c_w);
    t.theta_norm1_sq = radial::theta_norm1_sq(ctx.cutoff, ctx.cw.c_w);

    t.particle_tables = build_particle_tables(t.particle, ctx.potential,
                                              numerics::AngularScheme(opts.particle_n_theta, opts.particle_n_phi));
    t.field_tables = build_field_tables(t);
    return t;
}

FormBreakdown quadratic_form_breakdown(const TrialState& t, double lambda) {
    check_trial(t);
    FormBreakdown b;
    b.lambda = lambda;
    const double psi1 = t.f_norm_sq * t.omega_norm_sq;
    b.t_selfenergy = t.sigma0 * psi1;
    b.t_schrodinger = t.omega_norm_sq * (t.grad_sq + lambda * t.potential_f);
    // sum_l ||theta_l||^2 <(-Delta + lambda W) d_l f, d_l f>, with ||theta_l|| independent of l
    b.t_theta_schrodinger = t.alpha * t.theta_norm_sq * (t.laplacian_sq + lambda * t.potential_grad);
    b.t_cross = -2.0 * t.alpha * t.grad_sq * t.context.eta2;
    b.t_theta_field = t.alpha * t.grad_sq * t.theta_norm1_sq;
    b.total = b.t_selfenergy + b.t_schrodinger + b.t_theta_schrodinger + b.t_cross + b.t_theta_field;
    b.norm_sq = t.norm_sq();
    b.margin = b.total - t.sigma0 * b.norm_sq;
    b.theta_field_to_cross = b.t_cross != 0.0 ? b.t_theta_field / std::abs(b.t_cross) : 0.0;
    return b;
}

DirectEvaluation direct_form(const TrialState& t, double lambda) {
    check_trial(t);
    DirectEvaluation d;
    d.lambda = lambda;
    const auto& pt = t.particle_tables;
    const auto& ft = t.field_tables;
    cplx particle{}, field{}, coupling_sum{}, norm{};
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            particle += (pt.kinetic[a][b] + lambda * pt.potential[a][b]) * ft.overlap[a][b];
            field += pt.overlap[a][b] * ft.self_energy[a][b];
            norm += pt.overlap[a][b] * ft.overlap[a][b];
            for (int m = 0; m < 3; ++m) coupling_sum += cplx{0.0, -pt.momentum[m][a][b]} * ft.q[m][a][b];
        }
    }
    coupling_sum *= -2.0;
    const cplx total = particle + field + coupling_sum;
    d.particle_part = particle.real();
    d.field_part = field.real();
    d.coupling_part = coupling_sum.real();
    d.total = total.real();
    d.norm_sq = norm.real();
    d.margin = d.total - t.sigma0 * d.norm_sq;
    d.imaginary_residue = std::abs(total.imag());
    return d;
}

Certificate binding_certificate(const TrialState& trial, double lambda) {
    Certificate c;
    c.lambda = lambda;
    c.breakdown = quadratic_form_breakdown(trial, lambda);
    c.direct = direct_form(trial, lambda);
    c.margin = c.direct.margin;
    c.binds = c.margin < 0.0;
    c.discrepancy = c.direct.total - c.breakdown.total;
    return c;
}

namespace {

SweepPoint sweep_point(const ModelContext& ctx, double alpha, const GammaPolicy& policy, const TrialOptions& opts) {
    SweepPoint p;
    p.alpha = alpha;
    p.gamma_reg = policy(alpha);
    p.predicted_bound = ctx.lambda0 * (1.0 - alpha * ctx.eta2);
    const TrialState trial = assemble_trial(ctx, alpha, p.gamma_reg, opts);
    auto margin = [&](double lambda) { return direct_form(trial, lambda).margin; };

    const double l0 = ctx.lambda0;
    p.margin_at_lambda0 = margin(l0);
    const double m1 = margin(l0 + 1.0);
    p.lambda_c_affine = l0 - p.margin_at_lambda0 / (m1 - p.margin_at_lambda0);

    double hi = l0;
    double lo = 0.5 * l0;
    int expansions = 0;
    while (margin(hi) >= 0.0) {
        lo = hi;
        hi *= 1.01;
        if (++expansions > 100) {
            p.ok = false;
            p.flag = "no negative margin found above lambda_0";
            return p;
        }
    }
    while (margin(lo) < 0.0) {
        hi = lo;
        lo *= 0.5;
        if (++expansions > 100) {
            p.ok = false;
            p.flag = "margin negative down to lambda ~ 0";
            return p;
        }
    }
    int steps = 0;
    while ((hi - lo) > 1e-14 * hi && steps < 200) {
        const double mid = 0.5 * (lo + hi);
        if (margin(mid) < 0.0) hi = mid;
        else lo = mid;
        ++steps;
    }
    p.lambda_c = hi;
    p.bisection_steps = steps;
    p.shift_ratio = (l0 - p.lambda_c) / (l0 * alpha);
    return p;
}

}  // namespace

ThresholdReport alpha_sweep(const ModelContext& ctx, const std::vector<double>& alphas, const GammaPolicy& policy,
                            const TrialOptions& opts, unsigned threads) {
    if (alphas.empty()) throw InvalidInput("alpha_sweep: empty alpha list");
    for (double a : alphas)
        if (!(a > 0.0)) throw InvalidInput("alpha_sweep: alpha values must be positive");

    ThresholdReport rep;
    rep.lambda0 = ctx.lambda0;
    rep.c_w = ctx.cw.c_w;
    rep.eta2 = ctx.eta2;
    rep.eta2_literal = ctx.eta2_literal;
    rep.policy = policy;
    rep.points.resize(alphas.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < alphas.size(); i = next++) {
            try {
                rep.points[i] = sweep_point(ctx, alphas[i], policy, opts);
            } catch (const Error& e) {
                SweepPoint p;
                p.alpha = alphas[i];
                p.gamma_reg = policy(alphas[i]);
                p.predicted_bound = ctx.lambda0 * (1.0 - alphas[i] * ctx.eta2);
                p.ok = false;
                p.flag = e.what();
                rep.points[i] = p;
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(alphas.size())));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<double> xs, shifts, lcs;
    for (const auto& p : rep.points) {
        if (!p.ok) {
            rep.complete = false;
            continue;
        }
        xs.push_back(p.alpha);
        shifts.push_back(p.shift_ratio);
        lcs.push_back(p.lambda_c);
        if (!(p.lambda_c < ctx.lambda0)) rep.all_below_lambda0 = false;
    }
    // monotone nonincreasing in alpha
    std::vector<std::size_t> order(rep.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return rep.points[a].alpha < rep.points[b].alpha; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        const auto& prev = rep.points[order[i - 1]];
        const auto& cur = rep.points[order[i]];
        if (prev.ok && cur.ok && cur.lambda_c > prev.lambda_c) rep.monotone = false;
    }
    if (xs.size() >= 2) {
        rep.shift_fit = numerics::linear_fit(xs, shifts);
        rep.lambda_fit = numerics::linear_fit(xs, lcs);
        rep.eta2_estimate = rep.shift_fit.intercept;
        rep.lambda0_extrapolated = rep.lambda_fit.intercept;
    }
    return rep;
}

}  // namespace ebind
