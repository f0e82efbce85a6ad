#pragma once

// Trial state Psi = f (x) Omega + i sqrt(alpha) sum_i d_i f (x) theta_i, the
// term-by-term quadratic form, a direct evaluator of <H Psi, Psi> on the
// 0 (+) 1 photon space, the binding certificate and the alpha sweep.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ebind/field.hpp"
#include "ebind/potential.hpp"
#include "ebind/schrodinger.hpp"
#include "ebind/selfenergy.hpp"

namespace ebind {

/// gamma_reg(alpha) = clamp(scale * alpha^power, floor, ceiling).
struct GammaPolicy {
    double scale = 1.0;
    double power = 2.0;
    double floor = 1e-10;
    double ceiling = 0.5;

    double operator()(double alpha) const;
    std::string describe() const;
};

struct TrialOptions {
    SpinorCoefficients spinor{};
    int g = 1;
    PhotonGridOptions photon{};
    SolverOptions solver{};
    std::size_t particle_n_theta = 6;
    std::size_t particle_n_phi = 12;
    numerics::RadialQuadrature quad{};
};

/// Everything that depends only on (W, zeta): lambda_0, C_W, eta^2 and the photon grid.
struct ModelContext {
    RadialPotential potential;
    CutoffProfile cutoff;
    double lambda0 = 0.0;
    CwReport cw;
    double eta2 = 0.0;
    double eta2_literal = 0.0;
    double c_no = 0.0;
    GridPtr grid;
};

ModelContext make_context(const RadialPotential& w, const CutoffProfile& zeta, const TrialOptions& opts = {});

using Table4 = std::array<std::array<double, 4>, 4>;
using CTable4 = std::array<std::array<cplx, 4>, 4>;

/// Particle side, basis (f, d_1 f, d_2 f, d_3 f).
struct ParticleTables {
    Table4 overlap{};                  ///< <phi_a, phi_b>
    Table4 kinetic{};                  ///< <grad phi_a, grad phi_b>
    Table4 potential{};                ///< <W phi_a, phi_b>
    std::array<Table4, 3> momentum{};  ///< int (d_m phi_a) phi_b; <p_m phi_a, phi_b> = -i times this
};

/// Field side, basis (Omega, i sqrt(alpha) theta_1..3), compressed to 0 (+) 1 photons.
struct FieldTables {
    CTable4 overlap{};             ///< <F_a, F_b>
    CTable4 self_energy{};         ///< <T(0) F_a, F_b>
    std::array<CTable4, 3> q{};    ///< <(P_f - sqrt(alpha) A(0))_m F_a, F_b>
    double c_grid = 0.0;           ///< [D, D*] on the photon grid
};

struct TrialState {
    ModelContext context;
    double alpha = 0.0;
    double gamma_reg = 0.0;
    double sigma0 = 0.0;
    int g = 1;

    BoundStateSolution particle;
    TruncatedDressedState dressed;
    std::array<OnePhotonAmplitude, 3> theta;

    // radial scalars of f
    double f_norm_sq = 0.0;
    double grad_sq = 0.0;
    double laplacian_sq = 0.0;
    double potential_f = 0.0;     ///< <W f, f>
    double potential_grad = 0.0;  ///< sum_i <W d_i f, d_i f>
    // one-photon scalars
    double omega_norm_sq = 0.0;
    double theta_norm_sq = 0.0;
    double theta_norm1_sq = 0.0;

    ParticleTables particle_tables;
    FieldTables field_tables;

    /// ||Psi||^2 = ||f||^2 ||Omega||^2 + alpha sum_i ||d_i f||^2 ||theta_i||^2
    double norm_sq() const;
};

/// Builds f_gamma at coupling lambda_0, the truncated dressed state and theta_1..3.
TrialState assemble_trial(const ModelContext& ctx, double alpha, double gamma_reg, const TrialOptions& opts = {});

struct FormBreakdown {
    double lambda = 0.0;
    double t_selfenergy = 0.0;
    double t_schrodinger = 0.0;
    double t_theta_schrodinger = 0.0;
    double t_cross = 0.0;
    double t_theta_field = 0.0;
    double total = 0.0;
    double norm_sq = 0.0;
    double margin = 0.0;
    double theta_field_to_cross = 0.0;  ///< T_theta_field / |T_cross|
};

struct DirectEvaluation {
    double lambda = 0.0;
    double particle_part = 0.0;  ///< sum (K + lambda V)_ab <F_a, F_b>
    double field_part = 0.0;     ///< sum S_ab <T F_a, F_b>
    double coupling_part = 0.0;  ///< -2 sum P^m_ab <Q_m F_a, F_b>
    double total = 0.0;
    double norm_sq = 0.0;
    double margin = 0.0;         ///< total - Sigma_0 norm_sq
    double imaginary_residue = 0.0;
};

/// Factorized five-term form.
FormBreakdown quadratic_form_breakdown(const TrialState& trial, double lambda);

/// <H Psi, Psi> assembled from the particle and field tables.
DirectEvaluation direct_form(const TrialState& trial, double lambda);

struct Certificate {
    double lambda = 0.0;
    double margin = 0.0;  ///< direct evaluator
    bool binds = false;   ///< margin < 0
    FormBreakdown breakdown;
    DirectEvaluation direct;
    double discrepancy = 0.0;  ///< direct.total - breakdown.total
};

Certificate binding_certificate(const TrialState& trial, double lambda);

struct SweepPoint {
    double alpha = 0.0;
    double gamma_reg = 0.0;
    double lambda_c = 0.0;          ///< bisection
    double lambda_c_affine = 0.0;   ///< exact root of the affine margin
    double predicted_bound = 0.0;   ///< lambda_0 (1 - alpha eta^2)
    double shift_ratio = 0.0;       ///< (lambda_0 - lambda_c) / (lambda_0 alpha)
    double margin_at_lambda0 = 0.0;
    int bisection_steps = 0;
    bool ok = true;
    std::string flag;
};

struct ThresholdReport {
    double lambda0 = 0.0;
    double c_w = 0.0;
    double eta2 = 0.0;
    double eta2_literal = 0.0;
    GammaPolicy policy;
    std::vector<SweepPoint> points;
    numerics::LinearFit shift_fit;   ///< shift_ratio against alpha; intercept estimates eta^2
    numerics::LinearFit lambda_fit;  ///< lambda_c against alpha; intercept extrapolates lambda_0
    double eta2_estimate = 0.0;
    double lambda0_extrapolated = 0.0;
    bool all_below_lambda0 = true;
    bool monotone = true;
    bool complete = true;
};

/// Smallest lambda with negative certificate margin, by bisection, for every alpha.
ThresholdReport alpha_sweep(const ModelContext& ctx, const std::vector<double>& alphas, const GammaPolicy& policy,
                            const TrialOptions& opts = {}, unsigned threads = 1);

}  // namespace ebind
