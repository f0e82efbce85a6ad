#pragma once

// Zero-momentum self-energy on the 0 (+) 1 photon truncation: the functional
// L_{a,b}, its minimizer phi_{a,b}, the truncated ground state and Sigma_0,
// the dressing vectors theta_i and eta^2.

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ebind/field.hpp"
#include "ebind/numerics.hpp"

namespace ebind {

/// Zero-photon spinor (a, b).
struct SpinorCoefficients {
    cplx a{1.0, 0.0};
    cplx b{0.0, 0.0};

    Spinor spinor() const { return {a, b}; }
    double norm_squared() const { return std::norm(a) + std::norm(b); }
    /// Throws InvalidInput unless |a|^2 + |b|^2 = 1 within tol.
    void validate(double tol = 1e-12) const;
};

/// Component index 2 s + (lambda - 1): [up l1, up l2, down l1, down l2].
using Amp4 = std::array<cplx, 4>;

inline constexpr std::size_t amp_index(int spin, int lambda) { return 2 * spin + (lambda - 1); }

struct PhotonGridOptions {
    std::size_t radial_order = 24;
    std::size_t radial_panels = 2;
    std::size_t n_theta = 10;
    std::size_t n_phi = 20;
};

/// Radial Gauss nodes on [0, Lambda] times an AngularScheme. Weights carry the
/// full d^3k measure.
class OnePhotonGrid {
public:
    struct Node {
        Vec3 k;
        double k_abs;
        double weight;
        Vec3 eps1;
        Vec3 eps2;
    };

    explicit OnePhotonGrid(CutoffProfile zeta, const PhotonGridOptions& opts = {});

    const CutoffProfile& cutoff() const { return zeta_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    const PhotonGridOptions& options() const { return opts_; }

private:
    CutoffProfile zeta_;
    PhotonGridOptions opts_;
    std::vector<Node> nodes_;
};

using GridPtr = std::shared_ptr<const OnePhotonGrid>;

GridPtr make_photon_grid(const CutoffProfile& zeta, const PhotonGridOptions& opts = {});

/// A vector of the one-photon sector C^2 (x) L^2(R^3) (x) C^2 sampled on a grid,
/// optionally remembering the closed form it was sampled from.
class OnePhotonAmplitude {
public:
    enum class Representation { closed_form, grid };
    using ClosedForm = std::function<Amp4(const Vec3&)>;

    OnePhotonAmplitude() = default;
    explicit OnePhotonAmplitude(GridPtr grid);

    static OnePhotonAmplitude from_closed_form(GridPtr grid, ClosedForm form);
    static OnePhotonAmplitude from_values(GridPtr grid, std::vector<Amp4> values);

    Representation representation() const { return closed_form_ ? Representation::closed_form : Representation::grid; }
    const GridPtr& grid() const { return grid_; }
    const std::vector<Amp4>& values() const { return values_; }
    std::vector<Amp4>& values() { return values_; }
    /// Closed-form value at an arbitrary k; throws for grid-only amplitudes.
    Amp4 evaluate(const Vec3& k) const;

    /// <this, other> (antilinear in the second slot).
    cplx inner(const OnePhotonAmplitude& other) const;
    /// <(k^2 + |k|) this, other>.
    cplx inner1(const OnePhotonAmplitude& other) const;
    double norm_squared() const { return inner(*this).real(); }
    double norm1_squared() const { return inner1(*this).real(); }

    OnePhotonAmplitude& operator+=(const OnePhotonAmplitude& other);
    OnePhotonAmplitude& operator-=(const OnePhotonAmplitude& other);
    OnePhotonAmplitude& operator*=(cplx s);
    friend OnePhotonAmplitude operator+(OnePhotonAmplitude x, const OnePhotonAmplitude& y) { return x += y; }
    friend OnePhotonAmplitude operator-(OnePhotonAmplitude x, const OnePhotonAmplitude& y) { return x -= y; }
    friend OnePhotonAmplitude operator*(cplx s, OnePhotonAmplitude x) { return x *= s; }

    /// Pointwise multiplication by a real function of k.
    OnePhotonAmplitude multiplied(const std::function<double(const OnePhotonGrid::Node&)>& m) const;

private:
    GridPtr grid_;
    std::vector<Amp4> values_;
    ClosedForm closed_form_;
};

/// Literal Gamma_{a,b}(k) display.
Amp4 gamma_vector(const CutoffProfile& zeta, const SpinorCoefficients& s, const Vec3& k);

/// phi_{a,b}(k) = sqrt(alpha) i / (2 pi |k| (1 + |k|)) Gamma_{a,b}(k).
Amp4 phi_ab(const CutoffProfile& zeta, const SpinorCoefficients& s, double alpha, const Vec3& k);

/// sigma . K*(0) applied to (a, b): the one-photon vector created from the spinor.
Amp4 sigma_k_star(const CutoffProfile& zeta, const SpinorCoefficients& s, const Vec3& k);

/// g_{a,b}(k) = (k^2 + |k|)^{-1} sigma . K* (a, b), built from K_kernel and sigma_dot.
Amp4 g_ab(const CutoffProfile& zeta, const SpinorCoefficients& s, const Vec3& k);

/// theta_i(k) = (k^2 + |k| + C_W)^{-1} D*(0)_i (a, b), axis i in {0, 1, 2}.
Amp4 theta_i(int axis, const CutoffProfile& zeta, const SpinorCoefficients& s, double c_w, const Vec3& k);

OnePhotonAmplitude phi_amplitude(const GridPtr& grid, const SpinorCoefficients& s, double alpha);
OnePhotonAmplitude g_amplitude(const GridPtr& grid, const SpinorCoefficients& s);
OnePhotonAmplitude theta_amplitude(const GridPtr& grid, int axis, const SpinorCoefficients& s, double c_w);

/// L_{a,b}(xi) = <(k^2 + |k|) xi, xi> + 2 sqrt(alpha) Re <xi, sigma . K* (a, b)>.
double L_functional(const OnePhotonAmplitude& xi, const SpinorCoefficients& s, double alpha);

struct Decomposition {
    double gamma_coeff = 0.0;
    OnePhotonAmplitude residual;
    double residual_norm1_sq = 0.0;
    double orthogonality = 0.0;  ///< |<phi, R>_1|
};

/// xi = gamma_coeff phi + R with <phi, R>_1 = 0.
Decomposition decompose(const OnePhotonAmplitude& xi, const OnePhotonAmplitude& phi);

struct DescentReport {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    double max_deviation = 0.0;  ///< max |xi_cg - xi_direct| / max |xi_direct|
};

struct MinimizerReport {
    OnePhotonAmplitude minimizer;  ///< direct formula -sqrt(alpha) g_{a,b}
    double inf_value = 0.0;
    double gamma_coeff = 0.0;
    OnePhotonAmplitude residual;
    double residual_norm1_sq = 0.0;
    DescentReport descent;
};

/// Minimizes L_{a,b} on the grid by the direct formula, cross-checked by conjugate gradients.
MinimizerReport minimize_L_numeric(const GridPtr& grid, const SpinorCoefficients& s, double alpha,
                                   double cg_tol = 1e-14, int cg_max_iterations = 2000);

/// F(E) = (2/pi) int_0^Lambda r^3 zeta^2 / (r^2 + r - E) dr, E < 0.
double self_energy_function(const CutoffProfile& zeta, double energy, const numerics::RadialQuadrature& quad = {});

struct Sigma0Result {
    double energy = 0.0;      ///< truncated Sigma_0
    double inf_L = 0.0;       ///< -alpha F(0)
    int iterations = 0;
    double residual = 0.0;
};

/// Ground energy of T(0) on the 0 (+) 1 photon sectors: fixed point of E = -alpha F(E).
/// With g = 0 the sectors decouple and the energy is 0.
Sigma0Result sigma0_truncated(double alpha, const CutoffProfile& zeta, int g = 1, double tol = 1e-15);

/// Exact ground state of the truncated T(0): (spinor, xi) with
/// xi = -sqrt(alpha) (k^2 + |k| - Sigma_0)^{-1} sigma . K* (a, b).
struct TruncatedDressedState {
    SpinorCoefficients spinor;
    OnePhotonAmplitude photon;
    double energy = 0.0;

    double norm_squared() const { return spinor.norm_squared() + photon.norm_squared(); }
};

TruncatedDressedState truncated_ground_state(const GridPtr& grid, const SpinorCoefficients& s, double alpha,
                                             double sigma0, int g = 1);

enum class EtaMode { squared, literal };

/// eta^2 = (2/3pi) int_0^Lambda r zeta^2/(r^2 + r + C_W) dr; the literal mode uses zeta instead of zeta^2.
double eta_squared(const CutoffProfile& zeta, double c_w, EtaMode mode = EtaMode::squared,
                   const numerics::RadialQuadrature& quad = {});

/// Radial closed forms of one-photon norms.
namespace radial {
/// ||theta_i||^2
double theta_norm_sq(const CutoffProfile& zeta, double c_w);
/// ||theta_i||_1^2
double theta_norm1_sq(const CutoffProfile& zeta, double c_w);
/// ||phi_{a,b}||_1^2 = alpha F(0)
double phi_norm1_sq(const CutoffProfile& zeta, double alpha);
/// ||xi_E||^2 for the truncated ground state at energy E
double dressed_norm_sq(const CutoffProfile& zeta, double alpha, double energy);
}  // namespace radial

struct OrthogonalityReport {
    std::array<cplx, 3> values{};
    std::array<double, 3> relative{};  ///< |value| / (||k_i phi|| ||theta_i||), 0 when both vanish
};

/// <k_i phi_{a,b}, theta_i> for each axis.
OrthogonalityReport orthogonality_kphi_theta(const GridPtr& grid, const SpinorCoefficients& s, double alpha,
                                             double c_w);

struct ScalingReport {
    std::vector<double> alphas;
    std::vector<double> photon_norm;        ///< ||Pi_1 Omega||
    std::vector<double> field_energy_norm;  ///< ||H_f^{1/2} Omega||
    std::vector<double> number_norm;        ///< ||N_f^{1/2} Omega||
    std::vector<double> excess_norm_sq;     ///< ||Omega||^2 - 1
    double photon_exponent = 0.0;
    double field_energy_exponent = 0.0;
    double number_exponent = 0.0;
    double excess_exponent = 0.0;
};

/// Log-log exponents of truncated ground-state norms against alpha.
ScalingReport scaling_check(const std::vector<double>& alphas, const GridPtr& grid,
                            const SpinorCoefficients& s = {});

}  // namespace ebind
