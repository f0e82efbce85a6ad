#pragma once

// Radial potentials W(r), the d_v functionals and the constant C_W.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ebind/numerics.hpp"

namespace ebind {

/// Decay hypothesis |W(r)| <= c (1 + r)^(-2 - delta) for r > a.
struct DecayParams {
    double a = 1.0;
    double c = 1.0;
    double delta = 1.0;
};

/// Spherically symmetric potential. The profile is taken to vanish beyond
/// `support()`; for non-compact families that is the evaluation cap R_max.
class RadialPotential {
public:
    using Profile = std::function<double(double)>;

    RadialPotential(Profile profile, double support, std::vector<double> breakpoints = {},
                    std::string name = "custom", DecayParams decay = {});

    /// W = -depth on r < radius.
    static RadialPotential indicator_well(double depth, double radius);
    /// W = -depth (1 - (r/radius)^2)^2 on r < radius; C^1, compact.
    static RadialPotential smooth_well(double depth, double radius);
    /// W = -depth exp(-r/range), cut at r_max.
    static RadialPotential exponential_well(double depth, double range, double r_max);
    /// Piecewise-linear interpolation of (radius, value) rows; zero beyond the last radius.
    static RadialPotential tabulated(std::vector<double> radii, std::vector<double> values);
    static RadialPotential from_file(const std::filesystem::path& path);

    double operator()(double r) const;

    double support() const { return support_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::string& name() const { return name_; }
    const DecayParams& decay() const { return decay_; }
    void set_decay(const DecayParams& decay) { decay_ = decay; }

    /// True when W < 0 somewhere on a fine sample of (0, support).
    bool has_negative_part() const;

    RadialPotential scaled(double factor) const;
    RadialPotential squared() const;
    RadialPotential absolute() const;

private:
    Profile profile_;
    double support_;
    std::vector<double> breakpoints_;
    std::string name_;
    DecayParams decay_;
};

/// W_+ = (|W| + W)/2.
RadialPotential positive_part(const RadialPotential& w);

struct DFunctionalReport {
    double double_integral = 0.0;       ///< (1/2pi) (int int |v(x)||v(y)|/|x-y|^2)^{1/2}
    std::optional<double> radial;       ///< int_0^inf t |v(t)| dt
    double value = 0.0;                 ///< min of the available branches
};

DFunctionalReport d_functional(const RadialPotential& v, const numerics::RadialQuadrature& quad = {});

struct MonteCarloEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

/// Double-integral branch for a general (non-radial) |v| supported in the
/// ball of radius `radius`, by plain Monte Carlo over pairs of points.
MonteCarloEstimate d_functional_monte_carlo(const std::function<double(const Vec3&)>& v, double radius,
                                            std::uint64_t samples, std::uint64_t seed);

struct CwReport {
    double lambda0 = 0.0;
    DFunctionalReport d_w_plus;
    DFunctionalReport d_w_squared;
    double c_w = 0.0;
};

/// C_W = lambda0^2 (1 + lambda0 d_{W+}) d_{W^2}.
CwReport c_w_constant(double lambda0, const RadialPotential& w, const numerics::RadialQuadrature& quad = {});

struct DecayCheckResult {
    bool passed = true;
    double worst_ratio = 0.0;   ///< max |W(r)| / (c (1+r)^(-2-delta))
    double worst_radius = 0.0;
};

/// Checks the decay bound on a logarithmic grid over (a, r_max].
DecayCheckResult decay_check(const RadialPotential& w, std::size_t samples = 400,
                             std::optional<double> r_max = std::nullopt);

}  // namespace ebind
