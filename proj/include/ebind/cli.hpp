#pragma once

// Batch front door: INI-style run configuration, command dispatch and
// JSON/CSV report emission.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ebind/errors.hpp"
#include "ebind/potential.hpp"
#include "ebind/threshold.hpp"

namespace ebind::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int check_failed = 1;
inline constexpr int parse_error = 2;
inline constexpr int numeric_failure = 3;
}  // namespace exit_code

/// Malformed or inconsistent configuration.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

struct PotentialConfig {
    std::string family = "indicator-well";  ///< indicator-well | smooth-well | exponential-well | file
    double depth = 1.0;
    double radius = 1.0;
    double range = 1.0;     ///< exponential-well only
    double r_max = 30.0;    ///< exponential-well only
    std::filesystem::path file;
    std::optional<DecayParams> decay;
};

struct CutoffConfig {
    std::string variant = "sharp";  ///< sharp | smooth-bump
    double support = 1.0;
    double width = 0.25;
    double amplitude = 1.0;
};

struct RunConfig {
    PotentialConfig potential;
    CutoffConfig cutoff;

    std::vector<double> alphas{1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2};
    std::optional<double> gamma_reg;  ///< fixed value; otherwise the policy
    GammaPolicy policy;
    std::vector<double> lambda_probes{1.0};  ///< multiples of lambda_0 for `certify`

    double tolerance = 1e-10;
    unsigned threads = 1;
    std::uint64_t seed = 20240601;
    std::uint64_t mc_samples = 200000;
    int g = 1;
    SpinorCoefficients spinor;
    PhotonGridOptions photon;
    SolverOptions solver;

    /// Throws ConfigError on any violated invariant (including a missing profile file).
    void validate() const;

    RadialPotential make_potential() const;
    CutoffProfile make_cutoff() const;
    TrialOptions trial_options() const;
    double gamma_for(double alpha) const;
};

/// Parses the sectioned key = value format; unknown sections or keys are errors.
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig parse_config_file(const std::filesystem::path& path);

struct Overrides {
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
};

void apply_overrides(RunConfig& config, const Overrides& overrides);

/// Fully resolved configuration as a JSON document string.
std::string config_json(const RunConfig& config);

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"lambda0", "eta2", "sigma0", "certify", "sweep", "selftest"};
    return names;
}

/// Runs one command, writing reports under out_dir only when it completes.
/// Returns one of the exit_code values; diagnostics go to `log`.
int run_command(const std::string& name, const RunConfig& config, const std::filesystem::path& out_dir,
                std::ostream& log);

/// Sweep table with columns alpha, lambda_c, predicted_bound.
std::string sweep_csv(const ThresholdReport& report);

/// 2/(3 pi) int_0^Lambda r/(r^2 + r + c) dr in closed form.
double eta_squared_sharp_closed_form(double cutoff, double c);

}  // namespace ebind::cli
