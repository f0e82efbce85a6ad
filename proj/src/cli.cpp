#include "ebind/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"

#include "ebind/errors.hpp"
#include "ebind/field.hpp"
#include "ebind/schrodinger.hpp"
#include "ebind/selfenergy.hpp"

namespace ebind::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError("config: '" + key + "' expects a finite number, got '" + raw + "'");
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + raw + "'");
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
    std::string s = raw;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<double> out;
    for (std::string tok; in >> tok;) out.push_back(parse_double(key, tok));
    if (out.empty()) throw ConfigError("config: '" + key + "' expects a non-empty list");
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

std::map<std::string, std::map<std::string, Setter>> make_schema() {
    std::map<std::string, std::map<std::string, Setter>> table;

    auto num = [](double PotentialConfig::*field, const char* key) {
        return Setter([=](RunConfig& c, const std::string& v) { c.potential.*field = parse_double(key, v); });
    };
    auto decay = [](double DecayParams::*field, const char* key) {
        return Setter([=](RunConfig& c, const std::string& v) {
            if (!c.potential.decay) c.potential.decay = DecayParams{};
            (*c.potential.decay).*field = parse_double(key, v);
        });
    };
    table["potential"] = {
        {"family", [](RunConfig& c, const std::string& v) { c.potential.family = trim(v); }},
        {"depth", num(&PotentialConfig::depth, "depth")},
        {"radius", num(&PotentialConfig::radius, "radius")},
        {"range", num(&PotentialConfig::range, "range")},
        {"r_max", num(&PotentialConfig::r_max, "r_max")},
        {"file", [](RunConfig& c, const std::string& v) { c.potential.file = trim(v); }},
        {"decay_a", decay(&DecayParams::a, "decay_a")},
        {"decay_c", decay(&DecayParams::c, "decay_c")},
        {"decay_delta", decay(&DecayParams::delta, "decay_delta")},
    };

    auto cut = [](double CutoffConfig::*field, const char* key) {
        return Setter([=](RunConfig& c, const std::string& v) { c.cutoff.*field = parse_double(key, v); });
    };
    table["cutoff"] = {
        {"variant", [](RunConfig& c, const std::string& v) { c.cutoff.variant = trim(v); }},
        {"support", cut(&CutoffConfig::support, "support")},
        {"width", cut(&CutoffConfig::width, "width")},
        {"amplitude", cut(&CutoffConfig::amplitude, "amplitude")},
    };

    auto size = [](auto setter, const char* key) {
        return Setter([=](RunConfig& c, const std::string& v) { setter(c, parse_unsigned(key, v)); });
    };
    table["run"] = {
        {"alpha", [](RunConfig& c, const std::string& v) { c.alphas = {parse_double("alpha", v)}; }},
        {"alphas", [](RunConfig& c, const std::string& v) { c.alphas = parse_list("alphas", v); }},
        {"gamma_reg", [](RunConfig& c, const std::string& v) { c.gamma_reg = parse_double("gamma_reg", v); }},
        {"gamma_scale", [](RunConfig& c, const std::string& v) { c.policy.scale = parse_double("gamma_scale", v); }},
        {"gamma_power", [](RunConfig& c, const std::string& v) { c.policy.power = parse_double("gamma_power", v); }},
        {"gamma_floor", [](RunConfig& c, const std::string& v) { c.policy.floor = parse_double("gamma_floor", v); }},
        {"gamma_ceiling",
         [](RunConfig& c, const std::string& v) { c.policy.ceiling = parse_double("gamma_ceiling", v); }},
        {"lambda_probes",
         [](RunConfig& c, const std::string& v) { c.lambda_probes = parse_list("lambda_probes", v); }},
        {"tolerance", [](RunConfig& c, const std::string& v) { c.tolerance = parse_double("tolerance", v); }},
        {"threads", size([](RunConfig& c, std::uint64_t n) { c.threads = static_cast<unsigned>(n); }, "threads")},
        {"seed", size([](RunConfig& c, std::uint64_t n) { c.seed = n; }, "seed")},
        {"mc_samples", size([](RunConfig& c, std::uint64_t n) { c.mc_samples = n; }, "mc_samples")},
        {"g", size([](RunConfig& c, std::uint64_t n) { c.g = static_cast<int>(std::min<std::uint64_t>(n, 2)); }, "g")},
        {"spinor", [](RunConfig& c, const std::string& v) {
             const auto xs = parse_list("spinor", v);
             if (xs.size() != 4) throw ConfigError("config: 'spinor' expects four numbers: Re a, Im a, Re b, Im b");
             c.spinor.a = {xs[0], xs[1]};
             c.spinor.b = {xs[2], xs[3]};
         }},
        {"photon_radial_order",
         size([](RunConfig& c, std::uint64_t n) { c.photon.radial_order = n; }, "photon_radial_order")},
        {"photon_radial_panels",
         size([](RunConfig& c, std::uint64_t n) { c.photon.radial_panels = n; }, "photon_radial_panels")},
        {"photon_n_theta", size([](RunConfig& c, std::uint64_t n) { c.photon.n_theta = n; }, "photon_n_theta")},
        {"photon_n_phi", size([](RunConfig& c, std::uint64_t n) { c.photon.n_phi = n; }, "photon_n_phi")},
        {"ode_tolerance",
         [](RunConfig& c, const std::string& v) { c.solver.ode_tolerance = parse_double("ode_tolerance", v); }},
        {"ode_max_step",
         [](RunConfig& c, const std::string& v) { c.solver.max_step = parse_double("ode_max_step", v); }},
    };
    return table;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError("config: " + message);
}

json decay_json(const DecayParams& d) { return {{"a", d.a}, {"c", d.c}, {"delta", d.delta}}; }

json d_report_json(const DFunctionalReport& d) {
    json j{{"double_integral", d.double_integral}};
    j["radial"] = d.radial ? json(*d.radial) : json(nullptr);
    j["value"] = d.value;
    return j;
}

json config_to_json(const RunConfig& c) {
    json pot{{"family", c.potential.family}};
    const auto& f = c.potential.family;
    if (f == "file") {
        pot["file"] = c.potential.file.generic_string();
    } else {
        pot["depth"] = c.potential.depth;
        if (f == "exponential-well") {
            pot["range"] = c.potential.range;
            pot["r_max"] = c.potential.r_max;
        } else {
            pot["radius"] = c.potential.radius;
        }
    }
    pot["decay"] = decay_json(c.make_potential().decay());

    json cut{{"variant", c.cutoff.variant}, {"support", c.cutoff.support}};
    if (c.cutoff.variant == "smooth-bump") cut["width"] = c.cutoff.width;
    cut["amplitude"] = c.cutoff.amplitude;

    json run;
    run["alphas"] = c.alphas;
    if (c.gamma_reg) {
        run["gamma_reg"] = *c.gamma_reg;
    } else {
        run["gamma_policy"] = {{"scale", c.policy.scale},
                               {"power", c.policy.power},
                               {"floor", c.policy.floor},
                               {"ceiling", c.policy.ceiling},
                               {"formula", c.policy.describe()}};
    }
    run["lambda_probes"] = c.lambda_probes;
    run["tolerance"] = c.tolerance;
    run["threads"] = c.threads;
    run["seed"] = c.seed;
    run["mc_samples"] = c.mc_samples;
    run["g"] = c.g;
    run["spinor"] = {c.spinor.a.real(), c.spinor.a.imag(), c.spinor.b.real(), c.spinor.b.imag()};
    run["photon_grid"] = {{"radial_order", c.photon.radial_order},
                          {"radial_panels", c.photon.radial_panels},
                          {"n_theta", c.photon.n_theta},
                          {"n_phi", c.photon.n_phi}};
    run["solver"] = {{"ode_tolerance", c.solver.ode_tolerance}, {"max_step", c.solver.max_step}};
    return {{"potential", pot}, {"cutoff", cut}, {"run", run}};
}

// ---------------------------------------------------------------------------
// commands

struct Output {
    std::string name;
    std::string content;
};

json header(const std::string& command, const RunConfig& config) {
    return {{"command", command}, {"config", config_to_json(config)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_lambda0(const RunConfig& config, std::vector<Output>& out, std::ostream& log) {
    const RadialPotential w = config.make_potential();
    const double lambda0 = critical_coupling(w, config.solver);
    json rep = header("lambda0", config);
    json res{{"lambda0", lambda0}};
    if (config.potential.family == "indicator-well") {
        const double ref = std::numbers::pi * std::numbers::pi /
                           (4.0 * config.potential.depth * config.potential.radius * config.potential.radius);
        res["closed_form"] = ref;
        res["relative_error"] = std::abs(lambda0 - ref) / ref;
    }
    const auto decay = decay_check(w);
    res["decay_check"] = {{"passed", decay.passed}, {"worst_ratio", decay.worst_ratio},
                          {"worst_radius", decay.worst_radius}};
    rep["results"] = res;
    out.push_back({"lambda0.json", dump(rep)});
    log << "lambda0 = " << std::setprecision(12) << lambda0 << "\n";
    return exit_code::ok;
}

int cmd_eta2(const RunConfig& config, std::vector<Output>& out, std::ostream& log) {
    const RadialPotential w = config.make_potential();
    const CutoffProfile zeta = config.make_cutoff();
    numerics::RadialQuadrature quad;
    quad.tolerance = config.tolerance;
    const double lambda0 = critical_coupling(w, config.solver);
    const CwReport cw = c_w_constant(lambda0, w, quad);

    json res{{"lambda0", lambda0},
             {"d_w_plus", d_report_json(cw.d_w_plus)},
             {"d_w_squared", d_report_json(cw.d_w_squared)},
             {"c_w", cw.c_w}};
    const double eta2 = eta_squared(zeta, cw.c_w, EtaMode::squared, quad);
    const double eta2_0 = eta_squared(zeta, 0.0, EtaMode::squared, quad);
    res["eta2"] = eta2;
    res["eta2_cw_zero"] = eta2_0;
    res["eta2_literal"] = eta_squared(zeta, cw.c_w, EtaMode::literal, quad);
    if (zeta.kind() == CutoffProfile::Kind::sharp) {
        const double a2 = zeta.amplitude() * zeta.amplitude();
        res["closed_form"] = {{"eta2", a2 * eta_squared_sharp_closed_form(zeta.support(), cw.c_w)},
                              {"eta2_cw_zero", a2 * eta_squared_sharp_closed_form(zeta.support(), 0.0)}};
    }

    // seeded cross-check of the double-integral branch on |W|
    const RadialPotential wa = w.absolute();
    const auto mc = d_functional_monte_carlo([&](const Vec3& x) { return wa(norm(x)); }, wa.support(),
                                             config.mc_samples, config.seed);
    res["d_abs_w"] = {{"quadrature", d_functional(wa, quad).double_integral},
                      {"monte_carlo", mc.value},
                      {"monte_carlo_standard_error", mc.standard_error}};

    json rep = header("eta2", config);
    rep["results"] = res;
    out.push_back({"eta2.json", dump(rep)});
    log << "C_W = " << std::setprecision(12) << cw.c_w << ", eta^2 = " << eta2 << "\n";
    return exit_code::ok;
}

int cmd_sigma0(const RunConfig& config, std::vector<Output>& out, std::ostream& log) {
    const CutoffProfile zeta = config.make_cutoff();
    json rows = json::array();
    for (double alpha : config.alphas) {
        const Sigma0Result s = sigma0_truncated(alpha, zeta, config.g);
        rows.push_back({{"alpha", alpha},
                        {"sigma0", s.energy},
                        {"inf_L", s.inf_L},
                        {"gap", s.energy - s.inf_L},
                        {"gap_over_alpha_sq", (s.energy - s.inf_L) / (alpha * alpha)},
                        {"iterations", s.iterations},
                        {"residual", s.residual}});
        log << "alpha = " << alpha << ": Sigma_0 = " << std::setprecision(12) << s.energy << "\n";
    }
    json rep = header("sigma0", config);
    rep["results"] = {{"points", rows}};
    out.push_back({"sigma0.json", dump(rep)});
    return exit_code::ok;
}

json breakdown_json(const FormBreakdown& b) {
    return {{"t_selfenergy", b.t_selfenergy},
            {"t_schrodinger", b.t_schrodinger},
            {"t_theta_schrodinger", b.t_theta_schrodinger},
            {"t_cross", b.t_cross},
            {"t_theta_field", b.t_theta_field},
            {"total", b.total},
            {"norm_sq", b.norm_sq},
            {"margin", b.margin},
            {"theta_field_to_cross", b.theta_field_to_cross}};
}

json direct_json(const DirectEvaluation& d) {
    return {{"particle_part", d.particle_part}, {"field_part", d.field_part},
            {"coupling_part", d.coupling_part}, {"total", d.total},
            {"norm_sq", d.norm_sq},             {"margin", d.margin},
            {"imaginary_residue", d.imaginary_residue}};
}

int cmd_certify(const RunConfig& config, std::vector<Output>& out, std::ostream& log) {
    const TrialOptions opts = config.trial_options();
    const ModelContext ctx = make_context(config.make_potential(), config.make_cutoff(), opts);
    json rows = json::array();
    bool all_bind = true;
    for (double alpha : config.alphas) {
        const double gamma = config.gamma_for(alpha);
        const TrialState trial = assemble_trial(ctx, alpha, gamma, opts);
        for (double probe : config.lambda_probes) {
            const double lambda = probe * ctx.lambda0;
            const Certificate c = binding_certificate(trial, lambda);
            all_bind = all_bind && c.binds;
            rows.push_back({{"alpha", alpha},
                            {"gamma_reg", gamma},
                            {"lambda", lambda},
                            {"lambda_over_lambda0", probe},
                            {"sigma0", trial.sigma0},
                            {"margin", c.margin},
                            {"binds", c.binds},
                            {"breakdown", breakdown_json(c.breakdown)},
                            {"direct", direct_json(c.direct)},
                            {"discrepancy", c.discrepancy}});
            log << "alpha = " << alpha << ", lambda = " << std::setprecision(12) << lambda
                << ": margin = " << c.margin << (c.binds ? " (binds)" : " (no certificate)") << "\n";
        }
    }
    json rep = header("certify", config);
    rep["results"] = {{"lambda0", ctx.lambda0}, {"c_w", ctx.cw.c_w}, {"eta2", ctx.eta2},
                      {"all_bind", all_bind}, {"certificates", rows}};
    out.push_back({"certify.json", dump(rep)});
    return all_bind ? exit_code::ok : exit_code::check_failed;
}

GammaPolicy effective_policy(const RunConfig& config) {
    if (!config.gamma_reg) return config.policy;
    const double g = *config.gamma_reg;
    return GammaPolicy{g, 0.0, g, g};
}

int cmd_sweep(const RunConfig& config, std::vector<Output>& out, std::ostream& log) {
    const TrialOptions opts = config.trial_options();
    const ModelContext ctx = make_context(config.make_potential(), config.make_cutoff(), opts);
    const ThresholdReport rep = alpha_sweep(ctx, config.alphas, effective_policy(config), opts, config.threads);

    json points = json::array();
    for (const auto& p : rep.points) {
        points.push_back({{"alpha", p.alpha},
                          {"gamma_reg", p.gamma_reg},
                          {"lambda_c", p.ok ? json(p.lambda_c) : json(nullptr)},
                          {"lambda_c_affine", p.ok ? json(p.lambda_c_affine) : json(nullptr)},
                          {"predicted_bound", p.predicted_bound},
                          {"shift_ratio", p.ok ? json(p.shift_ratio) : json(nullptr)},
                          {"margin_at_lambda0", p.margin_at_lambda0},
                          {"bisection_steps", p.bisection_steps},
                          {"ok", p.ok},
                          {"flag", p.flag}});
    }
    json res{{"lambda0", rep.lambda0},
             {"c_w", rep.c_w},
             {"eta2", rep.eta2},
             {"eta2_literal", rep.eta2_literal},
             {"gamma_policy", rep.policy.describe()},
             {"points", points},
             {"shift_fit", {{"intercept", rep.shift_fit.intercept}, {"slope", rep.shift_fit.slope},
                            {"residual_rms", rep.shift_fit.residual_rms}}},
             {"lambda_fit", {{"intercept", rep.lambda_fit.intercept}, {"slope", rep.lambda_fit.slope},
                             {"residual_rms", rep.lambda_fit.residual_rms}}},
             {"eta2_estimate", rep.eta2_estimate},
             {"eta2_estimate_ratio", rep.eta2 > 0.0 ? rep.eta2_estimate / rep.eta2 : 0.0},
             {"lambda0_extrapolated", rep.lambda0_extrapolated},
             {"all_below_lambda0", rep.all_below_lambda0},
             {"monotone", rep.monotone},
             {"complete", rep.complete}};
    json doc = header("sweep", config);
    doc["results"] = res;
    out.push_back({"sweep.json", dump(doc)});
    out.push_back({"sweep.csv", sweep_csv(rep)});
    log << "sweep: " << rep.points.size() << " points, eta^2 estimate " << std::setprecision(8) << rep.eta2_estimate
        << " (eta^2 = " << rep.eta2 << "), lambda_0 extrapolated " << rep.lambda0_extrapolated << "\n";

    if (!rep.complete) return exit_code::numeric_failure;
    return rep.all_below_lambda0 ? exit_code::ok : exit_code::check_failed;
}

// ---------------------------------------------------------------------------
// selftest

struct Check {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool passed = false;
    std::string detail;
};

double rel(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

std::vector<Check> invariant_suite(const RunConfig& config) {
    std::vector<Check> checks;
    auto at_most = [&](std::string name, double value, double limit, std::string detail = {}) {
        checks.push_back({std::move(name), value, limit, std::isfinite(value) && value <= limit, std::move(detail)});
    };

    // Pauli algebra
    {
        const auto& s = pauli::matrices();
        auto mul = [](const pauli::Matrix& a, const pauli::Matrix& b) {
            pauli::Matrix c{};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int k = 0; k < 2; ++k) c[i][j] += a[i][k] * b[k][j];
            return c;
        };
        double dev = 0.0;
        for (int i = 0; i < 3; ++i) {
            const auto sq = mul(s[i], s[i]);
            const auto prod = mul(s[i], s[(i + 1) % 3]);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) {
                    dev = std::max(dev, std::abs(sq[r][c] - cplx(r == c ? 1.0 : 0.0)));
                    dev = std::max(dev, std::abs(prod[r][c] - cplx(0, 1) * s[(i + 2) % 3][r][c]));
                }
        }
        at_most("pauli_algebra", dev, 1e-15);
    }

    TrialOptions opts = config.trial_options();
    const CutoffProfile zeta = config.make_cutoff();
    const RadialPotential w = config.make_potential();
    const ModelContext ctx = make_context(w, zeta, opts);
    const double c_w = ctx.cw.c_w;

    // polarization triads on the photon grid
    {
        double dev = 0.0;
        for (const auto& n : ctx.grid->nodes()) {
            Vec3 khat = n.k;
            for (double& x : khat) x /= n.k_abs;
            const Vec3 frame[3] = {khat, n.eps1, n.eps2};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) dev = std::max(dev, std::abs(dot(frame[i], frame[j]) - (i == j)));
            const Vec3 c = cross(n.eps1, n.eps2);
            for (int i = 0; i < 3; ++i) dev = std::max(dev, std::abs(c[i] - khat[i]));
        }
        at_most("polarization_frame", dev, 1e-13);
    }

    if (zeta.kind() == CutoffProfile::Kind::sharp) {
        const double a2 = zeta.amplitude() * zeta.amplitude();
        at_most("eta2_closed_form_cw_zero",
                rel(eta_squared(zeta, 0.0), a2 * eta_squared_sharp_closed_form(zeta.support(), 0.0)), 1e-8);
        at_most("eta2_closed_form", rel(ctx.eta2, a2 * eta_squared_sharp_closed_form(zeta.support(), c_w)), 1e-8);
    }
    if (config.potential.family == "indicator-well") {
        const double ref = std::numbers::pi * std::numbers::pi /
                           (4.0 * config.potential.depth * config.potential.radius * config.potential.radius);
        at_most("lambda0_closed_form", rel(ctx.lambda0, ref), 1e-6);
    }

    // d functional: Monte Carlo against the radial quadrature
    {
        const RadialPotential wp = w.absolute();
        const auto d = d_functional(wp);
        const auto mc = d_functional_monte_carlo([&](const Vec3& x) { return wp(norm(x)); }, wp.support(),
                                                 config.mc_samples, config.seed);
        const double z = std::abs(mc.value - d.double_integral) / std::max(mc.standard_error, 1e-300);
        at_most("d_functional_monte_carlo_zscore", z, 5.0);
    }

    // dressing vectors
    {
        const auto& s = opts.spinor;
        std::array<OnePhotonAmplitude, 3> th;
        for (int i = 0; i < 3; ++i) th[i] = theta_amplitude(ctx.grid, i, s, c_w);
        double offdiag = 0.0;
        double weighted = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j)
                if (i != j) offdiag = std::max(offdiag, std::abs(th[i].inner(th[j])) / th[i].norm_squared());
            const auto tw = th[i].multiplied(
                [&](const OnePhotonGrid::Node& n) { return n.k_abs * n.k_abs + n.k_abs + c_w; });
            weighted = std::max(weighted, rel(tw.inner(th[i]).real(), ctx.eta2));
        }
        at_most("theta_orthogonality", offdiag, 1e-9);
        at_most("theta_weighted_norm_equals_eta2", weighted, 1e-9);
        const auto orth = orthogonality_kphi_theta(ctx.grid, s, 1e-2, c_w);
        at_most("kphi_theta_orthogonality", *std::max_element(orth.relative.begin(), orth.relative.end()), 1e-9);
    }

    // one-photon minimizer and the truncated self-energy
    {
        const double alpha = 1e-2;
        const MinimizerReport m = minimize_L_numeric(ctx.grid, opts.spinor, alpha);
        const double f0 = self_energy_function(zeta, 0.0);
        at_most("inf_L_closed_form", rel(m.inf_value, -alpha * f0), 1e-8);
        at_most("gamma_coeff", std::abs(m.gamma_coeff - 1.0), 1e-8);
        at_most("minimizer_residual", m.residual_norm1_sq, 1e-10);
        at_most("minimizer_descent_deviation", m.descent.converged ? m.descent.max_deviation : INFINITY, 1e-8);
        const Sigma0Result s = sigma0_truncated(alpha, zeta, config.g);
        at_most("sigma0_fixed_point_residual",
                std::abs(s.energy + (config.g == 0 ? 0.0 : alpha * self_energy_function(zeta, s.energy))), 1e-13);
        at_most("sigma0_below_zero", s.energy, 0.0);
    }

    // particle side and the trial state
    {
        const double alpha = 1e-2;
        const double gamma = config.gamma_for(alpha);
        const TrialState t = assemble_trial(ctx, alpha, gamma, opts);
        at_most("bound_state_normalization", std::abs(t.f_norm_sq - 1.0), 1e-9);
        at_most("bound_state_virial",
                std::abs(regularized_form(t.particle, w) - t.particle.energy) / std::abs(t.particle.energy), 1e-6);
        const auto excess_check = gradient_excess_check(t.particle, w, ctx.lambda0, c_w, 0.0);
        at_most("gradient_form_excess", excess_check.excess, 0.0, "sum <(-Delta + lambda_0 W) d_i f, d_i f>/||grad f||^2 - C_W");
        const auto d = direct_form(t, ctx.lambda0);
        at_most("direct_norm_matches", rel(d.norm_sq, t.norm_sq()), 1e-9);
        at_most("direct_imaginary_residue", std::abs(d.imaginary_residue) / std::abs(d.total), 1e-12);

        const TrialState t0 = assemble_trial(ctx, 0.0, gamma, opts);
        const auto c0 = binding_certificate(t0, 0.9 * ctx.lambda0);
        at_most("decoupled_margin_below_threshold", -c0.margin, 1e-10, "-margin at alpha = 0, lambda = 0.9 lambda_0");
        at_most("decoupled_direct_matches_breakdown", std::abs(c0.discrepancy), 1e-12);
    }
    return checks;
}

int cmd_selftest(const RunConfig& config, std::vector<Output>& out, std::ostream& log) {
    const auto checks = invariant_suite(config);
    json rows = json::array();
    bool all = true;
    for (const auto& c : checks) {
        all = all && c.passed;
        json row{{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"passed", c.passed}};
        if (!c.detail.empty()) row["detail"] = c.detail;
        rows.push_back(row);
        log << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << std::setprecision(3) << c.value
            << " (limit " << c.limit << ")\n";
    }
    json rep = header("selftest", config);
    rep["results"] = {{"passed", all}, {"checks", rows}};
    out.push_back({"selftest.json", dump(rep)});
    return all ? exit_code::ok : exit_code::check_failed;
}

void write_outputs(const fs::path& dir, const std::vector<Output>& outputs) {
    fs::create_directories(dir);
    for (const auto& o : outputs) {
        const fs::path target = dir / o.name;
        const fs::path tmp = dir / (o.name + ".tmp");
        {
            std::ofstream f(tmp, std::ios::binary);
            f << o.content;
            if (!f) throw std::runtime_error("cannot write " + tmp.string());
        }
        fs::rename(tmp, target);
    }
}

}  // namespace

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
    const auto& p = potential;
    static const std::set<std::string> families{"indicator-well", "smooth-well", "exponential-well", "file"};
    require(families.contains(p.family), "unknown potential family '" + p.family + "'");
    if (p.family == "file") {
        require(!p.file.empty(), "potential family 'file' needs a 'file' entry");
        require(fs::is_regular_file(p.file), "potential profile file '" + p.file.string() + "' does not exist");
    } else {
        require(p.depth > 0.0, "potential depth must be positive");
        if (p.family == "exponential-well") {
            require(p.range > 0.0, "potential range must be positive");
            require(p.r_max > p.range, "potential r_max must exceed range");
        } else {
            require(p.radius > 0.0, "potential radius must be positive");
        }
    }
    if (p.decay) require(p.decay->a >= 0.0 && p.decay->c > 0.0 && p.decay->delta > 0.0, "decay parameters out of range");

    require(cutoff.variant == "sharp" || cutoff.variant == "smooth-bump",
            "unknown cutoff variant '" + cutoff.variant + "'");
    require(cutoff.support > 0.0, "cutoff support must be positive");
    require(cutoff.amplitude > 0.0, "cutoff amplitude must be positive");
    if (cutoff.variant == "smooth-bump")
        require(cutoff.width > 0.0 && cutoff.width <= cutoff.support, "cutoff width must lie in (0, support]");

    require(!alphas.empty(), "need at least one alpha");
    for (double a : alphas) require(a > 0.0 && a <= 1.0, "alpha values must lie in (0, 1]");
    std::vector<double> sorted = alphas;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "alpha values must be distinct");

    if (gamma_reg) require(*gamma_reg > 0.0 && *gamma_reg < 1.0, "gamma_reg must lie in (0, 1)");
    require(policy.scale > 0.0, "gamma_scale must be positive");
    require(policy.floor > 0.0 && policy.floor <= policy.ceiling && policy.ceiling < 1.0,
            "gamma policy needs 0 < gamma_floor <= gamma_ceiling < 1");
    require(!lambda_probes.empty(), "need at least one lambda probe");
    for (double l : lambda_probes) require(l > 0.0, "lambda probes must be positive");

    require(tolerance > 0.0, "tolerance must be positive");
    require(solver.ode_tolerance > 0.0, "ode_tolerance must be positive");
    require(solver.max_step > 0.0, "ode_max_step must be positive");
    require(threads >= 1, "threads must be at least 1");
    require(mc_samples >= 2, "mc_samples must be at least 2");
    require(g == 0 || g == 1, "g must be 0 or 1");
    require(std::abs(spinor.norm_squared() - 1.0) <= 1e-12, "spinor must be normalized");
    require(photon.radial_order >= 2 && photon.radial_panels >= 1, "photon radial grid too coarse");
    require(photon.n_theta >= 3 && photon.n_phi >= 5, "photon angular grid too coarse");

    try {
        (void)make_potential();
        (void)make_cutoff();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

RadialPotential RunConfig::make_potential() const {
    const auto& p = potential;
    RadialPotential w = [&] {
        if (p.family == "indicator-well") return RadialPotential::indicator_well(p.depth, p.radius);
        if (p.family == "smooth-well") return RadialPotential::smooth_well(p.depth, p.radius);
        if (p.family == "exponential-well") return RadialPotential::exponential_well(p.depth, p.range, p.r_max);
        if (p.family == "file") return RadialPotential::from_file(p.file);
        throw ConfigError("config: unknown potential family '" + p.family + "'");
    }();
    if (p.decay) w.set_decay(*p.decay);
    return w;
}

CutoffProfile RunConfig::make_cutoff() const {
    if (cutoff.variant == "smooth-bump")
        return CutoffProfile::smooth_bump(cutoff.support, cutoff.width, cutoff.amplitude);
    return CutoffProfile::sharp(cutoff.support, cutoff.amplitude);
}

TrialOptions RunConfig::trial_options() const {
    TrialOptions o;
    o.spinor = spinor;
    o.g = g;
    o.photon = photon;
    o.solver = solver;
    o.quad.tolerance = tolerance;
    return o;
}

double RunConfig::gamma_for(double alpha) const { return gamma_reg ? *gamma_reg : policy(alpha); }

RunConfig parse_config_text(const std::string& text, const fs::path& base_dir) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    RunConfig config;
    static const auto table = make_schema();
    for (const auto& [section, body] : tree) {
        const auto sec = table.find(section);
        if (sec == table.end()) {
            if (body.empty()) throw ConfigError("config: key '" + section + "' outside any section");
            throw ConfigError("config: unknown section [" + section + "]");
        }
        for (const auto& [key, node] : body) {
            const auto setter = sec->second.find(key);
            if (setter == sec->second.end())
                throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
            setter->second(config, node.data());
        }
    }
    auto& file = config.potential.file;
    if (!file.empty() && file.is_relative() && !base_dir.empty()) file = base_dir / file;
    config.validate();
    return config;
}

RunConfig parse_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.parent_path());
}

void apply_overrides(RunConfig& config, const Overrides& overrides) {
    if (overrides.threads) config.threads = *overrides.threads;
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.tolerance) config.tolerance = *overrides.tolerance;
    config.validate();
}

std::string config_json(const RunConfig& config) { return config_to_json(config).dump(2); }

std::string sweep_csv(const ThresholdReport& report) {
    std::ostringstream out;
    out << "alpha,lambda_c,predicted_bound\n";
    out << std::setprecision(17);
    for (const auto& p : report.points) {
        out << p.alpha << ',';
        if (p.ok) out << p.lambda_c;
        else out << "nan";
        out << ',' << p.predicted_bound << '\n';
    }
    return out.str();
}

double eta_squared_sharp_closed_form(double cutoff, double c) {
    if (!(cutoff > 0.0) || !(c >= 0.0)) throw InvalidInput("eta_squared_sharp_closed_form: need cutoff > 0, c >= 0");
    const double pref = 2.0 / (3.0 * std::numbers::pi);
    if (c == 0.0) return pref * std::log1p(cutoff);
    // int r/(r^2+r+c) = (1/2) log(r^2+r+c) - (1/2) int 1/(r^2+r+c)
    const double log_part = 0.5 * std::log((cutoff * cutoff + cutoff + c) / c);
    const double disc = 1.0 - 4.0 * c;
    double inv;
    if (disc < 0.0) {
        const double s = std::sqrt(-disc);
        inv = (2.0 / s) * (std::atan((2.0 * cutoff + 1.0) / s) - std::atan(1.0 / s));
    } else if (disc > 0.0) {
        const double s = std::sqrt(disc);
        inv = (1.0 / s) * (std::log((2.0 * cutoff + 1.0 - s) / (2.0 * cutoff + 1.0 + s)) - std::log((1.0 - s) / (1.0 + s)));
    } else {
        inv = 2.0 - 1.0 / (cutoff + 0.5);
    }
    return pref * (log_part - 0.5 * inv);
}

int run_command(const std::string& name, const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
    using Handler = int (*)(const RunConfig&, std::vector<Output>&, std::ostream&);
    static const std::map<std::string, Handler> handlers{
        {"lambda0", cmd_lambda0}, {"eta2", cmd_eta2},   {"sigma0", cmd_sigma0},
        {"certify", cmd_certify}, {"sweep", cmd_sweep}, {"selftest", cmd_selftest},
    };
    const auto it = handlers.find(name);
    if (it == handlers.end()) {
        log << "error: unknown command '" << name << "'\n";
        return exit_code::parse_error;
    }
    try {
        config.validate();
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return exit_code::parse_error;
    }

    std::vector<Output> outputs;
    int status = exit_code::ok;
    try {
        status = it->second(config, outputs, log);
    } catch (const Error& e) {
        log << "numeric failure: " << e.what() << "\n";
        return exit_code::numeric_failure;
    }
    try {
        write_outputs(out_dir, outputs);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_code::numeric_failure;
    }
    return status;
}

}  // namespace ebind::cli
