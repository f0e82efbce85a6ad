#include "ebind/selfenergy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ebind/errors.hpp"

namespace ebind {

namespace {

constexpr double pi = std::numbers::pi;

numerics::RadialQuadrature fine_quadrature() {
    numerics::RadialQuadrature q;
    q.tolerance = 1e-14;
    return q;
}

double radial_integral(const CutoffProfile& zeta, const std::function<double(double)>& f,
                       const numerics::RadialQuadrature& quad) {
    const auto bp = zeta.breakpoints();
    return numerics::integrate_radial(f, 0.0, zeta.support(), quad, bp).value;
}

void require_same_grid(const OnePhotonAmplitude& x, const OnePhotonAmplitude& y) {
    if (!x.grid() || x.grid() != y.grid()) throw InvalidInput("OnePhotonAmplitude: operands live on different grids");
}

Amp4 scaled(const Amp4& v, cplx s) { return {s * v[0], s * v[1], s * v[2], s * v[3]}; }

}  // namespace

void SpinorCoefficients::validate(double tol) const {
    if (std::abs(norm_squared() - 1.0) > tol) throw InvalidInput("SpinorCoefficients: |a|^2 + |b|^2 must equal 1");
}

OnePhotonGrid::OnePhotonGrid(CutoffProfile zeta, const PhotonGridOptions& opts) : zeta_(std::move(zeta)), opts_(opts) {
    const auto bp = zeta_.breakpoints();
    const auto radial = numerics::composite_gauss(0.0, zeta_.support(), opts.radial_order, opts.radial_panels, bp);
    const numerics::AngularScheme scheme(opts.n_theta, opts.n_phi);
    nodes_.reserve(radial.size() * scheme.size());
    for (std::size_t i = 0; i < radial.size(); ++i) {
        const double r = radial.nodes[i];
        const double wr = radial.weights[i] * r * r * 4.0 * pi;
        for (std::size_t j = 0; j < scheme.size(); ++j) {
            const Vec3& n = scheme.nodes()[j];
            const Vec3 k{r * n[0], r * n[1], r * n[2]};
            const auto [e1, e2] = polarization_pair(k);
            nodes_.push_back({k, r, wr * scheme.weights()[j], e1, e2});
        }
    }
}

GridPtr make_photon_grid(const CutoffProfile& zeta, const PhotonGridOptions& opts) {
    return std::make_shared<const OnePhotonGrid>(zeta, opts);
}

OnePhotonAmplitude::OnePhotonAmplitude(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) throw InvalidInput("OnePhotonAmplitude: null grid");
    values_.assign(grid_->size(), Amp4{});
}

OnePhotonAmplitude OnePhotonAmplitude::from_closed_form(GridPtr grid, ClosedForm form) {
    OnePhotonAmplitude out(std::move(grid));
    const auto& nodes = out.grid_->nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) out.values_[i] = form(nodes[i].k);
    out.closed_form_ = std::move(form);
    return out;
}

OnePhotonAmplitude OnePhotonAmplitude::from_values(GridPtr grid, std::vector<Amp4> values) {
    OnePhotonAmplitude out(std::move(grid));
    if (values.size() != out.values_.size()) throw InvalidInput("OnePhotonAmplitude: value count does not match grid");
    out.values_ = std::move(values);
    return out;
}

Amp4 OnePhotonAmplitude::evaluate(const Vec3& k) const {
    if (!closed_form_) throw InvalidInput("OnePhotonAmplitude: no closed form attached");
    return closed_form_(k);
}

cplx OnePhotonAmplitude::inner(const OnePhotonAmplitude& other) const {
    require_same_grid(*this, other);
    const auto& nodes = grid_->nodes();
    cplx sum{};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        cplx s{};
        for (std::size_t c = 0; c < 4; ++c) s += values_[i][c] * std::conj(other.values_[i][c]);
        sum += nodes[i].weight * s;
    }
    return sum;
}

cplx OnePhotonAmplitude::inner1(const OnePhotonAmplitude& other) const {
    require_same_grid(*this, other);
    const auto& nodes = grid_->nodes();
    cplx sum{};
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        cplx s{};
        for (std::size_t c = 0; c < 4; ++c) s += values_[i][c] * std::conj(other.values_[i][c]);
        const double k = nodes[i].k_abs;
        sum += nodes[i].weight * (k * k + k) * s;
    }
    return sum;
}

OnePhotonAmplitude& OnePhotonAmplitude::operator+=(const OnePhotonAmplitude& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i)
        for (std::size_t c = 0; c < 4; ++c) values_[i][c] += other.values_[i][c];
    closed_form_ = nullptr;
    return *this;
}

OnePhotonAmplitude& OnePhotonAmplitude::operator-=(const OnePhotonAmplitude& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i)
        for (std::size_t c = 0; c < 4; ++c) values_[i][c] -= other.values_[i][c];
    closed_form_ = nullptr;
    return *this;
}

OnePhotonAmplitude& OnePhotonAmplitude::operator*=(cplx s) {
    for (auto& v : values_) v = scaled(v, s);
    if (closed_form_) {
        auto form = closed_form_;
        closed_form_ = [form, s](const Vec3& k) { return scaled(form(k), s); };
    }
    return *this;
}

OnePhotonAmplitude OnePhotonAmplitude::multiplied(const std::function<double(const OnePhotonGrid::Node&)>& m) const {
    OnePhotonAmplitude out(grid_);
    const auto& nodes = grid_->nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) out.values_[i] = scaled(values_[i], m(nodes[i]));
    return out;
}

Amp4 gamma_vector(const CutoffProfile& zeta, const SpinorCoefficients& s, const Vec3& k) {
    const double rho2 = k[0] * k[0] + k[1] * k[1];
    if (!(rho2 > 0.0)) throw AxisSingularity("gamma_vector: k lies on the k3-axis");
    const double kabs = norm(k);
    const double z = zeta(kabs);
    if (z == 0.0) return {};
    const double rho = std::sqrt(rho2);
    const double sk = std::sqrt(kabs);
    const cplx i{0.0, 1.0};
    const cplx k1{k[0]};
    const cplx k2{k[1]};
    const double k3 = k[2];
    return {
        z / sk * (-s.a * rho + s.b * (k1 - i * k2) * k3 / rho),
        s.b * z * (-k2 - i * k1) / rho * sk,
        z / sk * (s.b * rho + s.a * (k1 + i * k2) * k3 / rho),
        s.a * z * (-k2 + i * k1) / rho * sk,
    };
}

Amp4 phi_ab(const CutoffProfile& zeta, const SpinorCoefficients& s, double alpha, const Vec3& k) {
    const double kabs = norm(k);
    const cplx pre = std::sqrt(alpha) * cplx{0.0, 1.0} / (2.0 * pi * kabs * (1.0 + kabs));
    return scaled(gamma_vector(zeta, s, k), pre);
}

Amp4 sigma_k_star(const CutoffProfile& zeta, const SpinorCoefficients& s, const Vec3& k) {
    Amp4 out{};
    for (int lambda = 1; lambda <= 2; ++lambda) {
        CVec3 w = k_kernel(zeta, k, lambda);
        for (auto& c : w) c = std::conj(c);
        const Spinor v = sigma_dot(w, s.spinor());
        out[amp_index(0, lambda)] = v[0];
        out[amp_index(1, lambda)] = v[1];
    }
    return out;
}

Amp4 g_ab(const CutoffProfile& zeta, const SpinorCoefficients& s, const Vec3& k) {
    const double kabs = norm(k);
    return scaled(sigma_k_star(zeta, s, k), 1.0 / (kabs * kabs + kabs));
}

Amp4 theta_i(int axis, const CutoffProfile& zeta, const SpinorCoefficients& s, double c_w, const Vec3& k) {
    if (axis < 0 || axis > 2) throw InvalidInput("theta_i: axis must be 0, 1 or 2");
    if (!(c_w >= 0.0)) throw InvalidInput("theta_i: C_W must be >= 0");
    const double kabs = norm(k);
    const auto [e1, e2] = polarization_pair(k);
    const double base = kernel_prefactor(zeta, kabs) / (kabs * kabs + kabs + c_w);
    return {s.a * base * e1[axis], s.a * base * e2[axis], s.b * base * e1[axis], s.b * base * e2[axis]};
}

OnePhotonAmplitude phi_amplitude(const GridPtr& grid, const SpinorCoefficients& s, double alpha) {
    const CutoffProfile zeta = grid->cutoff();
    return OnePhotonAmplitude::from_closed_form(grid, [zeta, s, alpha](const Vec3& k) { return phi_ab(zeta, s, alpha, k); });
}

OnePhotonAmplitude g_amplitude(const GridPtr& grid, const SpinorCoefficients& s) {
    const CutoffProfile zeta = grid->cutoff();
    return OnePhotonAmplitude::from_closed_form(grid, [zeta, s](const Vec3& k) { return g_ab(zeta, s, k); });
}

OnePhotonAmplitude theta_amplitude(const GridPtr& grid, int axis, const SpinorCoefficients& s, double c_w) {
    const CutoffProfile zeta = grid->cutoff();
    return OnePhotonAmplitude::from_closed_form(
        grid, [zeta, s, axis, c_w](const Vec3& k) { return theta_i(axis, zeta, s, c_w, k); });
}

namespace {

OnePhotonAmplitude source_amplitude(const GridPtr& grid, const SpinorCoefficients& s) {
    const CutoffProfile zeta = grid->cutoff();
    return OnePhotonAmplitude::from_closed_form(grid, [zeta, s](const Vec3& k) { return sigma_k_star(zeta, s, k); });
}

}  // namespace

double L_functional(const OnePhotonAmplitude& xi, const SpinorCoefficients& s, double alpha) {
    const auto source = source_amplitude(xi.grid(), s);
    return xi.norm1_squared() + 2.0 * std::sqrt(alpha) * xi.inner(source).real();
}

Decomposition decompose(const OnePhotonAmplitude& xi, const OnePhotonAmplitude& phi) {
    Decomposition d;
    const double phi_norm = phi.norm1_squared();
    if (!(phi_norm > 0.0)) throw InvalidInput("decompose: phi has zero <.,.>_1 norm");
    d.gamma_coeff = xi.inner1(phi).real() / phi_norm;
    d.residual = xi - cplx{d.gamma_coeff} * phi;
    d.residual_norm1_sq = d.residual.norm1_squared();
    d.orthogonality = std::abs(phi.inner1(d.residual));
    return d;
}

MinimizerReport minimize_L_numeric(const GridPtr& grid, const SpinorCoefficients& s, double alpha, double cg_tol,
                                   int cg_max_iterations) {
    s.validate();
    if (!(alpha > 0.0)) throw InvalidInput("minimize_L_numeric: alpha must be positive");
    MinimizerReport rep;
    const double sa = std::sqrt(alpha);
    const auto source = source_amplitude(grid, s);
    rep.minimizer = cplx{-sa} * g_amplitude(grid, s);
    rep.inf_value = L_functional(rep.minimizer, s, alpha);

    // Conjugate gradients on (k^2 + |k|) xi = -sqrt(alpha) sigma . K* (a, b).
    auto apply = [](const OnePhotonAmplitude& v) {
        return v.multiplied([](const OnePhotonGrid::Node& n) { return n.k_abs * n.k_abs + n.k_abs; });
    };
    const OnePhotonAmplitude rhs = cplx{-sa} * source;
    OnePhotonAmplitude x(grid);
    OnePhotonAmplitude r = rhs;
    OnePhotonAmplitude p = r;
    double rr = r.norm_squared();
    const double stop = cg_tol * cg_tol * rhs.norm_squared();
    int it = 0;
    while (rr > stop && it < cg_max_iterations) {
        const OnePhotonAmplitude ap = apply(p);
        const double step = rr / p.inner(ap).real();
        x += cplx{step} * p;
        r -= cplx{step} * ap;
        const double rr_next = r.norm_squared();
        p = r + cplx{rr_next / rr} * p;
        rr = rr_next;
        ++it;
    }
    rep.descent.iterations = it;
    rep.descent.residual = std::sqrt(rr / std::max(rhs.norm_squared(), 1e-300));
    rep.descent.converged = rr <= stop;
    double scale = 0.0;
    double dev = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
        for (std::size_t c = 0; c < 4; ++c) {
            scale = std::max(scale, std::abs(rep.minimizer.values()[i][c]));
            dev = std::max(dev, std::abs(x.values()[i][c] - rep.minimizer.values()[i][c]));
        }
    }
    rep.descent.max_deviation = scale > 0.0 ? dev / scale : dev;

    const auto phi = phi_amplitude(grid, s, alpha);
    auto d = decompose(rep.minimizer, phi);
    rep.gamma_coeff = d.gamma_coeff;
    rep.residual = std::move(d.residual);
    rep.residual_norm1_sq = d.residual_norm1_sq;
    return rep;
}

double self_energy_function(const CutoffProfile& zeta, double energy, const numerics::RadialQuadrature& quad) {
    if (energy > 0.0) throw InvalidInput("self_energy_function: energy must be <= 0");
    return 2.0 / pi * radial_integral(zeta, [&](double r) {
        const double z = zeta(r);
        return r * r * r * z * z / (r * r + r - energy);
    }, quad);
}

Sigma0Result sigma0_truncated(double alpha, const CutoffProfile& zeta, int g, double tol) {
    ModelParams{alpha, g}.validate();
    Sigma0Result res;
    const auto quad = fine_quadrature();
    res.inf_L = -alpha * self_energy_function(zeta, 0.0, quad);
    if (alpha == 0.0 || g == 0) return res;
    const auto fp = numerics::fixed_point(
        [&](double e) { return -alpha * self_energy_function(zeta, std::min(e, 0.0), quad); }, res.inf_L, tol);
    res.energy = fp.value;
    res.iterations = fp.iterations;
    res.residual = fp.residual;
    return res;
}

TruncatedDressedState truncated_ground_state(const GridPtr& grid, const SpinorCoefficients& s, double alpha,
                                             double sigma0, int g) {
    s.validate();
    if (sigma0 > 0.0) throw InvalidInput("truncated_ground_state: Sigma_0 must be <= 0");
    TruncatedDressedState st;
    st.spinor = s;
    st.energy = sigma0;
    if (alpha == 0.0 || g == 0) {
        st.photon = OnePhotonAmplitude(grid);
        return st;
    }
    const CutoffProfile zeta = grid->cutoff();
    const double sa = std::sqrt(alpha);
    st.photon = OnePhotonAmplitude::from_closed_form(grid, [zeta, s, sa, sigma0](const Vec3& k) {
        const double kabs = norm(k);
        return scaled(sigma_k_star(zeta, s, k), -sa / (kabs * kabs + kabs - sigma0));
    });
    return st;
}

double eta_squared(const CutoffProfile& zeta, double c_w, EtaMode mode, const numerics::RadialQuadrature& quad) {
    if (!(c_w >= 0.0)) throw InvalidInput("eta_squared: C_W must be >= 0");
    numerics::RadialQuadrature q = quad;
    q.tolerance = std::min(q.tolerance, 1e-14);
    return 2.0 / (3.0 * pi) * radial_integral(zeta, [&](double r) {
        const double z = zeta(r);
        const double weight = mode == EtaMode::squared ? z * z : z;
        return r * weight / (r * r + r + c_w);
    }, q);
}

namespace radial {

double theta_norm_sq(const CutoffProfile& zeta, double c_w) {
    return 2.0 / (3.0 * pi) * radial_integral(zeta, [&](double r) {
        const double z = zeta(r);
        const double d = r * r + r + c_w;
        return r * z * z / (d * d);
    }, fine_quadrature());
}

double theta_norm1_sq(const CutoffProfile& zeta, double c_w) {
    return 2.0 / (3.0 * pi) * radial_integral(zeta, [&](double r) {
        const double z = zeta(r);
        const double d = r * r + r + c_w;
        return r * z * z * (r * r + r) / (d * d);
    }, fine_quadrature());
}

double phi_norm1_sq(const CutoffProfile& zeta, double alpha) {
    return alpha * self_energy_function(zeta, 0.0, fine_quadrature());
}

double dressed_norm_sq(const CutoffProfile& zeta, double alpha, double energy) {
    return alpha * 2.0 / pi * radial_integral(zeta, [&](double r) {
        const double z = zeta(r);
        const double d = r * r + r - energy;
        return r * r * r * z * z / (d * d);
    }, fine_quadrature());
}

}  // namespace radial

OrthogonalityReport orthogonality_kphi_theta(const GridPtr& grid, const SpinorCoefficients& s, double alpha,
                                             double c_w) {
    OrthogonalityReport rep;
    const auto phi = phi_amplitude(grid, s, alpha);
    for (int axis = 0; axis < 3; ++axis) {
        const auto theta = theta_amplitude(grid, axis, s, c_w);
        const auto kphi = phi.multiplied([axis](const OnePhotonGrid::Node& n) { return n.k[axis]; });
        rep.values[axis] = kphi.inner(theta);
        const double scale = std::sqrt(kphi.norm_squared() * theta.norm_squared());
        rep.relative[axis] = scale > 0.0 ? std::abs(rep.values[axis]) / scale : 0.0;
    }
    return rep;
}

ScalingReport scaling_check(const std::vector<double>& alphas, const GridPtr& grid, const SpinorCoefficients& s) {
    if (alphas.size() < 4) throw InvalidInput("scaling_check: need at least four alpha values");
    for (double a : alphas)
        if (!(a > 0.0)) throw InvalidInput("scaling_check: alpha values must be positive");
    const auto [lo, hi] = std::minmax_element(alphas.begin(), alphas.end());
    if (*hi / *lo < 100.0 * (1.0 - 1e-12)) throw InvalidInput("scaling_check: ladder must span two decades");

    ScalingReport rep;
    rep.alphas = alphas;
    for (double a : alphas) {
        const auto sigma = sigma0_truncated(a, grid->cutoff());
        const auto st = truncated_ground_state(grid, s, a, sigma.energy);
        const double n2 = st.photon.norm_squared();
        const double hf = st.photon.multiplied([](const OnePhotonGrid::Node& n) { return std::sqrt(n.k_abs); })
                              .norm_squared();
        rep.photon_norm.push_back(std::sqrt(n2));
        rep.field_energy_norm.push_back(std::sqrt(hf));
        rep.number_norm.push_back(std::sqrt(n2));
        rep.excess_norm_sq.push_back(st.norm_squared() - 1.0);
    }
    rep.photon_exponent = numerics::log_log_fit(rep.alphas, rep.photon_norm).slope;
    rep.field_energy_exponent = numerics::log_log_fit(rep.alphas, rep.field_energy_norm).slope;
    rep.number_exponent = numerics::log_log_fit(rep.alphas, rep.number_norm).slope;
    rep.excess_exponent = numerics::log_log_fit(rep.alphas, rep.excess_norm_sq).slope;
    return rep;
}

}  // namespace ebind
