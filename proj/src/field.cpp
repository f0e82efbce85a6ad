#include "ebind/field.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ebind/errors.hpp"

namespace ebind {

CutoffProfile::CutoffProfile(Kind kind, double support, double width, double amplitude)
    : kind_(kind), support_(support), width_(width), amplitude_(amplitude) {
    if (!(support > 0.0)) throw InvalidInput("CutoffProfile: support radius must be positive");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw InvalidInput("CutoffProfile: amplitude must be finite and >= 0");
    if (kind == Kind::smooth_bump && !(width > 0.0 && width <= support)) {
        throw InvalidInput("CutoffProfile: smoothing width must lie in (0, support]");
    }
}

CutoffProfile CutoffProfile::sharp(double support, double amplitude) {
    return CutoffProfile(Kind::sharp, support, 0.0, amplitude);
}

CutoffProfile CutoffProfile::smooth_bump(double support, double width, double amplitude) {
    return CutoffProfile(Kind::smooth_bump, support, width, amplitude);
}

double CutoffProfile::operator()(double r) const {
    if (r < 0.0 || r > support_) return 0.0;
    if (kind_ == Kind::sharp) return amplitude_;
    const double start = support_ - width_;
    if (r <= start) return amplitude_;
    const double c = std::cos(0.5 * std::numbers::pi * (r - start) / width_);
    return amplitude_ * c * c;
}

std::vector<double> CutoffProfile::breakpoints() const {
    if (kind_ == Kind::smooth_bump && width_ < support_) return {support_ - width_};
    return {};
}

std::string CutoffProfile::describe() const {
    std::ostringstream out;
    out << (kind_ == Kind::sharp ? "sharp" : "smooth-bump") << "(support=" << support_;
    if (kind_ == Kind::smooth_bump) out << ", width=" << width_;
    if (amplitude_ != 1.0) out << ", amplitude=" << amplitude_;
    out << ")";
    return out.str();
}

void ModelParams::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidInput("ModelParams: alpha must be finite and >= 0");
    if (g != 0 && g != 1) throw InvalidInput("ModelParams: spin flag g must be 0 or 1");
}

std::pair<Vec3, Vec3> polarization_pair(const Vec3& k) {
    const double rho2 = k[0] * k[0] + k[1] * k[1];
    if (!(rho2 > 0.0)) throw AxisSingularity("polarization_pair: k lies on the k3-axis");
    const double rho = std::sqrt(rho2);
    const double kabs = norm(k);
    const Vec3 eps1{k[1] / rho, -k[0] / rho, 0.0};
    const Vec3 khat{k[0] / kabs, k[1] / kabs, k[2] / kabs};
    return {eps1, cross(khat, eps1)};
}

Vec3 polarization(const Vec3& k, int lambda) {
    const auto [e1, e2] = polarization_pair(k);
    if (lambda == 1) return e1;
    if (lambda == 2) return e2;
    throw InvalidInput("polarization: lambda must be 1 or 2");
}

double normal_ordering_constant(const CutoffProfile& zeta) {
    const auto bp = zeta.breakpoints();
    const auto res = numerics::integrate_radial(
        [&](double r) {
            const double z = zeta(r);
            return r * z * z;
        },
        0.0, zeta.support(), {}, bp);
    return 2.0 / std::numbers::pi * res.value;
}

double kernel_prefactor(const CutoffProfile& zeta, double k_abs) {
    if (!(k_abs > 0.0)) throw InvalidInput("kernel_prefactor: |k| must be positive");
    return zeta(k_abs) / (2.0 * std::numbers::pi * std::sqrt(k_abs));
}

CVec3 d_kernel(const CutoffProfile& zeta, const Vec3& k, int lambda) {
    const Vec3 eps = polarization(k, lambda);
    const double pre = kernel_prefactor(zeta, norm(k));
    return {cplx{pre * eps[0]}, cplx{pre * eps[1]}, cplx{pre * eps[2]}};
}

CVec3 k_kernel(const CutoffProfile& zeta, const Vec3& k, int lambda) {
    const Vec3 eps = polarization(k, lambda);
    const double pre = kernel_prefactor(zeta, norm(k));
    const Vec3 kxe = cross(k, eps);
    const cplx i{0.0, 1.0};
    return {i * pre * kxe[0], i * pre * kxe[1], i * pre * kxe[2]};
}

Spinor sigma_dot(const CVec3& v, const Spinor& spinor) {
    const auto& sigma = pauli::matrices();
    Spinor out{};
    for (int m = 0; m < 3; ++m) {
        for (int r = 0; r < 2; ++r) {
            out[r] += v[m] * (sigma[m][r][0] * spinor[0] + sigma[m][r][1] * spinor[1]);
        }
    }
    return out;
}

}  // namespace ebind
