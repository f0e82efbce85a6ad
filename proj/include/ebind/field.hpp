#pragma once

// Quantized-field ingredients evaluated at the particle position x = 0:
// ultraviolet cutoff, Coulomb-gauge polarization frame, the one-photon
// coefficient functions of A(0) and B(0), and the Pauli-matrix action.

#include <array>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "ebind/numerics.hpp"

namespace ebind {

using cplx = std::complex<double>;
using CVec3 = std::array<cplx, 3>;
using Spinor = std::array<cplx, 2>;

/// Ultraviolet cutoff zeta(r), compactly supported in [0, support].
class CutoffProfile {
public:
    enum class Kind { sharp, smooth_bump };

    /// Indicator of [0, support].
    static CutoffProfile sharp(double support, double amplitude = 1.0);
    /// Equal to amplitude on [0, support - width], C^1 cos^2 roll-off to zero at support.
    static CutoffProfile smooth_bump(double support, double width, double amplitude = 1.0);

    double operator()(double r) const;

    Kind kind() const { return kind_; }
    double support() const { return support_; }
    double width() const { return width_; }
    double amplitude() const { return amplitude_; }
    /// Points inside (0, support) where zeta is not smooth.
    std::vector<double> breakpoints() const;
    std::string describe() const;

private:
    CutoffProfile(Kind kind, double support, double width, double amplitude);

    Kind kind_;
    double support_;
    double width_;
    double amplitude_;
};

/// alpha (fine structure constant) and the spin flag g.
struct ModelParams {
    double alpha = 0.0;
    int g = 1;

    void validate() const;
};

namespace pauli {

using Matrix = std::array<std::array<cplx, 2>, 2>;

inline const std::array<Matrix, 3>& matrices() {
    static const std::array<Matrix, 3> sigma{{
        {{{cplx{0, 0}, cplx{1, 0}}, {cplx{1, 0}, cplx{0, 0}}}},
        {{{cplx{0, 0}, cplx{0, -1}}, {cplx{0, 1}, cplx{0, 0}}}},
        {{{cplx{1, 0}, cplx{0, 0}}, {cplx{0, 0}, cplx{-1, 0}}}},
    }};
    return sigma;
}

}  // namespace pauli

/// Polarization vectors (eps1, eps2) for photon momentum k off the k3-axis.
/// {k/|k|, eps1, eps2} is a right-handed orthonormal triad.
std::pair<Vec3, Vec3> polarization_pair(const Vec3& k);

/// Single polarization vector, lambda in {1, 2}.
Vec3 polarization(const Vec3& k, int lambda);

/// c_n.o. = (2/pi) * int_0^inf r |zeta(r)|^2 dr.
double normal_ordering_constant(const CutoffProfile& zeta);

/// zeta(|k|)/(2 pi |k|^{1/2}); the common prefactor of the A(0) and B(0) kernels.
double kernel_prefactor(const CutoffProfile& zeta, double k_abs);

/// Coefficient of a_lambda(k) in A(0).
CVec3 d_kernel(const CutoffProfile& zeta, const Vec3& k, int lambda);

/// Coefficient of a_lambda(k) in B(0): prefactor * (k x i eps_lambda).
CVec3 k_kernel(const CutoffProfile& zeta, const Vec3& k, int lambda);

/// (sigma . v) applied to a spinor; v may be complex.
Spinor sigma_dot(const CVec3& v, const Spinor& spinor);

}  // namespace ebind
