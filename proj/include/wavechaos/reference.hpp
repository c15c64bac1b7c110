#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wavechaos/error.hpp"
#include "wavechaos/quadrature.hpp"

namespace wavechaos::reference {

inline constexpr double kPi = std::numbers::pi;

/// Transition parameter xi >= 0 of the GOE -> GUE crossover.
class ViolationParameter {
public:
    explicit ViolationParameter(double xi) : xi_(xi) {
        if (!(xi >= 0.0) || !std::isfinite(xi)) throw InvalidArgument("violation parameter xi must be finite and >= 0");
    }
    double xi() const { return xi_; }
    double lambda() const { return kPi / std::numbers::sqrt2 * xi_; }

private:
    double xi_;
};

// Spacing surmises ---------------------------------------------------------

inline double poisson_spacing(double s) { return s < 0 ? 0.0 : std::exp(-s); }
inline double poisson_spacing_cdf(double s) { return s < 0 ? 0.0 : 1.0 - std::exp(-s); }
inline double goe_surmise(double s) { return s < 0 ? 0.0 : 0.5 * kPi * s * std::exp(-0.25 * kPi * s * s); }
inline double goe_surmise_cdf(double s) { return s < 0 ? 0.0 : 1.0 - std::exp(-0.25 * kPi * s * s); }
inline double gue_surmise(double s) {
    return s < 0 ? 0.0 : 32.0 / (kPi * kPi) * s * s * std::exp(-4.0 * s * s / kPi);
}
inline double gue_surmise_cdf(double s) {
    if (s <= 0) return 0.0;
    const double a = 2.0 * s / std::sqrt(kPi);
    return std::erf(a) - 2.0 * a / std::sqrt(kPi) * std::exp(-a * a);
}

/// c(lambda) of the interpolating spacing distribution.
inline double spacing_scale(double lambda) {
    const double l2 = lambda * lambda;
    return std::sqrt(kPi * (2.0 + l2) / 4.0) *
           (1.0 - 2.0 / kPi * (std::atan(lambda / std::numbers::sqrt2) - std::numbers::sqrt2 * lambda / (2.0 + l2)));
}

/// P(s; xi) interpolating between the GOE (xi = 0) and GUE surmises.
inline double ps_partial(double s, ViolationParameter xi) {
    if (s < 0.0) throw InvalidArgument("ps_partial: s must be >= 0");
    if (xi.xi() == 0.0) return goe_surmise(s);
    const double lambda = xi.lambda();
    const double c = spacing_scale(lambda);
    return std::sqrt((2.0 + lambda * lambda) / 2.0) * s * c * c * std::erf(s * c / lambda) *
           std::exp(-0.5 * s * s * c * c);
}

inline double ps_partial_cdf(double s, ViolationParameter xi) {
    if (s <= 0.0) return 0.0;
    if (xi.xi() == 0.0) return goe_surmise_cdf(s);
    return std::min(1.0, quad::integrate([&](double t) { return ps_partial(t, xi); }, 0.0, s, 1e-12).value);
}

// Ratio distributions (surmise on 3x3 matrices), for r~ in [0, 1] ------------

inline double ratio_pdf_poisson(double r) { return (r < 0 || r > 1) ? 0.0 : 2.0 / ((1.0 + r) * (1.0 + r)); }

inline double ratio_pdf_beta(double r, int beta) {
    if (r < 0 || r > 1) return 0.0;
    const double z = beta == 1 ? 8.0 / 27.0 : 4.0 * kPi / (81.0 * std::sqrt(3.0));
    const double b = static_cast<double>(beta);
    return 2.0 / z * std::pow(r + r * r, b) / std::pow(1.0 + r + r * r, 1.0 + 1.5 * b);
}

// Two-point cluster function -------------------------------------------------

/// Sign of the exponent in the finite-range kernel D(L; xi).
enum class DKernel {
    Growing,   // exp(+2 xi^2 x^2)
    Decaying,  // exp(-2 xi^2 x^2)
};

inline std::string to_string(DKernel k) { return k == DKernel::Growing ? "growing" : "decaying"; }

inline double sinc_pi(double L) { return L == 0.0 ? 1.0 : std::sin(kPi * L) / (kPi * L); }

/// Si(pi L) = int_0^pi sin(L x) / x dx
inline double sine_integral_pi(double L) {
    if (L == 0.0) return 0.0;
    const auto panels = static_cast<std::size_t>(std::ceil(std::abs(L))) + 1;
    return quad::integrate_panels([&](double x) { return x == 0.0 ? L : std::sin(L * x) / x; }, 0.0, kPi, panels, 1e-14)
        .value;
}

/// GOE cluster function s(L)^2 + s'(L) int_L^inf s(t) dt.
inline double y2_goe(double L) {
    L = std::abs(L);
    if (L < 1e-8) return 1.0;
    const double pl = kPi * L;
    const double d = (std::sin(pl) - pl * std::cos(pl)) / (kPi * L * L);  // -s'(L)
    const double j = 0.5 - sine_integral_pi(L) / kPi;
    const double s = sinc_pi(L);
    return s * s - d * j;
}

inline double y2_gue(double L) {
    const double s = sinc_pi(L);
    return s * s;
}

/// D(L; xi) = (1/pi) int_0^pi x exp(+-2 xi^2 x^2) sin(L x) dx
inline double y2_kernel_d(double L, double xi, DKernel kernel) {
    const double sign = kernel == DKernel::Growing ? 1.0 : -1.0;
    const double a = 2.0 * xi * xi;
    const auto panels = static_cast<std::size_t>(std::ceil(std::abs(L))) + 1;
    return quad::integrate_panels([&](double x) { return x * std::exp(sign * a * x * x) * std::sin(L * x); }, 0.0, kPi,
                                  panels, 1e-13 * std::max(1.0, std::exp(a * kPi * kPi)))
               .value /
           kPi;
}

/// J(L; xi) = (1/pi) int_pi^inf exp(-2 xi^2 x^2) sin(L x) / x dx, reduced
/// exactly with int_0^inf exp(-a x^2) sin(L x)/x dx = (pi/2) erf(L / (2 sqrt a)).
inline double y2_kernel_j(double L, double xi) {
    const double a = 2.0 * xi * xi;
    const double full = 0.5 * kPi * std::erf(L / (2.0 * std::sqrt(a)));
    const auto panels = static_cast<std::size_t>(std::ceil(std::abs(L))) + 1;
    const double head = quad::integrate_panels(
                            [&](double x) { return std::exp(-a * x * x) * (x == 0.0 ? L : std::sin(L * x) / x); }, 0.0,
                            kPi, panels, 1e-14)
                            .value;
    return (full - head) / kPi;
}

/// Y2(L; xi) = s(L)^2 - D(L; xi) J(L; xi); xi < 1e-3 uses the GOE closed form.
inline double y2_partial(double L, ViolationParameter xi, DKernel kernel = DKernel::Decaying) {
    if (L < 0.0) throw InvalidArgument("y2_partial: L must be >= 0");
    if (L == 0.0) return 1.0;
    if (xi.xi() < 1e-3) return y2_goe(L);
    const double s = sinc_pi(L);
    return s * s - y2_kernel_d(L, xi.xi(), kernel) * y2_kernel_j(L, xi.xi());
}

/// Sigma^2(L) = L - 2 int_0^L (L - r) Y2(r) dr for a given cluster function.
template <class Y2>
double sigma2_from_cluster(double L, Y2&& y2, double tol = 1e-8) {
    if (L < 0.0) throw InvalidArgument("sigma2: L must be >= 0");
    if (L == 0.0) return 0.0;
    const auto panels = static_cast<std::size_t>(std::ceil(L)) + 1;
    return L - 2.0 * quad::integrate_panels([&](double r) { return (L - r) * y2(r); }, 0.0, L, panels, tol).value;
}

/// Delta_3(L) = (2/L^4) int_0^L (L^3 - 2 L^2 r + r^3) Sigma^2(r) dr.
template <class Sigma2>
double delta3_from_sigma2(double L, Sigma2&& sigma2, double tol = 1e-8) {
    if (L < 0.0) throw InvalidArgument("delta3: L must be >= 0");
    if (L == 0.0) return 0.0;
    const double L2 = L * L;
    const auto panels = static_cast<std::size_t>(std::ceil(L)) + 1;
    const double integral =
        quad::integrate_panels([&](double r) { return (L2 * L - 2.0 * L2 * r + r * r * r) * sigma2(r); }, 0.0, L, panels,
                               tol * L2 * L2)
            .value;
    return 2.0 / (L2 * L2) * integral;
}

inline double sigma2_from_y2(double L, ViolationParameter xi, DKernel kernel = DKernel::Decaying) {
    return sigma2_from_cluster(L, [&](double r) { return y2_partial(r, xi, kernel); });
}

inline double delta3_from_y2(double L, ViolationParameter xi, DKernel kernel = DKernel::Decaying) {
    return delta3_from_sigma2(L, [&](double r) { return sigma2_from_y2(r, xi, kernel); });
}

}  // namespace wavechaos::reference
