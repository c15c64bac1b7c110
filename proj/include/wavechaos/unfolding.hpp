#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "wavechaos/error.hpp"
#include "wavechaos/spectrum.hpp"
#include "wavechaos/waveguide.hpp"

namespace wavechaos::unfold {

/// x_m = N_smooth(k(f_m)) for a spectrum given in Hz.
inline UnfoldedSpectrum unfold_dispersion(const SpectrumSeries& s, const waveguide::Geometry& g,
                                          waveguide::Regime r) {
    if (s.unit() != SpectrumUnit::Hertz) throw InvalidArgument("unfold_dispersion: spectrum must be in Hz");
    g.validate();
    const auto window = waveguide::regime_window(g, r);
    UnfoldedSpectrum out;
    out.source = "dispersion:" + waveguide::to_string(r);
    for (double f : s.values()) {
        if (f < window.lo * (1.0 - 1e-12) || f > window.hi * (1.0 + 1e-12)) {
            throw InvalidArgument("unfold_dispersion: frequency " + std::to_string(f) + " Hz outside the " +
                                  waveguide::to_string(r) + " window");
        }
        out.values.push_back(waveguide::smooth_count(waveguide::wavenumber(f), g, r));
    }
    return out;
}

/// Smooth staircase fitted by least squares; evaluates the polynomial in a
/// centered and scaled variable for conditioning.
class PolynomialStaircase {
public:
    PolynomialStaircase(const std::vector<double>& x, int degree) : degree_(degree) {
        if (degree < 0) throw InvalidArgument("unfold_polynomial: degree must be >= 0");
        if (x.size() <= static_cast<std::size_t>(degree) + 1) {
            throw InvalidArgument("unfold_polynomial: need more than degree+1 levels (have " +
                                  std::to_string(x.size()) + ", degree " + std::to_string(degree) + ")");
        }
        center_ = 0.5 * (x.front() + x.back());
        scale_ = 0.5 * (x.back() - x.front());
        if (!(scale_ > 0.0)) throw InvalidArgument("unfold_polynomial: spectrum has zero span");
        const auto n = static_cast<Eigen::Index>(x.size());
        Eigen::MatrixXd a(n, degree + 1);
        Eigen::VectorXd b(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double t = (x[static_cast<std::size_t>(i)] - center_) / scale_;
            double p = 1.0;
            for (int j = 0; j <= degree; ++j) {
                a(i, j) = p;
                p *= t;
            }
            b(i) = static_cast<double>(i + 1);
        }
        coeffs_ = a.colPivHouseholderQr().solve(b);
    }

    double operator()(double x) const {
        const double t = (x - center_) / scale_;
        double v = 0;
        for (int j = degree_; j >= 0; --j) v = v * t + coeffs_(j);
        return v;
    }

private:
    int degree_;
    double center_ = 0;
    double scale_ = 1;
    Eigen::VectorXd coeffs_;
};

inline UnfoldedSpectrum unfold_polynomial(const SpectrumSeries& s, int degree = 5) {
    const PolynomialStaircase fit(s.values(), degree);
    UnfoldedSpectrum out;
    out.source = "polynomial:" + std::to_string(degree);
    for (double x : s.values()) out.values.push_back(fit(x));
    return out;
}

/// Maps levels through an arbitrary smooth counting function.
inline UnfoldedSpectrum unfold_with(const SpectrumSeries& s, const std::function<double(double)>& smooth,
                                    std::string source) {
    UnfoldedSpectrum out;
    out.source = std::move(source);
    for (double x : s.values()) out.values.push_back(smooth(x));
    return out;
}

}  // namespace wavechaos::unfold
