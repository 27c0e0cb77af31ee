#include "rws/wavelet.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "rws/errors.hpp"

namespace rws::synth {

namespace {
constexpr double kPi = std::numbers::pi;

double bump_ratio(double x) {
    // s(x)/(s(x)+s(1-x)) with s(x) = exp(-1/x): C-infinity transition
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

double poly_window(double x, int order) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    switch (order) {
        case 1: return x;
        case 2: return x * x * (3.0 - 2.0 * x);
        case 3: return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
        default: return x * x * x * x * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
    }
}
} // namespace

Wavelet Wavelet::meyer_smooth() { return Wavelet{}; }

Wavelet Wavelet::meyer_polynomial(int order) {
    if (order < 1 || order > 4)
        throw ConfigError("polynomial window order must lie in [1,4]");
    Wavelet w;
    w.window_ = Window::Polynomial;
    w.poly_order_ = order;
    return w;
}

double Wavelet::window_value(double x) const {
    return window_ == Window::SmoothBump ? bump_ratio(x) : poly_window(x, poly_order_);
}

double Wavelet::magnitude(double omega) const {
    const double w = std::fabs(omega);
    if (w <= 2.0 * kPi / 3.0 || w >= 8.0 * kPi / 3.0) return 0.0;
    if (w <= 4.0 * kPi / 3.0)
        return std::sin(kPi / 2.0 * window_value(3.0 * w / (2.0 * kPi) - 1.0));
    return std::cos(kPi / 2.0 * window_value(3.0 * w / (4.0 * kPi) - 1.0));
}

std::complex<double> Wavelet::fourier(double omega) const {
    const double m = magnitude(omega);
    if (m == 0.0) return {0.0, 0.0};
    return std::polar(m, omega / 2.0);
}

double Wavelet::declared_regularity() const {
    return window_ == Window::SmoothBump ? std::numeric_limits<double>::infinity()
                                         : static_cast<double>(poly_order_);
}

double Wavelet::overlap_sup() const {
    if (overlap_cache_ >= 0.0) return overlap_cache_;
    // Evaluate the 64-periodization of psi from its Fourier transform and take
    // sup over y of the integer-shift absolute sum.  The wrap-around of the
    // tails makes this an estimate; a 10% margin is added.
    const int period = 64;
    const int samples_per_unit = 64;
    const int total = period * samples_per_unit;
    const int m_max = static_cast<int>(std::ceil(8.0 / 6.0 * period)) + 1;
    std::vector<double> psi(total, 0.0);
    for (int i = 0; i < total; ++i) {
        const double t = static_cast<double>(i) / samples_per_unit;
        double acc = 0.0;
        for (int m = 1; m <= m_max; ++m) {
            const double w = 2.0 * kPi * m / period;
            const double mag = magnitude(w);
            if (mag == 0.0) continue;
            // psi real: pair the +-m terms
            acc += 2.0 * mag * std::cos(w * (t + 0.5));
        }
        psi[i] = acc / period;
    }
    double sup = 0.0;
    for (int i = 0; i < samples_per_unit; ++i) {
        double s = 0.0;
        for (int k = 0; k < period; ++k) s += std::fabs(psi[(i + k * samples_per_unit) % total]);
        sup = std::max(sup, s);
    }
    overlap_cache_ = 1.1 * sup;
    return overlap_cache_;
}

std::string Wavelet::describe() const {
    if (window_ == Window::SmoothBump) return "meyer-smooth";
    return "meyer-poly" + std::to_string(poly_order_);
}

} // namespace rws::synth
