#ifndef RWS_WAVELET_HPP
#define RWS_WAVELET_HPP

#include <complex>
#include <string>

namespace rws::synth {

// Band-limited Meyer-type wavelet defined in the frequency domain:
//   psi_hat(w) = e^{iw/2} sin(pi/2 v(3|w|/(2pi) - 1))   on 2pi/3 <= |w| <= 4pi/3
//   psi_hat(w) = e^{iw/2} cos(pi/2 v(3|w|/(4pi) - 1))   on 4pi/3 <= |w| <= 8pi/3
// with a transition window v satisfying v(x) + v(1-x) = 1, v = 0 left of 0,
// v = 1 right of 1.  The smooth-bump window gives a Schwartz-class wavelet;
// polynomial windows of contact order s give finite declared regularity s.
// Band-limitation makes the periodized wavelets exact on dyadic grids.
class Wavelet {
public:
    enum class Window { SmoothBump, Polynomial };

    static Wavelet meyer_smooth();
    static Wavelet meyer_polynomial(int order); // order in [1, 4]

    double window_value(double x) const; // v(x)
    double magnitude(double omega) const; // |psi_hat(omega)|
    std::complex<double> fourier(double omega) const;

    // Usable exponent range: +inf for the smooth window, the contact order
    // for polynomial windows.
    double declared_regularity() const;

    // sup_y sum_k |psi(y - k)|, evaluated numerically once (used for the
    // truncation tail bound of synthesized paths).
    double overlap_sup() const;

    std::string describe() const;

private:
    Window window_ = Window::SmoothBump;
    int poly_order_ = 4;
    mutable double overlap_cache_ = -1.0;
};

} // namespace rws::synth

#endif
