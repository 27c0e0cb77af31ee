#include "rws/synth.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <unsupported/Eigen/FFT>

#include "rws/errors.hpp"

namespace rws::synth {

namespace {
constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;
} // namespace

CoefficientField::CoefficientField(int J, double h_low, double h_high,
                                   std::vector<std::vector<std::uint64_t>> large_bits,
                                   double integration_order)
    : J_(J),
      h_low_(h_low),
      h_high_(h_high),
      order_(integration_order),
      large_bits_(std::move(large_bits)) {
    if (!(h_low_ > 0.0 && h_low_ < h_high_))
        throw ConfigError("exponents must satisfy 0 < h_low < h_high");
    if (order_ < 0.0) throw DomainError("integration order must be nonnegative");
    if (static_cast<int>(large_bits_.size()) != J_ + 1)
        throw ConfigError("coefficient field needs one bit level per tree level");
}

double CoefficientField::large_value(int j) const {
    return std::exp2(-h_low() * static_cast<double>(j));
}

double CoefficientField::small_value(int j) const {
    if (j == 0) return 1.0;
    if (std::isinf(h_high_)) return 0.0;
    return std::exp2(-h_high() * static_cast<double>(j));
}

double CoefficientField::value(int j, std::uint64_t k) const {
    return is_large(j, k) ? large_value(j) : small_value(j);
}

Eigen::ArrayXd CoefficientField::level_values(int j) const {
    const std::uint64_t n = 1ull << j;
    const double lv = large_value(j);
    const double sv = small_value(j);
    Eigen::ArrayXd out(static_cast<Eigen::Index>(n));
    for (std::uint64_t k = 0; k < n; ++k)
        out[static_cast<Eigen::Index>(k)] = is_large(j, k) ? lv : sv;
    return out;
}

std::vector<std::uint64_t> CoefficientField::large_offsets(int j) const {
    std::vector<std::uint64_t> out;
    const auto& words = large_bits_[j];
    for (std::size_t w = 0; w < words.size(); ++w) {
        std::uint64_t bits = words[w];
        while (bits) {
            const int b = std::countr_zero(bits);
            out.push_back((static_cast<std::uint64_t>(w) << 6) | static_cast<unsigned>(b));
            bits &= bits - 1;
        }
    }
    return out;
}

std::uint64_t CoefficientField::large_count(int j) const {
    std::uint64_t n = 0;
    for (std::uint64_t w : large_bits_[j]) n += std::popcount(w);
    return n;
}

CoefficientField coefficients(const tree::TreeSample& tree, double h_low, double h_high) {
    if (!(h_low > 0.0 && h_low < h_high))
        throw ConfigError("exponents must satisfy 0 < h_low < h_high");
    std::vector<std::vector<std::uint64_t>> bits;
    bits.reserve(tree.max_level() + 1);
    for (int j = 0; j <= tree.max_level(); ++j) bits.push_back(tree.level_words(j));
    return CoefficientField(tree.max_level(), h_low, h_high, std::move(bits));
}

CoefficientField fractional_integrate(const CoefficientField& field, double t) {
    if (t < 0.0) throw DomainError("integration order must be nonnegative");
    // masks are copied verbatim; only the accumulated order moves
    return CoefficientField(field.max_level(), field.h_low_base(), field.h_high_base(),
                            field.bits(), field.integration_order() + t);
}

std::vector<Eigen::ArrayXd> fractional_integrate_arrays(const std::vector<Eigen::ArrayXd>& levels,
                                                        double t) {
    if (t < 0.0) throw DomainError("integration order must be nonnegative");
    std::vector<Eigen::ArrayXd> out;
    out.reserve(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j)
        out.push_back(levels[j] * std::exp2(-t * static_cast<double>(j)));
    return out;
}

SamplePath synthesize_arrays(const std::vector<Eigen::ArrayXd>& levels, const Wavelet& wavelet,
                             int grid_log2, int guard) {
    const int J = static_cast<int>(levels.size()) - 1;
    if (J < 0) throw RangeError("need at least one coefficient level");
    if (grid_log2 < J + guard)
        throw RangeError("grid exponent must be at least J + " + std::to_string(guard));

    const std::size_t N = 1ull << grid_log2;
    std::vector<cplx> spectrum(N, cplx{0.0, 0.0});
    Eigen::FFT<double> fft;

    for (int j = 0; j <= J; ++j) {
        const std::size_t nj = 1ull << j;
        const Eigen::ArrayXd& vals = levels[j];
        std::vector<cplx> in(nj), dft(nj);
        for (std::size_t k = 0; k < nj; ++k) in[k] = cplx{vals[static_cast<Eigen::Index>(k)], 0.0};
        if (nj == 1) {
            dft[0] = in[0];
        } else {
            fft.fwd(dft, in);
        }
        // band of the level-j periodized wavelet: nj/3 <= |xi| <= 4 nj/3
        const long long xi_lo = static_cast<long long>(std::floor(nj / 3.0));
        const long long xi_hi = static_cast<long long>(std::ceil(4.0 * nj / 3.0));
        for (long long xi_abs = std::max(1ll, xi_lo); xi_abs <= xi_hi; ++xi_abs) {
            for (int sign = 0; sign < 2; ++sign) {
                const long long xi = sign ? -xi_abs : xi_abs;
                const double omega = 2.0 * kPi * static_cast<double>(xi) / static_cast<double>(nj);
                const cplx psi = wavelet.fourier(omega);
                if (psi == cplx{0.0, 0.0}) continue;
                const std::size_t r = static_cast<std::size_t>(((xi % static_cast<long long>(nj)) +
                                                                static_cast<long long>(nj)) %
                                                               static_cast<long long>(nj));
                const std::size_t bin = static_cast<std::size_t>(
                    ((xi % static_cast<long long>(N)) + static_cast<long long>(N)) %
                    static_cast<long long>(N));
                spectrum[bin] += psi * dft[r] / static_cast<double>(nj);
            }
        }
    }

    std::vector<cplx> values_c(N);
    fft.inv(values_c, spectrum);
    SamplePath path;
    path.values.resize(static_cast<Eigen::Index>(N));
    for (std::size_t n = 0; n < N; ++n)
        path.values[static_cast<Eigen::Index>(n)] = values_c[n].real() * static_cast<double>(N);
    path.grid_log2 = grid_log2;
    path.J = J;
    path.wavelet = wavelet.describe();
    return path;
}

SamplePath synthesize(const CoefficientField& field, const Wavelet& wavelet, int grid_log2,
                      const SynthOptions& options) {
    const int J = field.max_level();
    const double gate = std::isinf(field.h_high())
                            ? (options.regularity_probe > 0.0 ? options.regularity_probe
                                                              : 8.0 * field.h_low())
                            : field.h_high();
    if (!(wavelet.declared_regularity() > gate))
        throw ConfigError("wavelet regularity " + std::to_string(wavelet.declared_regularity()) +
                          " does not exceed the requested exponent range " +
                          std::to_string(gate));
    std::vector<Eigen::ArrayXd> levels;
    levels.reserve(J + 1);
    for (int j = 0; j <= J; ++j) levels.push_back(field.level_values(j));
    SamplePath path = synthesize_arrays(levels, wavelet, grid_log2, options.guard);
    const double hl = field.h_low();
    path.tail_bound = wavelet.overlap_sup() * std::exp2(-hl * (J + 1)) / (1.0 - std::exp2(-hl));
    return path;
}

std::vector<Eigen::ArrayXd> analyze(const Eigen::ArrayXd& values, const Wavelet& wavelet,
                                    int J) {
    const std::size_t N = static_cast<std::size_t>(values.size());
    if (N == 0 || (N & (N - 1)) != 0)
        throw RangeError("path length must be a power of two");
    if (N < (1ull << (J + 2)))
        throw RangeError("path resolution too low for the requested depth");

    Eigen::FFT<double> fft;
    std::vector<cplx> in(N), cs(N);
    for (std::size_t n = 0; n < N; ++n) in[n] = cplx{values[static_cast<Eigen::Index>(n)], 0.0};
    fft.fwd(cs, in);
    for (auto& c : cs) c /= static_cast<double>(N); // Fourier coefficients

    std::vector<Eigen::ArrayXd> out;
    out.reserve(J + 1);
    for (int j = 0; j <= J; ++j) {
        const std::size_t nj = 1ull << j;
        std::vector<cplx> folded(nj, cplx{0.0, 0.0});
        const long long xi_lo = static_cast<long long>(std::floor(nj / 3.0));
        const long long xi_hi = static_cast<long long>(std::ceil(4.0 * nj / 3.0));
        for (long long xi_abs = std::max(1ll, xi_lo); xi_abs <= xi_hi; ++xi_abs) {
            for (int sign = 0; sign < 2; ++sign) {
                const long long xi = sign ? -xi_abs : xi_abs;
                const double omega = 2.0 * kPi * static_cast<double>(xi) / static_cast<double>(nj);
                const cplx psi = wavelet.fourier(omega);
                if (psi == cplx{0.0, 0.0}) continue;
                const std::size_t r = static_cast<std::size_t>(((xi % static_cast<long long>(nj)) +
                                                                static_cast<long long>(nj)) %
                                                               static_cast<long long>(nj));
                const std::size_t bin = static_cast<std::size_t>(
                    ((xi % static_cast<long long>(N)) + static_cast<long long>(N)) %
                    static_cast<long long>(N));
                folded[r] += cs[bin] * std::conj(psi) / static_cast<double>(nj);
            }
        }
        std::vector<cplx> ip(nj);
        if (nj == 1) {
            ip[0] = folded[0];
        } else {
            fft.inv(ip, folded);
        }
        // inv carries 1/nj; <R, Psi> = nj * inv, and c = 2^j <R, Psi>
        Eigen::ArrayXd level(static_cast<Eigen::Index>(nj));
        const double scale = static_cast<double>(nj) * static_cast<double>(nj);
        for (std::size_t k = 0; k < nj; ++k)
            level[static_cast<Eigen::Index>(k)] = ip[k].real() * scale;
        out.push_back(std::move(level));
    }
    return out;
}

} // namespace rws::synth
