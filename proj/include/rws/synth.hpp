#ifndef RWS_SYNTH_HPP
#define RWS_SYNTH_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "rws/tree.hpp"
#include "rws/wavelet.hpp"

namespace rws::synth {

// Two-valued wavelet coefficients driven by a tree sample: the state-1
// vertices carry 2^(-h_low j), the rest 2^(-h_high j) (0 when h_high is
// infinite and j >= 1; level 0 keeps 2^0 = 1).  The large/small split is
// stored as bit masks so the values stay exact under fractional integration.
class CoefficientField {
public:
    CoefficientField(int J, double h_low, double h_high,
                     std::vector<std::vector<std::uint64_t>> large_bits,
                     double integration_order = 0.0);

    int max_level() const { return J_; }
    // base exponents shifted by the accumulated integration order; keeping
    // the order separate makes repeated integration associativity-exact
    double h_low() const { return h_low_ + order_; }
    double h_high() const { return h_high_ + order_; }
    double h_low_base() const { return h_low_; }
    double h_high_base() const { return h_high_; }
    double integration_order() const { return order_; }

    bool is_large(int j, std::uint64_t k) const {
        return (large_bits_[j][k >> 6] >> (k & 63)) & 1u;
    }
    double value(int j, std::uint64_t k) const;
    double large_value(int j) const;
    double small_value(int j) const;

    Eigen::ArrayXd level_values(int j) const;
    std::vector<std::uint64_t> large_offsets(int j) const;
    std::uint64_t large_count(int j) const;
    const std::vector<std::vector<std::uint64_t>>& bits() const { return large_bits_; }

private:
    int J_;
    double h_low_;
    double h_high_;
    double order_;
    std::vector<std::vector<std::uint64_t>> large_bits_;
};

// C_lambda from a realized tree: large iff the vertex is in state 1.
CoefficientField coefficients(const tree::TreeSample& tree, double h_low, double h_high);

// Order-t fractional integration in the wavelet domain: exponents shift to
// (h_low + t, h_high + t); exact on the two-valued representation.
CoefficientField fractional_integrate(const CoefficientField& field, double t);

// Generic per-level 2^(-t j) scaling for plain coefficient arrays.
std::vector<Eigen::ArrayXd> fractional_integrate_arrays(const std::vector<Eigen::ArrayXd>& levels,
                                                        double t);

struct SamplePath {
    Eigen::ArrayXd values; // R(k/N) for k = 0..N-1
    int grid_log2 = 0;
    int J = 0;
    double tail_bound = 0.0; // sup-norm bound on the truncated tail sum_{j>J}
    std::string wavelet;
};

struct SynthOptions {
    int guard = 4;                  // require grid_log2 >= J + guard
    double regularity_probe = 0.0;  // exponent to gate against when h_high = inf
                                    // (0 means 8 * h_low)
};

// Evaluates the truncated series on the grid by per-level circular
// convolution in the frequency domain; exact for band-limited wavelets.
SamplePath synthesize(const CoefficientField& field, const Wavelet& wavelet, int grid_log2,
                      const SynthOptions& options = {});

// Same evaluation for plain per-level coefficient arrays (no regularity gate,
// no tail bound).
SamplePath synthesize_arrays(const std::vector<Eigen::ArrayXd>& levels, const Wavelet& wavelet,
                             int grid_log2, int guard = 4);

// c_lambda = 2^{<lambda>} <R, Psi_lambda> for all levels j <= J, by
// frequency-domain inner products.  Requires values.size() >= 2^(J + 2).
std::vector<Eigen::ArrayXd> analyze(const Eigen::ArrayXd& values, const Wavelet& wavelet,
                                    int J);

} // namespace rws::synth

#endif
