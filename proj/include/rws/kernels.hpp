#ifndef RWS_KERNELS_HPP
#define RWS_KERNELS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rws {

// Distribution of a child-state pair (child0, child1) in {0,1}^2.
struct PairDistribution {
    double p00 = 0.0;
    double p01 = 0.0; // (child0, child1) = (0, 1)
    double p10 = 0.0;
    double p11 = 0.0;

    double sum() const { return p00 + p01 + p10 + p11; }
    bool valid(double tol = 1e-12) const;

    double mass_both_one() const { return p11; }
    double mass_exactly_one() const { return p01 + p10; }
    double expected_ones() const { return 2.0 * p11 + p01 + p10; }
    double mass_none() const { return p00; }

    // Some outcome has probability exactly 1 (sampling is branchless).
    bool degenerate() const;

    // Each child independently 1 with probability `per_child`.
    static PairDistribution product_bernoulli(double per_child);
    static PairDistribution point_mass(int child0, int child1);

    // Maps u in [0,1) to an outcome index 0..3 encoding (child0<<1)|child1,
    // by cumulative probabilities in the order p00, p01, p10, p11.
    int sample(double u) const;
};

// Level-indexed scalar sequence used by the product-Bernoulli family.
struct SequenceSpec {
    enum class Kind {
        Constant,     // v_j = amplitude
        Geometric,    // v_j = amplitude * 2^(-rate*j)
        Power,        // v_j = amplitude * (j+1)^(-rate)
        EtaGeometric, // per-child prob solving 1-(1-q)^2 = min(1, amplitude*2^(-rate*j))
    };
    Kind kind = Kind::Constant;
    double amplitude = 0.0;
    double rate = 0.0;

    // Raw sequence value (for EtaGeometric this is the eta target).
    double value_at(int j) const;
    // Per-child Bernoulli success probability at level j, in [0,1].
    double bernoulli_at(int j) const;

    std::string describe() const;
};

struct ConstantFamily {
    double p = 0.0; // per-child success for a state-1 parent
    double q = 0.0; // per-child success for a state-0 parent
};

struct ProductBernoulliFamily {
    SequenceSpec p_seq;
    SequenceSpec q_seq;
};

// Explicit per-level rows; levels past the table repeat the last row.
struct TableFamily {
    std::vector<PairDistribution> rows1; // parent state 1, indexed by level
    std::vector<PairDistribution> rows0; // parent state 0
};

// The explicit two-parameter family with sparse appearance levels:
//   nu_{1,j} = Bernoulli(p_j)^x2 with p_0 = 2^-a,
//   p_j = 2^{-a (b^floor(log_b(j+1)) - b^floor(log_b j))} for j >= 1,
//   nu_{0,j} = Bernoulli(q_j)^x2 with q_{j_n - 1} nonzero only at
//   j_n = b^{n+1} - 1 for n past the first index where the admissible
//   bracket [2^{-(j_n-1)}, j_n^{-2} 2^{(a(1-1/b)-1) j_n}] is nonempty;
//   the value used is the geometric mean of the bracket endpoints.
struct SparseBadicFamily {
    double a = 0.0;
    int b = 2;
    int n0 = 0; // first n with a nonempty bracket; q is emitted for n > n0

    double p_at(int j) const;
    double q_at(int j) const;
    // log2 of the admissible bracket for q_{j_n - 1}; empty if lo > hi.
    static std::pair<double, double> bracket_log2(double a, int b, long long jn);
};

using KernelFamily =
    std::variant<ConstantFamily, ProductBernoulliFamily, TableFamily, SparseBadicFamily>;

// Immutable transition-kernel schedule of the tree-indexed Markov chain:
// resolves (nu_{0,j}, nu_{1,j}) for every level j >= 0, plus the root law.
class KernelSchedule {
public:
    KernelSchedule(KernelFamily family, double initial_law);

    static KernelSchedule constant(double p, double q, double initial_law = 1.0);
    static KernelSchedule product_bernoulli(SequenceSpec p_seq, SequenceSpec q_seq,
                                            double initial_law = 1.0);
    static KernelSchedule table(std::vector<PairDistribution> rows1,
                                std::vector<PairDistribution> rows0,
                                double initial_law = 1.0);
    static KernelSchedule sparse_badic(double a, int b, double initial_law = 1.0);

    // nu_{parent_state, j}
    PairDistribution kernel_at(int j, int parent_state) const;

    double initial_law() const { return initial_law_; }
    const KernelFamily& family() const { return family_; }

    double gamma(int j) const; // 2 nu_{1,j}({(1,1)}) + nu_{1,j}({(1,0),(0,1)})
    double eta(int j) const;   // 1 - nu_{0,j}({(0,0)})

    // Canonical text form; the fingerprint is a hash of it.
    std::string describe() const;
    std::array<std::uint8_t, 16> fingerprint() const;

private:
    KernelFamily family_;
    double initial_law_ = 1.0;
};

PairDistribution kernel_at(const KernelSchedule& schedule, int j, int parent_state);
KernelSchedule sparse_badic_schedule(double a, int b, double initial_law = 1.0);

} // namespace rws

#endif
