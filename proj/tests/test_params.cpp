#include <doctest.h>

#include <cmath>
#include <random>

#include "rws/errors.hpp"
#include "rws/params.hpp"

using namespace rws;
namespace pr = rws::params;

namespace {

// Cesaro-average oracle for theta, written independently of params::theta.
double theta_cesaro_oracle(const KernelSchedule& s, int J) {
    int ju = 0;
    for (int j = 0; j <= J; ++j)
        if (s.gamma(j) == 0.0) ju = j + 1;
    double cum = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int j = ju; j <= J; ++j) {
        cum += std::log(s.gamma(j)) / std::log(2.0);
        if (j >= J / 2) best = std::min(best, cum / j);
    }
    return best;
}

// Truncated-sum oracle for varsigma.
double varsigma_oracle(const KernelSchedule& s, int j, int terms) {
    double sum = 0.0;
    double prod = 1.0;
    for (int n = j; n < j + terms; ++n) {
        prod *= s.gamma(n);
        sum += 2.0 * s.kernel_at(n, 1).mass_both_one() / (s.gamma(n) * prod);
    }
    return sum;
}

} // namespace

TEST_CASE("gamma: expansion of the propagation parameter") {
    auto s = KernelSchedule::constant(0.7, 0.0);
    CHECK(pr::gamma(s, 0) == doctest::Approx(1.4).epsilon(1e-15));
    auto delta11 = KernelSchedule::table({PairDistribution::point_mass(1, 1)},
                                         {PairDistribution::point_mass(0, 0)});
    CHECK(pr::gamma(delta11, 9) == 2.0);
    auto r4 = sparse_badic_schedule(0.3, 2);
    CHECK(pr::gamma(r4, 0) == doctest::Approx(2.0 * std::exp2(-0.3)).epsilon(1e-12));
}

TEST_CASE("eta: expansion of the appearance parameter") {
    auto s = KernelSchedule::constant(0.0, 0.4);
    CHECK(pr::eta(s, 2) == doctest::Approx(2 * 0.4 - 0.16).epsilon(1e-15));
    auto s0 = KernelSchedule::constant(0.3, 0.0);
    CHECK(pr::eta(s0, 2) == 0.0);
    auto s1 = KernelSchedule::constant(0.3, 1.0);
    CHECK(pr::eta(s1, 2) == 1.0);
}

TEST_CASE("theta: closed forms and finite-depth oracle") {
    auto s = KernelSchedule::constant(0.7, 0.0);
    const auto th = pr::theta(s, 64);
    CHECK(th.exact);
    CHECK(th.value == doctest::Approx(std::log2(1.4)).epsilon(1e-12));
    // O(1/J) agreement with the Cesaro oracle
    CHECK(std::fabs(th.value - theta_cesaro_oracle(s, 64)) < 2.0 / 64);

    auto r4 = sparse_badic_schedule(0.3, 2);
    const auto th4 = pr::theta(r4, 64);
    CHECK(th4.exact);
    CHECK(th4.value == doctest::Approx(0.7).epsilon(1e-12));

    auto dead = KernelSchedule::constant(0.0, 0.0);
    const auto thd = pr::theta(dead, 32);
    CHECK(thd.value == -pr::kInf);
}

TEST_CASE("j_under detects the stabilization level") {
    auto alive = KernelSchedule::constant(0.5, 0.0);
    auto ju = pr::j_under(alive, 32);
    CHECK(!ju.infinite);
    CHECK(ju.value == 0);
    CHECK(ju.exact);

    // first two levels dead, then constant positive
    std::vector<PairDistribution> rows1{PairDistribution::point_mass(0, 0),
                                        PairDistribution::point_mass(0, 0),
                                        PairDistribution::product_bernoulli(0.6)};
    auto t = KernelSchedule::table(rows1, {PairDistribution::point_mass(0, 0)});
    ju = pr::j_under(t, 32);
    CHECK(ju.value == 2);
    CHECK(ju.exact);

    auto dead = KernelSchedule::constant(0.0, 0.0);
    CHECK(pr::j_under(dead, 32).infinite);
}

TEST_CASE("varsigma: geometric closed form and divergence certificate") {
    auto s = KernelSchedule::constant(0.7, 0.0);
    const auto v = pr::varsigma(s, 3, 1e-10);
    CHECK(v.exact);
    CHECK(v.value == doctest::Approx(0.7 / 0.4).epsilon(1e-12));
    CHECK(std::fabs(v.value - varsigma_oracle(s, 3, 200)) < 1e-10);

    auto crit = KernelSchedule::constant(0.5, 0.0);
    const auto vc = pr::varsigma(crit, 0, 1e-10);
    CHECK(vc.divergent);
    CHECK(vc.value == pr::kInf);

    // nu_{1,n} uniform on {(1,0),(0,1)}: zero numerators
    std::vector<PairDistribution> rows1{PairDistribution{0.0, 0.5, 0.5, 0.0}};
    auto zero_num = KernelSchedule::table(rows1, {PairDistribution::point_mass(0, 0)});
    const auto vz = pr::varsigma(zero_num, 0, 1e-10);
    CHECK(vz.exact);
    CHECK(vz.value == 0.0);
}

TEST_CASE("varsigma rejects vanishing gamma in the tail") {
    auto dead = KernelSchedule::constant(0.0, 0.0);
    CHECK_THROWS_AS(pr::varsigma(dead, 0, 1e-10), DomainError);
}

TEST_CASE("h_tilde closed forms") {
    // eta constant > 0 -> h_tilde = h_low
    auto s = KernelSchedule::constant(0.3, 0.25);
    auto ht = pr::h_tilde(s, 1.0, 64);
    CHECK(ht.kind == pr::HTilde::Kind::Exact);
    CHECK(ht.lo == doctest::Approx(1.0));

    // eta_j = 2^{-j/2} exactly, h_low = 1 -> h_tilde = 2
    SequenceSpec etaspec{SequenceSpec::Kind::EtaGeometric, 1.0, 0.5};
    SequenceSpec pspec{SequenceSpec::Kind::Constant, 0.3, 0.0};
    auto g = KernelSchedule::product_bernoulli(pspec, etaspec);
    ht = pr::h_tilde(g, 1.0, 64);
    CHECK(ht.kind == pr::HTilde::Kind::Exact);
    CHECK(ht.lo == doctest::Approx(2.0).epsilon(1e-12));

    // rate >= 1 -> infinite
    SequenceSpec eta1{SequenceSpec::Kind::EtaGeometric, 1.0, 1.0};
    auto g1 = KernelSchedule::product_bernoulli(pspec, eta1);
    ht = pr::h_tilde(g1, 1.0, 64);
    CHECK(ht.kind == pr::HTilde::Kind::Exact);
    CHECK(std::isinf(ht.lo));

    // sparse-badic: lower bound h_low / (a (1 - 1/b))
    auto r4 = sparse_badic_schedule(0.3, 2);
    ht = pr::h_tilde(r4, 1.0, 64);
    CHECK(ht.kind == pr::HTilde::Kind::LowerBoundOnly);
    CHECK(ht.lo == doctest::Approx(1.0 / (0.3 * 0.5)).epsilon(1e-12));
}

TEST_CASE("h_tilde via divergence criterion on truncated sums (oracle)") {
    // independent check: partial sums of 2^{(1-h_low/h) j} eta_j at depth 400
    SequenceSpec etaspec{SequenceSpec::Kind::EtaGeometric, 1.0, 0.5};
    SequenceSpec pspec{SequenceSpec::Kind::Constant, 0.3, 0.0};
    auto g = KernelSchedule::product_bernoulli(pspec, etaspec);
    auto grows = [&](double h) {
        double first = 0.0, second = 0.0;
        for (int j = 200; j < 400; ++j) {
            const double t = std::exp2((1.0 - 1.0 / h) * j) * g.eta(j);
            (j < 300 ? first : second) += t;
        }
        return second > first;
    };
    CHECK(grows(2.2));
    CHECK(!grows(1.8));
}

TEST_CASE("phi0: exact recursion against closed expansions") {
    auto s = KernelSchedule::constant(0.7, 0.0, 1.0);
    CHECK(pr::phi0(s, 0) == 0.0); // root in state 1
    CHECK(pr::phi0(s, 1) == doctest::Approx(0.09).epsilon(1e-14));
    const double p = 0.7;
    const double expect2 = std::pow((1 - p) + p * (1 - p) * (1 - p), 2.0);
    CHECK(pr::phi0(s, 2) == doctest::Approx(expect2).epsilon(1e-14));
}

TEST_CASE("phi0: brute-force enumeration oracle at depth 3") {
    // exhaustive sum over all state assignments of the 14 non-root vertices
    std::mt19937_64 gen(12345);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        const double p = unif(gen);
        const double q = 0.3 * unif(gen);
        const double pi = unif(gen);
        auto s = KernelSchedule::constant(p, q, pi);
        double phi3 = 0.0;
        for (int root = 0; root <= 1; ++root) {
            const double proot = root ? pi : 1.0 - pi;
            for (int bits = 0; bits < (1 << 14); ++bits) {
                // vertex states: levels 1(2), 2(4), 3(8) packed in `bits`
                int st[4][8] = {};
                st[0][0] = root;
                for (int i = 0; i < 2; ++i) st[1][i] = (bits >> i) & 1;
                for (int i = 0; i < 4; ++i) st[2][i] = (bits >> (2 + i)) & 1;
                for (int i = 0; i < 8; ++i) st[3][i] = (bits >> (6 + i)) & 1;
                bool any_level3 = false;
                for (int i = 0; i < 8; ++i) any_level3 |= st[3][i] == 1;
                if (any_level3) continue;
                double prob = proot;
                for (int lvl = 0; lvl < 3; ++lvl) {
                    for (int k = 0; k < (1 << lvl); ++k) {
                        const auto d = s.kernel_at(lvl, st[lvl][k]);
                        const int c0 = st[lvl + 1][2 * k], c1 = st[lvl + 1][2 * k + 1];
                        const double m = c0 ? (c1 ? d.p11 : d.p10) : (c1 ? d.p01 : d.p00);
                        prob *= m;
                    }
                }
                phi3 += prob;
            }
        }
        CHECK(pr::phi0(s, 3) == doctest::Approx(phi3).epsilon(1e-12));
    }
}

TEST_CASE("phi_gf: normalization and monotonicity") {
    auto s = KernelSchedule::constant(0.7, 0.05, 0.8);
    CHECK(pr::phi_gf(s, 5, 1.0) == 1.0);
    CHECK(pr::phi_gf(s, 5, 0.0) == doctest::Approx(pr::phi0(s, 5)).epsilon(1e-15));
    CHECK(pr::phi_gf(s, 1, 0.5) == doctest::Approx(0.8 * std::pow(1 - 0.7 + 0.7 * 0.5, 2) +
                                                   0.2 * std::pow(1 - 0.05 + 0.05 * 0.5, 2))
                                       .epsilon(1e-14));
    double prev = -1.0;
    for (double z = 0.0; z <= 1.0; z += 0.125) {
        const double v = pr::phi_gf(s, 6, z);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("regime classification") {
    auto thm1 = KernelSchedule::constant(0.7, 0.0);
    CHECK(pr::classify_regime(thm1, 32).regime == pr::Regime::SparseAppearance);
    auto thm2 = KernelSchedule::constant(0.7, 0.2);
    auto rep = pr::classify_regime(thm2, 32);
    CHECK(rep.regime == pr::Regime::DenseAppearance);
    auto oos = KernelSchedule::constant(1.0, 0.0);
    CHECK(pr::classify_regime(oos, 32).regime == pr::Regime::OutOfScope);
}

TEST_CASE("validate_schedule flags bad rows and reports hypotheses") {
    auto ok = KernelSchedule::constant(0.7, 0.0);
    auto rep = pr::validate_schedule(ok, 16);
    CHECK(rep.rows_valid);
    CHECK(rep.theta_lt_one);
    CHECK(rep.eta_class == pr::SeriesClass::Convergent);

    std::vector<PairDistribution> bad{PairDistribution{0.5, 0.25, 0.2, 0.04}};
    auto t = KernelSchedule::table(bad, {PairDistribution::point_mass(0, 0)});
    rep = pr::validate_schedule(t, 4);
    CHECK(!rep.rows_valid);
    CHECK(rep.row_issues.size() > 0);

    auto r4 = sparse_badic_schedule(0.3, 2);
    rep = pr::validate_schedule(r4, 64);
    CHECK(rep.rows_valid);
    CHECK(rep.theta.value == doctest::Approx(0.7));
    CHECK(rep.theta_lt_one);
}

TEST_CASE("derive assembles a consistent parameter set") {
    auto s = KernelSchedule::constant(0.7, 0.0, 1.0);
    auto d = pr::derive(s, 20, 0.5, 3.0);
    CHECK(d.gamma_seq[7] == doctest::Approx(1.4));
    CHECK(d.eta_seq[7] == 0.0);
    CHECK(d.phi0_seq[0] == 0.0);
    CHECK(d.theta.value == doctest::Approx(std::log2(1.4)));
    CHECK(d.regime.regime == pr::Regime::SparseAppearance);
    for (double g : d.gamma_seq) {
        CHECK(g >= 0.0);
        CHECK(g <= 2.0);
    }
    for (double e : d.eta_seq) {
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
    }
}
