#include <doctest.h>

#include <cmath>

#include "rws/errors.hpp"
#include "rws/rng.hpp"
#include "rws/tree.hpp"

using namespace rws;
using namespace rws::tree;

namespace {

KernelSchedule all_ones() {
    return KernelSchedule::table({PairDistribution::point_mass(1, 1)},
                                 {PairDistribution::point_mass(0, 0)}, 1.0);
}

} // namespace

TEST_CASE("deterministic propagation: delta_(1,1) kernels fill every level") {
    auto t = sample_tree(all_ones(), 10, 7);
    for (int j = 0; j <= 10; ++j) CHECK(t.count_ones(j) == (1ull << j));
}

TEST_CASE("absorbing zero: q = 0 with root in state 0") {
    auto s = KernelSchedule::constant(0.7, 0.0, 0.0);
    auto t = sample_tree(s, 10, 7);
    for (int j = 0; j <= 10; ++j) CHECK(t.count_ones(j) == 0);
}

TEST_CASE("reproducibility: identical inputs give identical bits") {
    auto s = KernelSchedule::constant(0.6, 0.1, 0.8);
    auto a = sample_tree(s, 12, 42);
    auto b = sample_tree(s, 12, 42);
    for (int j = 0; j <= 12; ++j) CHECK(a.level_words(j) == b.level_words(j));
    auto c = sample_tree(s, 12, 43);
    bool differs = false;
    for (int j = 0; j <= 12 && !differs; ++j) differs = a.level_words(j) != c.level_words(j);
    CHECK(differs);
}

TEST_CASE("markov locality: changing deep kernels leaves shallow levels intact") {
    // same rows up to level 6, different from level 7 on
    std::vector<PairDistribution> rows1a, rows1b;
    for (int j = 0; j <= 6; ++j) {
        rows1a.push_back(PairDistribution::product_bernoulli(0.7));
        rows1b.push_back(PairDistribution::product_bernoulli(0.7));
    }
    rows1a.push_back(PairDistribution::product_bernoulli(0.7));
    rows1b.push_back(PairDistribution::product_bernoulli(0.2));
    auto rows0 = std::vector<PairDistribution>{PairDistribution::product_bernoulli(0.1)};
    auto sa = KernelSchedule::table(rows1a, rows0, 1.0);
    auto sb = KernelSchedule::table(rows1b, rows0, 1.0);
    auto a = sample_tree(sa, 12, 99);
    auto b = sample_tree(sb, 12, 99);
    // kernels at levels <= 6 agree, so tree levels <= 7 agree
    for (int j = 0; j <= 7; ++j) CHECK(a.level_words(j) == b.level_words(j));
    bool differs = false;
    for (int j = 8; j <= 12 && !differs; ++j) differs = a.level_words(j) != b.level_words(j);
    CHECK(differs);
}

TEST_CASE("fresh vertices form a subset of the ones") {
    auto s = KernelSchedule::constant(0.5, 0.2, 0.5);
    auto t = sample_tree(s, 12, 5);
    for (int j = 1; j <= 12; ++j) {
        auto fresh = fresh_ones(t, j);
        for (std::uint64_t k : fresh) {
            CHECK(t.get(j, k));
            CHECK(!t.get(j - 1, k >> 1));
        }
    }
}

TEST_CASE("fresh vertices vanish when q = 0 or the tree is full") {
    auto s = KernelSchedule::constant(0.7, 0.0, 1.0);
    auto t = sample_tree(s, 10, 3);
    for (int j = 1; j <= 10; ++j) CHECK(fresh_ones(t, j).empty());
    auto full = sample_tree(all_ones(), 10, 3);
    for (int j = 1; j <= 10; ++j) CHECK(fresh_ones(full, j).empty());
}

TEST_CASE("galton-watson mean population at level 5") {
    auto s = KernelSchedule::constant(0.7, 0.0, 1.0);
    const int trials = 10000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < trials; ++i) {
        auto t = sample_tree(s, 5, derive_seed(1234, i));
        const double n = static_cast<double>(t.count_ones(5));
        sum += n;
        sumsq += n * n;
    }
    const double mean = sum / trials;
    const double var = sumsq / trials - mean * mean;
    const double se = std::sqrt(var / trials);
    const double expect = std::pow(1.4, 5);
    CHECK(std::fabs(mean - expect) < 3.0 * se + 1e-9);
}

TEST_CASE("fresh-vertex mean matches the one-step expansion") {
    // p = 0, q = 0.5, root 0: E[#S~_1] = 2q = 1; E[#S~_3] = 8 * P(parent 0) * q
    auto s = KernelSchedule::constant(0.0, 0.5, 0.0);
    const int trials = 4000;
    double s1 = 0.0, s3 = 0.0;
    for (int i = 0; i < trials; ++i) {
        auto t = sample_tree(s, 3, derive_seed(777, i));
        s1 += static_cast<double>(fresh_ones(t, 1).size());
        s3 += static_cast<double>(fresh_ones(t, 3).size());
    }
    const double m1 = s1 / trials;
    const double m3 = s3 / trials;
    CHECK(std::fabs(m1 - 1.0) < 0.08);
    // P(level-2 vertex is 0) = 0.75 under p = 0: E = 8 * 0.75 * 0.5 = 3
    CHECK(std::fabs(m3 - 3.0) < 0.15);
    // the coarse bound 2^j eta_{j-1}
    CHECK(m3 <= 8 * s.eta(2) + 0.15);
}

TEST_CASE("theta cover on full and empty trees") {
    auto full = sample_tree(all_ones(), 8, 1);
    auto cover = theta_cover(full);
    CHECK(cover.offsets.size() == 256);
    for (auto r : cover.run_length) CHECK(r == 9);

    auto s = KernelSchedule::constant(0.7, 0.0, 0.0);
    auto dead = sample_tree(s, 8, 1);
    CHECK(theta_cover(dead).offsets.empty());
}

TEST_CASE("dyadic cover counts collapse offsets per level") {
    std::vector<std::uint64_t> offsets{0, 1, 2, 255};
    auto counts = dyadic_cover_counts(offsets, 8);
    CHECK(counts[8] == 4);
    CHECK(counts[7] == 3); // {0,1}, {2}, {255}
    CHECK(counts[0] == 1);
}

TEST_CASE("subtree reachability") {
    auto full = sample_tree(all_ones(), 10, 1);
    CHECK(subtree_reaches(full, {0, 0}, 10));
    CHECK(subtree_reaches(full, {5, 17}, 10));

    auto s = KernelSchedule::constant(0.7, 0.0, 0.0);
    auto dead = sample_tree(s, 10, 1);
    CHECK(!subtree_reaches(dead, {0, 0}, 10));
    CHECK_THROWS_AS(subtree_reaches(dead, {11, 0}, 10), RangeError);
}

TEST_CASE("depth cap guards memory") {
    auto s = KernelSchedule::constant(0.5, 0.0, 1.0);
    CHECK_THROWS_AS(sample_tree(s, 27, 1), ConfigError);
    CHECK_THROWS_AS(sample_tree(s, 15, 1, 14), ConfigError);
}

TEST_CASE("monotone extinction for q = 0") {
    auto s = KernelSchedule::constant(0.55, 0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        auto t = sample_tree(s, 12, derive_seed(31, i));
        bool seen_empty = false;
        for (int j = 0; j <= 12; ++j) {
            const bool empty = t.count_ones(j) == 0;
            if (seen_empty) CHECK(empty);
            seen_empty = seen_empty || empty;
        }
    }
}

TEST_CASE("extinction frequency tracks the generating-function iterate") {
    // survival to depth J vs the iterated offspring fixed point g(s)=((1-p)+ps)^2
    const double p = 0.7;
    auto s = KernelSchedule::constant(p, 0.0, 1.0);
    const int J = 14, trials = 4000;
    int empty = 0;
    for (int i = 0; i < trials; ++i) {
        auto t = sample_tree(s, J, derive_seed(4242, i));
        if (t.count_ones(J) == 0) ++empty;
    }
    double gs = 0.0;
    for (int it = 0; it < J; ++it) gs = std::pow(1.0 - p + p * gs, 2.0);
    const double phat = static_cast<double>(empty) / trials;
    const double se = std::sqrt(gs * (1.0 - gs) / trials);
    CHECK(std::fabs(phat - gs) < 3.5 * se + 1e-12);
}
