#include <doctest.h>

#include <cmath>

#include "rws/analysis.hpp"
#include "rws/errors.hpp"
#include "rws/params.hpp"
#include "rws/rng.hpp"

using namespace rws;
using namespace rws::analysis;
namespace tr = rws::tree;

namespace {

const double kInfD = std::numeric_limits<double>::infinity();

KernelSchedule all_ones() {
    return KernelSchedule::table({PairDistribution::point_mass(1, 1)},
                                 {PairDistribution::point_mass(0, 0)}, 1.0);
}

KernelSchedule dead_after_root() { return KernelSchedule::constant(0.0, 0.0, 1.0); }

} // namespace

TEST_CASE("holder estimate: full tree pins the lower exponent everywhere") {
    auto t = tr::sample_tree(all_ones(), 12, 1);
    auto field = synth::coefficients(t, 0.5, 3.0);
    // dyadic points sit on an anchor at every level: the ratio is exact
    for (double x : {0.0, 0.5, 0.25}) {
        CHECK(estimate_holder(field, x) == doctest::Approx(0.5).epsilon(1e-12));
    }
    // generic points: d <= 2^-j at every level, so the estimate lies within
    // the finite-depth envelope [h_low, h_low J/(J-1)]
    for (double x : {0.1234, 0.77, 0.999}) {
        const double v = estimate_holder(field, x);
        CHECK(v >= 0.5);
        CHECK(v <= 0.5 * 12.0 / 11.0 + 1e-12);
    }
}

TEST_CASE("holder estimate: empty one-set gives the upper exponent") {
    auto t = tr::sample_tree(dead_after_root(), 12, 1);
    auto field = synth::coefficients(t, 0.5, 3.0);
    Witness w;
    CHECK(estimate_holder(field, 0.3, {}, &w) == 3.0);
    CHECK(w.level == -1);
    // infinite h_high clamps at the probe ceiling instead
    auto inf_field = synth::coefficients(t, 0.5, kInfD);
    CHECK(estimate_holder(inf_field, 0.3) == doctest::Approx(4.0)); // 8 * h_low
    CHECK(estimate_holder(inf_field, 0.3, {.j_min = 0, .probe_ceiling = 2.5}) ==
          doctest::Approx(2.5));
    Witness wc;
    estimate_holder(inf_field, 0.3, {}, &wc);
    CHECK(wc.clamped);
}

TEST_CASE("holder field agrees with the pointwise estimator") {
    auto s = KernelSchedule::constant(0.6, 0.1, 1.0);
    auto t = tr::sample_tree(s, 10, 37);
    auto field = synth::coefficients(t, 0.5, 3.0);
    auto hf = estimate_holder_field(field, 12);
    const std::size_t N = 1ull << 12;
    for (std::size_t i = 0; i < N; i += 97) {
        const double x = static_cast<double>(i) / N;
        CHECK(hf.h[static_cast<Eigen::Index>(i)] ==
              doctest::Approx(estimate_holder(field, x)).epsilon(1e-12));
    }
}

TEST_CASE("holder estimate is monotone in the window") {
    auto s = KernelSchedule::constant(0.6, 0.1, 1.0);
    auto t = tr::sample_tree(s, 12, 5);
    auto field = synth::coefficients(t, 0.5, 3.0);
    for (double x : {0.21, 0.68}) {
        const double wide = estimate_holder(field, x, {.j_min = 3, .probe_ceiling = 0.0});
        const double narrow = estimate_holder(field, x, {.j_min = 6, .probe_ceiling = 0.0});
        CHECK(wide <= narrow + 1e-15);
    }
}

TEST_CASE("holder bounds: estimates live in [h_low, h_high_eff]") {
    auto s = KernelSchedule::constant(0.7, 0.05, 1.0);
    auto t = tr::sample_tree(s, 12, 11);
    auto field = synth::coefficients(t, 0.5, 3.0);
    auto hf = estimate_holder_field(field, 13);
    CHECK(hf.h.minCoeff() >= 0.5 - 1e-12);
    CHECK(hf.h.maxCoeff() <= 3.0 + 1e-12);
}

TEST_CASE("limsup membership on the full tree") {
    auto t = tr::sample_tree(all_ones(), 12, 1);
    auto idx = TreeIndex::build(t);
    for (double x : {0.05, 0.33, 0.91}) {
        auto f = limsup_membership(idx, x, 1.0, 0.5, 6, 12);
        CHECK(f.in_L);
        CHECK(!f.in_L_tilde); // no fresh vertices in a full tree
        CHECK(f.in_theta_path);
        CHECK(f.decomposition_consistent);
    }
}

TEST_CASE("limsup membership on the dead tree") {
    auto t = tr::sample_tree(dead_after_root(), 12, 1);
    auto idx = TreeIndex::build(t);
    auto f = limsup_membership(idx, 0.4, 1.0, 0.5, 6, 12);
    CHECK(!f.in_L);
    CHECK(!f.in_L_tilde);
    CHECK(!f.in_theta_path);
    CHECK(f.decomposition_consistent);
}

TEST_CASE("limsup membership is monotone in alpha") {
    auto s = KernelSchedule::constant(0.6, 0.1, 1.0);
    auto t = tr::sample_tree(s, 14, 23);
    auto idx = TreeIndex::build(t);
    for (double x : {0.11, 0.47, 0.83}) {
        bool prev = false;
        for (double alpha : {0.6, 0.8, 1.0, 1.5, 2.5, 4.0}) {
            auto f = limsup_membership(idx, x, alpha, 0.5, 7, 14);
            if (prev) CHECK(f.in_L);
            prev = f.in_L;
            CHECK(f.decomposition_consistent);
        }
    }
    CHECK_THROWS_AS(limsup_membership(idx, 0.5, 0.4, 0.5, 7, 14), DomainError);
}

TEST_CASE("full-torus covering above h_tilde") {
    // eta_j = 2^{-j/2}: h_tilde = 2 h_low; alpha > h_tilde covers the torus
    SequenceSpec etaspec{SequenceSpec::Kind::EtaGeometric, 1.0, 0.5};
    SequenceSpec pspec{SequenceSpec::Kind::Constant, 0.6, 0.0};
    auto s = KernelSchedule::product_bernoulli(pspec, etaspec, 1.0);
    auto t = tr::sample_tree(s, 18, 7);
    auto idx = TreeIndex::build(t);
    int in = 0;
    const int n = 512;
    for (int i = 0; i < n; ++i) {
        auto f = limsup_membership(idx, (i + 0.5) / n, 2.6, 1.0, 9, 18);
        in += f.in_L;
        CHECK(f.decomposition_consistent);
    }
    CHECK(in >= static_cast<int>(0.99 * n));
}

TEST_CASE("oscillation exponent equals the scaling ratio off the ceiling") {
    auto s = KernelSchedule::constant(0.6, 0.1, 1.0);
    auto t = tr::sample_tree(s, 14, 3);
    auto field = synth::coefficients(t, 0.5, 5.0);
    const std::vector<double> ts{0.0, 0.025, 0.05};
    int tested = 0;
    for (int i = 0; i < 200; ++i) {
        const double x = (i + 0.5) / 200.0;
        const double h = estimate_holder(field, x);
        if (h > 4.5) continue;
        auto b = estimate_beta(field, x, ts);
        REQUIRE(b.defined);
        CHECK(b.beta == doctest::Approx(h / 0.5 - 1.0).epsilon(1e-9));
        ++tested;
    }
    CHECK(tested > 50);
}

TEST_CASE("oscillation exponent matches integrate-then-estimate") {
    auto s = KernelSchedule::constant(0.6, 0.1, 1.0);
    auto t = tr::sample_tree(s, 12, 9);
    auto field = synth::coefficients(t, 0.5, 4.0);
    for (double x : {0.2, 0.55}) {
        for (double tv : {0.05, 0.12}) {
            auto integrated = synth::fractional_integrate(field, tv);
            const double direct = estimate_holder(integrated, x);
            const std::vector<double> ts{0.0, tv};
            auto b = estimate_beta(field, x, ts);
            REQUIRE(b.defined);
            const double from_slope = b.h_hat + (b.beta + 1.0) * tv;
            CHECK(direct == doctest::Approx(from_slope).epsilon(1e-9));
        }
    }
}

TEST_CASE("oscillation exponent on the dead tree with finite h_high") {
    auto t = tr::sample_tree(dead_after_root(), 12, 1);
    auto field = synth::coefficients(t, 0.5, 3.0);
    const std::vector<double> ts{0.0, 0.025, 0.05};
    auto b = estimate_beta(field, 0.37, ts);
    REQUIRE(b.defined);
    CHECK(b.h_hat == 3.0);
    CHECK(b.beta == doctest::Approx(0.0).epsilon(1e-12));
    // infinite h_high: the ceiling makes beta undefined
    auto inf_field = synth::coefficients(t, 0.5, kInfD);
    auto bu = estimate_beta(inf_field, 0.37, ts);
    CHECK(!bu.defined);
}

TEST_CASE("box dimension on exact self-similar covers") {
    for (double sdim : {0.0, 0.5, 1.0}) {
        std::map<int, long long> counts;
        // even levels keep 2^{s j} an exact integer for s = 1/2
        for (int j = 0; j <= 16; j += 2)
            counts[j] = static_cast<long long>(std::llround(std::exp2(sdim * j)));
        auto bd = box_dimension(counts);
        CHECK(std::fabs(bd.slope - sdim) < 1e-9);
        CHECK(bd.r2 >= 1.0 - 1e-12);
    }
}

TEST_CASE("box dimension edge cases") {
    std::map<int, long long> empty;
    for (int j = 0; j <= 8; ++j) empty[j] = 0;
    auto bd = box_dimension(empty);
    CHECK(bd.empty);
    CHECK(bd.slope == -kInfD);

    std::map<int, long long> thin{{0, 1}, {1, 2}, {2, 4}};
    CHECK_THROWS_AS(box_dimension(thin), DomainError);
}

TEST_CASE("iso-holder sets and their covers") {
    auto t = tr::sample_tree(all_ones(), 10, 1);
    auto field = synth::coefficients(t, 0.5, 3.0);
    auto hf = estimate_holder_field(field, 12);
    auto iso = iso_holder_sets(hf, 0.5, 0.05);
    // the full tree puts every point at h_low
    long long members = 0;
    for (auto b : iso.in_E) members += b;
    CHECK(members == (1 << 12));
    CHECK(iso.counts_E[0] == 1);
    CHECK(iso.counts_E[5] == 32);
    auto bd = box_dimension(iso.counts_E);
    CHECK(bd.slope == doctest::Approx(1.0));

    auto below = iso_holder_sets(hf, 0.2, 0.05); // below h_low - eps: empty
    long long none = 0;
    for (auto b : below.in_E) none += b;
    CHECK(none == 0);
    CHECK_THROWS_AS(iso_holder_sets(hf, 0.5, 0.0), DomainError);
}

TEST_CASE("locality check on a full-torus field") {
    auto t = tr::sample_tree(all_ones(), 10, 1);
    auto field = synth::coefficients(t, 0.5, 3.0);
    auto hf = estimate_holder_field(field, 12);
    auto loc = locality_check(hf, 0.5, 0.05, 4);
    CHECK(loc.arcs_excluded == 0);
    for (double sl : loc.arc_slopes) CHECK(sl == doctest::Approx(1.0));
    CHECK(loc.spread == doctest::Approx(0.0));
}

TEST_CASE("locality check excludes empty arcs") {
    HolderField hf;
    hf.grid_log2 = 10;
    hf.j_min = 5;
    hf.J = 10;
    hf.h_low = 0.5;
    hf.h_high_eff = 3.0;
    hf.h = Eigen::ArrayXd::Constant(1 << 10, 3.0);
    hf.h[17] = 0.5;
    hf.witness.assign(1 << 10, Witness{});
    auto loc = locality_check(hf, 0.5, 0.05, 4);
    // the single point keeps its own arc (count 1 at every level, slope 0);
    // the three empty arcs are excluded
    CHECK(loc.arcs_excluded == 3);
    CHECK(loc.arc_slopes[0] == doctest::Approx(0.0));
}

TEST_CASE("construct_point aborts without fresh vertices") {
    auto s = KernelSchedule::constant(0.7, 0.0, 1.0); // q = 0: no appearance
    auto t = tr::sample_tree(s, 14, 3);
    auto pc = construct_point(t, s, 1.0, 2.0, std::log2(1.4), {});
    CHECK(pc.status == PointConstruction::Status::FreshExhaustion);
    CHECK(pc.steps.empty());
}

TEST_CASE("construct_point: nested intervals with the prescribed exponent") {
    // eta_j = 0.4 * 2^{-j} (h_tilde = inf), subcritical propagation
    SequenceSpec etaspec{SequenceSpec::Kind::EtaGeometric, 0.4, 1.0};
    SequenceSpec pspec{SequenceSpec::Kind::Constant, 0.4, 0.0};
    auto s = KernelSchedule::product_bernoulli(pspec, etaspec, 1.0);
    const int J = 18;
    const double h = 2.0, h_low = 1.0;
    const double theta = std::log2(0.8);

    int successes = 0, accurate = 0, trials = 0;
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
        auto t = tr::sample_tree(s, J, derive_seed(5150, seed));
        ConstructOptions opts;
        opts.j0_floor = (J + 1) / 2;
        auto pc = construct_point(t, s, h_low, h, theta, opts);
        ++trials;
        if (pc.status != PointConstruction::Status::Success) continue;
        ++successes;
        CHECK(pc.levels_processed == J);
        REQUIRE(!pc.steps.empty());
        // nesting and diameter bound
        for (std::size_t i = 0; i < pc.steps.size(); ++i) {
            const auto& st = pc.steps[i];
            CHECK(st.length <= st.rho * std::exp2(-h_low * st.level / h) + 1e-15);
            if (i > 0) {
                const auto& prev = pc.steps[i - 1];
                CHECK(st.length < prev.length);
                double rel = st.lo - prev.lo;
                rel -= std::floor(rel);
                CHECK(rel + st.length <= prev.length + 1e-12);
            }
        }
        // the midpoint avoids every examined appearance ball
        auto idx = TreeIndex::build(t);
        bool avoided = true;
        for (int j = pc.j0; j <= J; ++j) {
            const double r = std::exp2(-h_low * j / h);
            for (std::uint64_t k : idx.fresh[j]) {
                const double d = torus_distance(pc.y, static_cast<double>(k) / std::exp2(j));
                if (d < r - 1e-12) avoided = false;
            }
        }
        CHECK(avoided);
        auto field = synth::coefficients(t, h_low, params::kInf);
        const double est =
            estimate_holder(field, pc.y, {.j_min = opts.j0_floor, .probe_ceiling = 8.0});
        if (std::fabs(est - h) <= 0.35) ++accurate;
    }
    CHECK(successes >= trials * 2 / 3);
    CHECK(accurate >= successes * 3 / 4);
}

TEST_CASE("construct_point rejects inverted exponents") {
    auto s = KernelSchedule::constant(0.5, 0.1, 1.0);
    auto t = tr::sample_tree(s, 10, 1);
    CHECK_THROWS_AS(construct_point(t, s, 1.0, 0.5, 0.0, {}), DomainError);
}
