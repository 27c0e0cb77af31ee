#include "rws/params.hpp"

#include <algorithm>
#include <cmath>

#include "rws/errors.hpp"

namespace rws::params {

double gamma(const KernelSchedule& schedule, int j) { return schedule.gamma(j); }
double eta(const KernelSchedule& schedule, int j) { return schedule.eta(j); }

namespace {

struct GammaInfo {
    enum class Kind { EventuallyConstant, DecayingPositive, SparseBadic, Unknown };
    Kind kind = Kind::Unknown;
    double tail_value = 0.0; // EventuallyConstant: limiting gamma
    int tail_from = 0;       // level from which the tail description applies
};

struct EtaInfo {
    enum class Kind {
        EventuallyZero,
        EventuallyConstant,
        Geometric, // eta_j ~ amplitude * 2^(-rate j), rate > 0
        PowerLaw,  // eta_j ~ amplitude * (j+1)^(-rate), rate > 0
        SparseBadic,
        Unknown,
    };
    Kind kind = Kind::Unknown;
    double tail_value = 0.0;
    double amplitude = 0.0;
    double rate = 0.0;
    int tail_from = 0;
};

GammaInfo from_p_sequence(const SequenceSpec& seq) {
    GammaInfo info;
    switch (seq.kind) {
        case SequenceSpec::Kind::Constant:
            info.kind = GammaInfo::Kind::EventuallyConstant;
            info.tail_value = 2.0 * seq.amplitude;
            return info;
        case SequenceSpec::Kind::Geometric:
        case SequenceSpec::Kind::Power:
        case SequenceSpec::Kind::EtaGeometric:
            if (seq.amplitude == 0.0 || seq.rate == 0.0) {
                info.kind = GammaInfo::Kind::EventuallyConstant;
                info.tail_value = 2.0 * seq.bernoulli_at(1 << 20);
                return info;
            }
            info.kind = GammaInfo::Kind::DecayingPositive;
            return info;
    }
    return info;
}

GammaInfo analyze_gamma(const KernelSchedule& schedule) {
    GammaInfo info;
    if (const auto* c = std::get_if<ConstantFamily>(&schedule.family())) {
        info.kind = GammaInfo::Kind::EventuallyConstant;
        info.tail_value = 2.0 * c->p;
    } else if (const auto* pb = std::get_if<ProductBernoulliFamily>(&schedule.family())) {
        info = from_p_sequence(pb->p_seq);
    } else if (const auto* t = std::get_if<TableFamily>(&schedule.family())) {
        info.kind = GammaInfo::Kind::EventuallyConstant;
        info.tail_value = t->rows1.back().expected_ones();
        info.tail_from = static_cast<int>(t->rows1.size()) - 1;
    } else {
        info.kind = GammaInfo::Kind::SparseBadic;
    }
    return info;
}

EtaInfo analyze_eta(const KernelSchedule& schedule) {
    EtaInfo info;
    auto from_q_const = [&](double q) {
        if (q == 0.0) {
            info.kind = EtaInfo::Kind::EventuallyZero;
        } else {
            info.kind = EtaInfo::Kind::EventuallyConstant;
            info.tail_value = 2.0 * q - q * q;
        }
    };
    if (const auto* c = std::get_if<ConstantFamily>(&schedule.family())) {
        from_q_const(c->q);
    } else if (const auto* pb = std::get_if<ProductBernoulliFamily>(&schedule.family())) {
        const SequenceSpec& s = pb->q_seq;
        switch (s.kind) {
            case SequenceSpec::Kind::Constant:
                from_q_const(s.amplitude);
                break;
            case SequenceSpec::Kind::Geometric:
                if (s.amplitude == 0.0) info.kind = EtaInfo::Kind::EventuallyZero;
                else if (s.rate == 0.0) from_q_const(s.amplitude);
                else {
                    info.kind = EtaInfo::Kind::Geometric;
                    info.amplitude = 2.0 * s.amplitude;
                    info.rate = s.rate;
                }
                break;
            case SequenceSpec::Kind::Power:
                if (s.amplitude == 0.0) info.kind = EtaInfo::Kind::EventuallyZero;
                else if (s.rate == 0.0) from_q_const(s.amplitude);
                else {
                    info.kind = EtaInfo::Kind::PowerLaw;
                    info.amplitude = 2.0 * s.amplitude;
                    info.rate = s.rate;
                }
                break;
            case SequenceSpec::Kind::EtaGeometric:
                // eta_j equals min(1, amplitude * 2^(-rate j)) by construction
                if (s.amplitude == 0.0) info.kind = EtaInfo::Kind::EventuallyZero;
                else if (s.rate == 0.0) {
                    info.kind = EtaInfo::Kind::EventuallyConstant;
                    info.tail_value = std::min(1.0, s.amplitude);
                } else {
                    info.kind = EtaInfo::Kind::Geometric;
                    info.amplitude = s.amplitude;
                    info.rate = s.rate;
                }
                break;
        }
    } else if (const auto* t = std::get_if<TableFamily>(&schedule.family())) {
        const double tail_eta = 1.0 - t->rows0.back().mass_none();
        info.tail_from = static_cast<int>(t->rows0.size()) - 1;
        if (tail_eta == 0.0) {
            info.kind = EtaInfo::Kind::EventuallyZero;
        } else {
            info.kind = EtaInfo::Kind::EventuallyConstant;
            info.tail_value = tail_eta;
        }
    } else {
        info.kind = EtaInfo::Kind::SparseBadic;
    }
    return info;
}

} // namespace

LevelIndex j_under(const KernelSchedule& schedule, int J) {
    const GammaInfo info = analyze_gamma(schedule);
    LevelIndex out;
    switch (info.kind) {
        case GammaInfo::Kind::EventuallyConstant: {
            if (info.tail_value == 0.0) {
                out.infinite = true;
                out.exact = true;
                return out;
            }
            int last_zero = -1;
            for (int j = 0; j <= info.tail_from; ++j)
                if (schedule.gamma(j) == 0.0) last_zero = j;
            out.value = last_zero + 1;
            out.exact = true;
            return out;
        }
        case GammaInfo::Kind::DecayingPositive:
        case GammaInfo::Kind::SparseBadic:
            out.value = 0;
            out.exact = true;
            return out;
        case GammaInfo::Kind::Unknown: {
            int last_zero = -1;
            for (int j = 0; j <= J; ++j)
                if (schedule.gamma(j) == 0.0) last_zero = j;
            if (last_zero == J) {
                out.infinite = true;
            } else {
                out.value = last_zero + 1;
            }
            out.exact = false;
            return out;
        }
    }
    return out;
}

ScalarEstimate theta(const KernelSchedule& schedule, int J) {
    const GammaInfo info = analyze_gamma(schedule);
    const LevelIndex ju = j_under(schedule, J);
    if (ju.infinite) return {-kInf, ju.exact};
    switch (info.kind) {
        case GammaInfo::Kind::EventuallyConstant:
            return {std::log2(info.tail_value), true};
        case GammaInfo::Kind::DecayingPositive:
            return {-kInf, true};
        case GammaInfo::Kind::SparseBadic:
            return {1.0 - std::get<SparseBadicFamily>(schedule.family()).a, true};
        case GammaInfo::Kind::Unknown:
            break;
    }
    // finite-depth liminf proxy: running minimum of the Cesaro averages
    // over the upper half of the available levels
    double cum = 0.0;
    double best = kInf;
    for (int j = ju.value; j <= J; ++j) {
        const double g = schedule.gamma(j);
        if (g <= 0.0) return {-kInf, false};
        cum += std::log2(g);
        if (j >= std::max(ju.value + 1, J / 2)) best = std::min(best, cum / j);
    }
    return {best, false};
}

TailSum varsigma(const KernelSchedule& schedule, int j, double tol) {
    if (j < 0) throw DomainError("varsigma level must be nonnegative");
    if (tol <= 0.0) throw DomainError("varsigma tolerance must be positive");
    const GammaInfo info = analyze_gamma(schedule);

    auto term_at = [&](int n, double log2_running_product) {
        // 2 nu_{1,n}({(1,1)}) / (gamma_n * prod_{l=j..n} gamma_l)
        const double p11 = schedule.kernel_at(n, 1).mass_both_one();
        const double g = schedule.gamma(n);
        return 2.0 * p11 / g * std::exp2(-log2_running_product);
    };

    TailSum out;
    if (info.kind == GammaInfo::Kind::EventuallyConstant) {
        const int K = std::max(j, info.tail_from);
        double sum = 0.0;
        double log2_prod = 0.0;
        for (int n = j; n < K; ++n) {
            const double g = schedule.gamma(n);
            if (g == 0.0)
                throw DomainError("varsigma: gamma vanishes at level " + std::to_string(n) +
                                  " >= j (j_under violation)");
            log2_prod += std::log2(g);
            sum += term_at(n, log2_prod);
        }
        const double gc = info.tail_value;
        const double p11c = schedule.kernel_at(K, 1).mass_both_one();
        if (gc == 0.0)
            throw DomainError("varsigma: gamma vanishes from level " + std::to_string(K) +
                              " (j_under violation)");
        if (p11c == 0.0) {
            out.value = sum;
            out.exact = true;
            return out;
        }
        if (gc <= 1.0) {
            // constant terms: 2 p11 / (gc * prod) with prod non-increasing
            out.value = kInf;
            out.divergent = true;
            out.exact = true;
            return out;
        }
        // geometric tail with ratio 1/gc
        log2_prod += std::log2(gc);
        const double t0 = 2.0 * p11c / gc * std::exp2(-log2_prod);
        out.value = sum + t0 / (1.0 - 1.0 / gc);
        out.exact = true;
        return out;
    }
    if (info.kind == GammaInfo::Kind::DecayingPositive) {
        // per-child probability decays to zero, so gamma_n <= 1 eventually
        // while nu_{1,n}({(1,1)}) stays positive: terms are eventually
        // nondecreasing and the series diverges.
        out.value = kInf;
        out.divergent = true;
        out.exact = true;
        return out;
    }
    if (info.kind == GammaInfo::Kind::SparseBadic) {
        const auto& fam = std::get<SparseBadicFamily>(schedule.family());
        // term_n = p_n * 2^{-(n-j+1)} / prod_{l=j..n} p_l and the p-product
        // telescopes, so term_n <= 2^{-(1-a) n} * const: geometric tail.
        double sum = 0.0;
        double log2_prod = 0.0; // log2 prod_{l=j..n} gamma_l
        const double ratio = std::exp2(-(1.0 - fam.a));
        for (int n = j;; ++n) {
            const double g = schedule.gamma(n);
            log2_prod += std::log2(g);
            const double t = term_at(n, log2_prod);
            sum += t;
            // analytic bound on the next term: p <= 1 and the telescoped
            // product keeps log2 prod >= (n-j+1) - a(n+2)
            const double log2_bound =
                -(static_cast<double>(n + 1 - j) + 1.0) + fam.a * (n + 3.0) + 1.0;
            const double tail = std::exp2(log2_bound) / (1.0 - ratio);
            if (tail < tol) {
                out.value = sum;
                out.tail_bound = tail;
                out.exact = false;
                return out;
            }
            if (n - j > 200000 || sum > 1.0 / tol) break;
        }
        out.value = kInf;
        out.divergent = true;
        out.exact = false;
        return out;
    }
    // numeric fallback: observed-ratio tail bound, divergence heuristic
    double sum = 0.0;
    double log2_prod = 0.0;
    double prev = -1.0;
    double ratio_window = 0.0;
    int stable = 0;
    for (int n = j; n - j <= 200000; ++n) {
        const double g = schedule.gamma(n);
        if (g == 0.0)
            throw DomainError("varsigma: gamma vanishes at level " + std::to_string(n) +
                              " >= j (j_under violation)");
        log2_prod += std::log2(g);
        const double t = term_at(n, log2_prod);
        sum += t;
        if (sum > 1.0 / tol) {
            out.value = kInf;
            out.divergent = true;
            out.exact = false;
            return out;
        }
        if (prev > 0.0 && t > 0.0) {
            ratio_window = std::max(ratio_window * 0.5, t / prev);
            stable = t / prev < 1.0 ? stable + 1 : 0;
            if (stable >= 16 && ratio_window < 1.0) {
                const double tail = t * ratio_window / (1.0 - ratio_window);
                if (tail < tol) {
                    out.value = sum;
                    out.tail_bound = tail;
                    out.exact = false;
                    return out;
                }
            }
        }
        prev = t;
    }
    out.value = kInf;
    out.divergent = true;
    out.exact = false;
    return out;
}

HTilde h_tilde(const KernelSchedule& schedule, double h_low, int J) {
    if (!(h_low > 0.0)) throw DomainError("h_tilde requires h_low > 0");
    const EtaInfo info = analyze_eta(schedule);
    HTilde out;
    switch (info.kind) {
        case EtaInfo::Kind::EventuallyZero:
            out.lo = out.hi = kInf;
            out.kind = HTilde::Kind::Exact;
            return out;
        case EtaInfo::Kind::EventuallyConstant:
        case EtaInfo::Kind::PowerLaw:
            // divergence for every h > h_low (and at h_low when the terms do
            // not decay summably), so the infimum is h_low itself
            out.lo = out.hi = h_low;
            out.kind = HTilde::Kind::Exact;
            return out;
        case EtaInfo::Kind::Geometric:
            if (info.rate < 1.0) {
                out.lo = out.hi = h_low / (1.0 - info.rate);
            } else {
                out.lo = out.hi = kInf;
            }
            out.kind = HTilde::Kind::Exact;
            return out;
        case EtaInfo::Kind::SparseBadic: {
            const auto& fam = std::get<SparseBadicFamily>(schedule.family());
            out.lo = h_low / (fam.a * (1.0 - 1.0 / fam.b));
            out.hi = kInf;
            out.kind = HTilde::Kind::LowerBoundOnly;
            return out;
        }
        case EtaInfo::Kind::Unknown:
            break;
    }
    // numeric bracket: sign of the log2-term slope over the upper window
    auto term_slope = [&](double h) {
        const int lo = std::max(1, J / 2);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (int jj = lo; jj <= J; ++jj) {
            const double e = schedule.eta(jj);
            if (e <= 0.0) continue;
            const double y = (1.0 - h_low / h) * jj + std::log2(e);
            sx += jj;
            sy += y;
            sxx += static_cast<double>(jj) * jj;
            sxy += jj * y;
            ++n;
        }
        if (n < 2) return -1.0; // no mass: treat as convergent
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    double lo = h_low;
    double hi = h_low;
    bool found_div = false;
    for (int k = 0; k < 24; ++k) {
        hi *= 2.0;
        if (term_slope(hi) >= 0.05) {
            found_div = true;
            break;
        }
    }
    if (!found_div) {
        out.lo = hi;
        out.hi = kInf;
        out.kind = HTilde::Kind::Bracket;
        return out;
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (term_slope(mid) >= 0.0) hi = mid;
        else lo = mid;
    }
    out.lo = lo;
    out.hi = hi;
    out.kind = HTilde::Kind::Bracket;
    return out;
}

double phi_gf(const KernelSchedule& schedule, int j, double z) {
    if (j < 0) throw DomainError("phi level must be nonnegative");
    if (!(z >= 0.0 && z <= 1.0)) throw DomainError("phi argument must lie in [0,1]");
    if (z == 1.0) return 1.0;
    // f[x] = E[z^{#(level-j descendants in state 1)} | vertex state x]
    double f0 = 1.0;
    double f1 = z;
    for (int m = j - 1; m >= 0; --m) {
        const PairDistribution d1 = schedule.kernel_at(m, 1);
        const PairDistribution d0 = schedule.kernel_at(m, 0);
        const double g1 =
            d1.p00 * f0 * f0 + d1.p01 * f0 * f1 + d1.p10 * f1 * f0 + d1.p11 * f1 * f1;
        const double g0 =
            d0.p00 * f0 * f0 + d0.p01 * f0 * f1 + d0.p10 * f1 * f0 + d0.p11 * f1 * f1;
        f1 = g1;
        f0 = g0;
    }
    const double pi = schedule.initial_law();
    return pi * f1 + (1.0 - pi) * f0;
}

double phi0(const KernelSchedule& schedule, int j) { return phi_gf(schedule, j, 0.0); }

SeriesClass eta_series_class(const KernelSchedule& schedule, int J) {
    const EtaInfo info = analyze_eta(schedule);
    switch (info.kind) {
        case EtaInfo::Kind::EventuallyZero:
            return SeriesClass::Convergent;
        case EtaInfo::Kind::EventuallyConstant:
        case EtaInfo::Kind::PowerLaw:
        case EtaInfo::Kind::SparseBadic:
            return SeriesClass::Divergent;
        case EtaInfo::Kind::Geometric:
            return info.rate > 1.0 ? SeriesClass::Convergent : SeriesClass::Divergent;
        case EtaInfo::Kind::Unknown:
            break;
    }
    (void)J;
    return SeriesClass::Indeterminate;
}

Nu1ZeroPattern nu1_00_pattern(const KernelSchedule& schedule, int J) {
    Nu1ZeroPattern out;
    if (const auto* c = std::get_if<ConstantFamily>(&schedule.family())) {
        if (c->p == 1.0) {
            out.kind = Nu1ZeroPattern::Kind::ZeroFrom;
            out.j_star = 0;
        } else {
            out.kind = Nu1ZeroPattern::Kind::PositiveInfinitelyOften;
        }
        return out;
    }
    if (const auto* pb = std::get_if<ProductBernoulliFamily>(&schedule.family())) {
        const SequenceSpec& s = pb->p_seq;
        const bool const_one = (s.kind == SequenceSpec::Kind::Constant && s.amplitude == 1.0) ||
                               (s.rate == 0.0 && s.bernoulli_at(0) == 1.0);
        if (const_one) {
            out.kind = Nu1ZeroPattern::Kind::ZeroFrom;
            out.j_star = 0;
        } else {
            out.kind = Nu1ZeroPattern::Kind::PositiveInfinitelyOften;
        }
        return out;
    }
    if (const auto* t = std::get_if<TableFamily>(&schedule.family())) {
        if (t->rows1.back().p00 == 0.0) {
            int j_star = static_cast<int>(t->rows1.size()) - 1;
            while (j_star > 0 && t->rows1[j_star - 1].p00 == 0.0) --j_star;
            out.kind = Nu1ZeroPattern::Kind::ZeroFrom;
            out.j_star = j_star;
        } else {
            out.kind = Nu1ZeroPattern::Kind::PositiveInfinitelyOften;
        }
        return out;
    }
    // sparse-badic: p drops below one at every level of the form b^k - 1
    (void)J;
    out.kind = Nu1ZeroPattern::Kind::PositiveInfinitelyOften;
    return out;
}

RegimeReport classify_regime(const KernelSchedule& schedule, int J) {
    RegimeReport report;
    report.theta = theta(schedule, J);
    report.eta_class = eta_series_class(schedule, J);
    report.theta_lt_one = report.theta.value < 1.0;
    if (!report.theta_lt_one) {
        report.regime = Regime::OutOfScope;
        report.note = "theta >= 1: out of model scope";
        return report;
    }
    switch (report.eta_class) {
        case SeriesClass::Convergent:
            report.regime = Regime::SparseAppearance;
            report.note = "sum 2^j eta_j converges";
            break;
        case SeriesClass::Divergent:
            report.regime = Regime::DenseAppearance;
            report.note = "sum 2^j eta_j diverges";
            break;
        case SeriesClass::Indeterminate:
            report.regime = Regime::Indeterminate;
            report.note = "eta series class undecided at depth J";
            break;
    }
    return report;
}

DerivedParams derive(const KernelSchedule& schedule, int J, double h_low, double h_high,
                     double tol) {
    if (!(h_low > 0.0) || !(h_low < h_high))
        throw ConfigError("exponents must satisfy 0 < h_low < h_high");
    DerivedParams p;
    p.J = J;
    p.h_low = h_low;
    p.h_high = h_high;
    p.gamma_seq.resize(J + 1);
    p.eta_seq.resize(J + 1);
    for (int j = 0; j <= J; ++j) {
        p.gamma_seq[j] = schedule.gamma(j);
        p.eta_seq[j] = schedule.eta(j);
    }
    const int phi_levels = std::min(J, 32);
    p.phi0_seq.resize(phi_levels + 1);
    for (int j = 0; j <= phi_levels; ++j) p.phi0_seq[j] = phi0(schedule, j);
    p.j_under = j_under(schedule, J);
    p.theta = theta(schedule, J);
    if (!p.j_under.infinite) p.varsigma_at_junder = varsigma(schedule, p.j_under.value, tol);
    p.h_tilde = h_tilde(schedule, h_low, J);
    p.eta_class = eta_series_class(schedule, J);
    p.nu1_pattern = nu1_00_pattern(schedule, J);
    p.regime = classify_regime(schedule, J);
    return p;
}

ValidationReport validate_schedule(const KernelSchedule& schedule, int J) {
    ValidationReport report;
    for (int j = 0; j <= J; ++j) {
        for (int s = 0; s <= 1; ++s) {
            const PairDistribution d = schedule.kernel_at(j, s);
            if (!d.valid()) {
                report.rows_valid = false;
                report.row_issues.push_back(
                    {j, s, "probabilities sum to " + std::to_string(d.sum())});
            }
        }
    }
    report.theta = theta(schedule, J);
    report.theta_lt_one = report.theta.value < 1.0;
    if (!report.theta_lt_one)
        report.warnings.push_back("theta >= 1: outside the model's scope");
    report.eta_class = eta_series_class(schedule, J);
    report.nu1_pattern = nu1_00_pattern(schedule, J);
    if (const auto* r4 = std::get_if<SparseBadicFamily>(&schedule.family())) {
        if (!(r4->a < 1.0 / (2.0 - 1.0 / r4->b)))
            report.warnings.push_back(
                "sparse-badic: a >= 1/(2-1/b), the randomness-of-spectrum conditions are not "
                "guaranteed");
    }
    return report;
}

} // namespace rws::params
