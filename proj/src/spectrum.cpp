#include "rws/spectrum.hpp"

#include <cmath>

#include "rws/errors.hpp"

namespace rws::spectrum {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundaryMargin = 0.05; // deadband for inexact comparisons

enum class Cert { Holds, Fails, Unknown };

struct EtaTail {
    enum class Kind { EventuallyZero, Summable, Divergent, Unknown };
    Kind kind = Kind::Unknown;
};

// classification of sum_j 2^j eta_j needed by the product formula
EtaTail eta_tail(const KernelSchedule& schedule, int J) {
    EtaTail t;
    switch (params::eta_series_class(schedule, J)) {
        case params::SeriesClass::Convergent: {
            bool all_zero = true;
            for (int j = 0; j <= J && all_zero; ++j) all_zero = schedule.eta(j) == 0.0;
            t.kind = all_zero ? EtaTail::Kind::EventuallyZero : EtaTail::Kind::Summable;
            return t;
        }
        case params::SeriesClass::Divergent:
            t.kind = EtaTail::Kind::Divergent;
            return t;
        case params::SeriesClass::Indeterminate:
            return t;
    }
    return t;
}

// liminf_j prod_{l=j_under..j} gamma_l = 0 ?
Cert liminf_product_zero(const KernelSchedule& schedule, const params::DerivedParams& p) {
    if (const auto* c = std::get_if<ConstantFamily>(&schedule.family())) {
        return 2.0 * c->p < 1.0 ? Cert::Holds : Cert::Fails;
    }
    if (const auto* t = std::get_if<TableFamily>(&schedule.family())) {
        const double g = t->rows1.back().expected_ones();
        return g < 1.0 ? Cert::Holds : Cert::Fails;
    }
    if (const auto* pb = std::get_if<ProductBernoulliFamily>(&schedule.family())) {
        const auto& s = pb->p_seq;
        if (s.kind == SequenceSpec::Kind::Constant || s.rate == 0.0) {
            const double g = 2.0 * s.bernoulli_at(1 << 20);
            return g < 1.0 ? Cert::Holds : Cert::Fails;
        }
        if (s.amplitude > 0.0 && s.rate > 0.0) return Cert::Holds; // gamma -> 0
    }
    if (std::get_if<SparseBadicFamily>(&schedule.family())) {
        // running products grow like 2^{(1-a) j} along j+1 = b^k
        return p.theta.value > 0.0 ? Cert::Fails : Cert::Unknown;
    }
    return Cert::Unknown;
}

Cert varsigma_infinite(const params::TailSum& v) {
    if (v.divergent && v.exact) return Cert::Holds;
    if (!v.divergent && (v.exact || v.tail_bound > 0.0)) return Cert::Fails;
    if (v.divergent) return Cert::Holds; // heuristic divergence, flagged in text
    return Cert::Unknown;
}

// sum_j 2^j eta_j / varsigma_{j+1} = infinite ?
Cert immigration_vs_varsigma(const KernelSchedule& schedule, const params::DerivedParams& p) {
    if (std::get_if<SparseBadicFamily>(&schedule.family()) != nullptr) {
        // the sparse-level terms are summable against the varsigma growth
        return Cert::Fails;
    }
    // eventually constant kernels: varsigma_{j+1} is eventually constant and
    // finite when theta > 0, so the sum inherits the divergence of 2^j eta_j
    bool const_p_side = std::get_if<ConstantFamily>(&schedule.family()) != nullptr ||
                        std::get_if<TableFamily>(&schedule.family()) != nullptr;
    if (const auto* pb = std::get_if<ProductBernoulliFamily>(&schedule.family())) {
        const_p_side = pb->p_seq.kind == SequenceSpec::Kind::Constant || pb->p_seq.rate == 0.0;
    }
    if (const_p_side && p.eta_class == params::SeriesClass::Divergent &&
        !p.varsigma_at_junder.divergent)
        return Cert::Holds;
    return Cert::Unknown;
}

std::string cert_name(Cert c) {
    switch (c) {
        case Cert::Holds: return "holds";
        case Cert::Fails: return "fails";
        case Cert::Unknown: return "unknown";
    }
    return "?";
}

ProbabilityReport complement(const ProbabilityReport& r) {
    ProbabilityReport out = r;
    switch (r.kind) {
        case ProbabilityReport::Kind::Exact:
            out.value = 1.0 - r.value;
            break;
        case ProbabilityReport::Kind::One:
            out.kind = ProbabilityReport::Kind::Zero;
            out.value = 0.0;
            break;
        case ProbabilityReport::Kind::Zero:
            out.kind = ProbabilityReport::Kind::One;
            out.value = 1.0;
            break;
        case ProbabilityReport::Kind::Positive:
            out.kind = ProbabilityReport::Kind::LessThanOne;
            break;
        case ProbabilityReport::Kind::LessThanOne:
            out.kind = ProbabilityReport::Kind::Positive;
            break;
        case ProbabilityReport::Kind::Interior:
        case ProbabilityReport::Kind::Indeterminate:
            break;
    }
    return out;
}

} // namespace

ProbabilityReport ProbabilityReport::exact(double v, double tail, std::string cert) {
    ProbabilityReport r;
    r.kind = Kind::Exact;
    r.value = v;
    r.tail_bound = tail;
    r.certificate = std::move(cert);
    return r;
}

double PiecewiseSpectrum::eval(double h) const {
    for (const auto& pt : points)
        if (h == pt.h) return pt.d;
    if (linear) {
        const bool above = h > linear->h_from;
        const bool below = linear->to_closed ? h <= linear->h_to : h < linear->h_to;
        if (above && below) return std::isinf(linear->h_tilde) ? 0.0 : h / linear->h_tilde;
    }
    return -kInf;
}

ProbabilityReport p_theta_empty(const KernelSchedule& schedule,
                                const params::DerivedParams& p) {
    ProbabilityReport out;
    if (p.theta.exact && p.theta.value < 0.0) {
        out.kind = ProbabilityReport::Kind::One;
        out.value = 1.0;
        out.certificate = "theta < 0: propagation set empty almost surely";
        return out;
    }

    if (p.nu1_pattern.kind == params::Nu1ZeroPattern::Kind::ZeroFrom) {
        // exact branch: Phi_{j*}(0) * prod_{j >= j*} (1 - eta_j)^{2^j}
        const int j_star = p.nu1_pattern.j_star;
        const double phi = params::phi0(schedule, j_star);
        const EtaTail tail = eta_tail(schedule, p.J);
        if (tail.kind == EtaTail::Kind::Divergent) {
            out.kind = ProbabilityReport::Kind::Exact;
            out.value = 0.0;
            out.certificate = "product over (1-eta_j)^(2^j) vanishes (divergent exponent sum)";
            return out;
        }
        if (tail.kind == EtaTail::Kind::Unknown) {
            out.kind = ProbabilityReport::Kind::Indeterminate;
            out.certificate = "eta series class undecided";
            return out;
        }
        double log_prod = 0.0;
        double tail_bound = kInf;
        for (int j = j_star; j < j_star + 4000; ++j) {
            const double e = schedule.eta(j);
            if (e >= 1.0) {
                out.kind = ProbabilityReport::Kind::Exact;
                out.value = 0.0;
                out.certificate = "eta = 1 at level " + std::to_string(j);
                return out;
            }
            log_prod += std::exp2(static_cast<double>(j)) * std::log1p(-e);
            // remaining levels: bounded by a geometric majorant once eta decays
            const double e_next = schedule.eta(j + 1);
            if (e_next == 0.0) {
                bool rest_zero = true;
                for (int m = 1; m <= 64 && rest_zero; ++m)
                    rest_zero = schedule.eta(j + m) == 0.0;
                if (rest_zero) {
                    tail_bound = 0.0;
                    break;
                }
            } else if (e_next <= 0.25) {
                const double t0 = std::exp2(static_cast<double>(j + 1)) * 2.0 * e_next;
                double ratio = 0.0;
                for (int m = 1; m <= 8; ++m) {
                    const double em = schedule.eta(j + m);
                    const double em1 = schedule.eta(j + m + 1);
                    if (em > 0.0) ratio = std::max(ratio, 2.0 * em1 / em);
                }
                if (ratio < 1.0) {
                    tail_bound = t0 / (1.0 - ratio);
                    if (tail_bound < 1e-10) break;
                }
            }
        }
        if (tail_bound > 1e-10) {
            out.kind = ProbabilityReport::Kind::Indeterminate;
            out.certificate = "product tail bound did not fall below 1e-10";
            return out;
        }
        out = ProbabilityReport::exact(phi * std::exp(log_prod), tail_bound,
                                       "Phi_{j*}(0) times the vanishing-appearance product, "
                                       "j* = " + std::to_string(j_star));
        return out;
    }

    // nu_{1,j}({(0,0)}) positive infinitely often
    if (p.eta_class == params::SeriesClass::Convergent) {
        const Cert c1 = varsigma_infinite(p.varsigma_at_junder);
        const Cert c2 = liminf_product_zero(schedule, p);
        const bool phi_one = !p.j_under.infinite &&
                             params::phi0(schedule, p.j_under.value) == 1.0;
        bool eta_zero_from_junder = true;
        for (int j = p.j_under.value; j <= p.J && eta_zero_from_junder; ++j)
            eta_zero_from_junder = schedule.eta(j) == 0.0;
        const Cert c3 = (phi_one && eta_zero_from_junder &&
                         eta_tail(schedule, p.J).kind == EtaTail::Kind::EventuallyZero)
                            ? Cert::Holds
                            : Cert::Fails;
        out.certificate = "varsigma(j_under)=inf: " + cert_name(c1) +
                          "; liminf gamma-product = 0: " + cert_name(c2) +
                          "; degenerate start: " + cert_name(c3);
        if (c1 == Cert::Holds || c2 == Cert::Holds || c3 == Cert::Holds) {
            out.kind = ProbabilityReport::Kind::One;
            out.value = 1.0;
            return out;
        }
        if (eta_zero_from_junder &&
            eta_tail(schedule, p.J).kind == EtaTail::Kind::EventuallyZero) {
            // no appearance at all: the propagation set is empty iff the
            // initial one-forest dies out; take the extinction limit of the
            // backward recursion (deterministic, geometric convergence away
            // from criticality, which the varsigma certificate already caught)
            double prev = -1.0;
            int depth = std::max(256, 8 * p.J);
            for (int attempt = 0; attempt < 14; ++attempt) {
                double e = 0.0;
                for (int m = depth; m-- > 0;) {
                    const PairDistribution d = schedule.kernel_at(m, 1);
                    e = d.p00 + (d.p01 + d.p10) * e + d.p11 * e * e;
                }
                if (prev >= 0.0 && std::fabs(e - prev) < 1e-12) {
                    const double pi = schedule.initial_law();
                    return ProbabilityReport::exact(
                        pi * e + (1.0 - pi), std::fabs(e - prev),
                        "no-appearance extinction limit; " + out.certificate);
                }
                prev = e;
                depth *= 2;
            }
        }
        if (c1 == Cert::Fails && c2 == Cert::Fails && c3 == Cert::Fails) {
            out.kind = ProbabilityReport::Kind::Interior;
        } else {
            out.kind = ProbabilityReport::Kind::Positive;
        }
        return out;
    }
    if (p.eta_class == params::SeriesClass::Divergent) {
        if (!(p.theta.exact && p.theta.value > 0.0)) {
            out.kind = ProbabilityReport::Kind::Indeterminate;
            out.certificate = "divergent appearance sum but theta not certified positive";
            return out;
        }
        const Cert c = immigration_vs_varsigma(schedule, p);
        out.certificate = "sum 2^j eta_j / varsigma_{j+1} divergent: " + cert_name(c);
        if (c == Cert::Holds) {
            out.kind = ProbabilityReport::Kind::Zero;
            out.value = 0.0;
        } else if (c == Cert::Fails) {
            out.kind = ProbabilityReport::Kind::Interior;
        } else {
            out.kind = ProbabilityReport::Kind::LessThanOne;
        }
        return out;
    }
    out.kind = ProbabilityReport::Kind::Indeterminate;
    out.certificate = "eta series class undecided";
    return out;
}

namespace {

// three-way comparison with the deadband rule for inexact values
int compare_with_margin(double value, bool exact, double boundary, const char* name) {
    if (exact) {
        if (value < boundary) return -1;
        if (value > boundary) return 1;
        return 0;
    }
    if (value < boundary - kBoundaryMargin) return -1;
    if (value > boundary + kBoundaryMargin) return 1;
    throw AmbiguityError(name, std::string("inexact estimate ") + std::to_string(value) +
                                   " straddles the boundary " + std::to_string(boundary) +
                                   " (" + name + ")");
}

} // namespace

SpectrumPrediction predict(const KernelSchedule& schedule, const params::DerivedParams& p) {
    SpectrumPrediction out;
    out.regime = p.regime.regime;
    if (out.regime == params::Regime::OutOfScope) {
        out.branch_note = "theta >= 1: outside the model's scope";
        return out;
    }
    if (out.regime == params::Regime::Indeterminate) {
        out.branch_note = p.regime.note;
        return out;
    }

    const double h_low = p.h_low;
    const double h_high = p.h_high;
    const double theta = p.theta.value;

    if (out.regime == params::Regime::SparseAppearance) {
        const int sign = std::isinf(theta) && theta < 0
                             ? -1
                             : compare_with_margin(theta, p.theta.exact, 0.0, "theta vs 0");
        out.d.points.push_back({h_high, 1.0, "full-measure exponent"});
        if (sign < 0) {
            out.d_at_h_low = {-kInf};
            out.p_dim_neg_inf =
                ProbabilityReport::exact(1.0, 0.0, "theta < 0: uniform exponent h_high");
            out.random_spectrum = TriState::No;
            out.branch_note = "convergent appearance sum, theta < 0";
            return out;
        }
        out.branch_note = "convergent appearance sum, theta >= 0";
        out.p_dim_neg_inf = p_theta_empty(schedule, p);
        out.d_at_h_low = {-kInf, theta};
        out.p_theta_attained = complement(out.p_dim_neg_inf);
        switch (out.p_dim_neg_inf.kind) {
            case ProbabilityReport::Kind::Exact:
                out.random_spectrum = (out.p_dim_neg_inf.value > 0.0 &&
                                       out.p_dim_neg_inf.value < 1.0)
                                          ? TriState::Yes
                                          : TriState::No;
                if (out.p_dim_neg_inf.value == 0.0) out.d_at_h_low = {theta};
                if (out.p_dim_neg_inf.value == 1.0) out.d_at_h_low = {-kInf};
                break;
            case ProbabilityReport::Kind::One:
                out.random_spectrum = TriState::No;
                out.d_at_h_low = {-kInf};
                break;
            case ProbabilityReport::Kind::Zero:
                out.random_spectrum = TriState::No;
                out.d_at_h_low = {theta};
                break;
            case ProbabilityReport::Kind::Interior:
                out.random_spectrum = TriState::Yes;
                break;
            default:
                out.random_spectrum = TriState::Indeterminate;
        }
        return out;
    }

    // dense-appearance regime
    const auto& ht = p.h_tilde;
    double h_tilde_point = ht.lo;
    const bool h_tilde_lower_bound_only = ht.kind == params::HTilde::Kind::LowerBoundOnly;
    if (h_tilde_lower_bound_only) {
        if (ht.lo >= h_high) {
            // h_tilde >= lo >= h_high decides the branch; the linear piece and
            // the h_low/h_tilde candidate are reported through the bound
            out.branch_note = "h_tilde known only by its lower bound " +
                              std::to_string(ht.lo) + "; ratios use the bound; ";
        } else {
            throw AmbiguityError("h_tilde vs h_high",
                                 "only a lower bound on h_tilde is available and it lies "
                                 "below h_high");
        }
    } else if (ht.kind == params::HTilde::Kind::Bracket) {
        if (ht.hi < h_high - kBoundaryMargin) {
            h_tilde_point = 0.5 * (ht.lo + ht.hi);
            out.branch_note = "h_tilde taken as the midpoint of an inexact bracket; ";
        } else if (ht.lo > h_high + kBoundaryMargin) {
            h_tilde_point = ht.lo;
        } else {
            throw AmbiguityError("h_tilde vs h_high",
                                 "inexact h_tilde bracket straddles h_high");
        }
    }

    const bool case_two = h_tilde_point >= h_high;
    if (case_two) {
        out.d.linear = {h_low, h_high, false, h_tilde_point};
        out.d.points.push_back({h_high, 1.0, "full-measure exponent"});
        out.branch_note += "h_tilde >= h_high";
    } else {
        out.d.linear = {h_low, h_tilde_point, true, h_tilde_point};
        out.branch_note += "h_tilde < h_high; d(h_high) = -inf is forced by "
                           "the full-torus covering above h_tilde";
    }

    const double ratio = std::isinf(h_tilde_point) ? 0.0 : h_low / h_tilde_point;
    int sign;
    if (std::isinf(theta) && theta < 0) {
        sign = 1;
    } else if (h_tilde_lower_bound_only) {
        // ratio is an upper bound on h_low/h_tilde: only "below theta" is decidable
        if (ratio < theta && p.theta.exact) sign = -1;
        else
            throw AmbiguityError("h_low/h_tilde vs theta",
                                 "h_tilde lower bound cannot place h_low/h_tilde above theta");
    } else {
        sign = compare_with_margin(ratio - theta, p.theta.exact, 0.0,
                                   "h_low/h_tilde vs theta");
    }
    if (sign >= 0) {
        out.d_at_h_low = {ratio};
        out.p_dim_neg_inf = ProbabilityReport::exact(0.0, 0.0, "d(h_low) = h_low/h_tilde");
        out.random_spectrum = TriState::No;
        out.branch_note += "; d(h_low) = h_low/h_tilde";
        return out;
    }
    // h_low/h_tilde < theta: dichotomy between h_low/h_tilde and theta
    out.d_at_h_low = {ratio, theta};
    const ProbabilityReport empty = p_theta_empty(schedule, p);
    out.p_theta_attained = complement(empty);
    out.p_dim_neg_inf = ProbabilityReport::exact(0.0, 0.0, "dense-appearance regime: d(h_low) >= h_low/h_tilde");
    switch (empty.kind) {
        case ProbabilityReport::Kind::Zero:
            out.random_spectrum = TriState::No;
            out.d_at_h_low = {theta};
            break;
        case ProbabilityReport::Kind::Interior:
            out.random_spectrum = TriState::Yes;
            break;
        case ProbabilityReport::Kind::Exact:
            out.random_spectrum =
                (empty.value > 0.0 && empty.value < 1.0) ? TriState::Yes : TriState::No;
            break;
        default:
            out.random_spectrum = TriState::Indeterminate;
    }
    out.branch_note += "; d(h_low) in {h_low/h_tilde, theta}";
    return out;
}

LargeDeviationResult large_deviation_spectrum(const synth::CoefficientField& field,
                                              const std::vector<double>& h_grid,
                                              const std::vector<double>& eps_list,
                                              int j_lo) {
    const int J = field.max_level();
    const int lo = j_lo >= 1 ? j_lo : std::max(1, J / 2);
    LargeDeviationResult out;
    out.h_grid = h_grid;
    out.eps_list = eps_list;
    out.values.assign(h_grid.size(), std::vector<double>(eps_list.size(), -kInf));

    std::vector<std::uint64_t> n_large(J + 1, 0);
    for (int j = lo; j <= J; ++j) n_large[j] = field.large_count(j);

    for (std::size_t hi = 0; hi < h_grid.size(); ++hi) {
        for (std::size_t ei = 0; ei < eps_list.size(); ++ei) {
            const double h = h_grid[hi];
            const double eps = eps_list[ei];
            double best = -kInf;
            for (int j = lo; j <= J; ++j) {
                std::uint64_t count = 0;
                if (std::fabs(field.h_low() - h) <= eps) count += n_large[j];
                const double sv = field.small_value(j);
                if (sv > 0.0 && std::fabs(field.h_high() - h) <= eps)
                    count += (1ull << j) - n_large[j];
                if (count > 0)
                    best = std::max(best, std::log2(static_cast<double>(count)) / j);
            }
            out.values[hi][ei] = best;
        }
    }
    return out;
}

} // namespace rws::spectrum
