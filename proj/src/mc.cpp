#include "rws/mc.hpp"

#include <cmath>

#include "rws/analysis.hpp"
#include "rws/errors.hpp"
#include "rws/rng.hpp"

namespace rws::mc {

Event event_from_name(const std::string& name) {
    if (name == "s-empty") return Event::SLevelEmpty;
    if (name == "fresh-nonempty") return Event::FreshRangeNonempty;
    if (name == "subtree-survival") return Event::SubtreeSurvival;
    if (name == "theta-cover-nonempty") return Event::ThetaCoverNonempty;
    throw ConfigError("unknown event name: " + name);
}

std::string event_name(Event e) {
    switch (e) {
        case Event::SLevelEmpty: return "s-empty";
        case Event::FreshRangeNonempty: return "fresh-nonempty";
        case Event::SubtreeSurvival: return "subtree-survival";
        case Event::ThetaCoverNonempty: return "theta-cover-nonempty";
    }
    return "?";
}

Wilson wilson99(long long successes, long long trials) {
    const double z = 2.5758293035489004; // 99.5th normal quantile
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

bool evaluate(const tree::TreeSample& t, Event event, const EventParams& params) {
    switch (event) {
        case Event::SLevelEmpty:
            return t.count_ones(params.level) == 0;
        case Event::FreshRangeNonempty: {
            const int lo = std::max(1, params.level);
            const int hi = std::min(t.max_level(), params.level2);
            for (int j = lo; j <= hi; ++j)
                if (!tree::fresh_ones(t, j).empty()) return true;
            return false;
        }
        case Event::SubtreeSurvival:
            return tree::subtree_reaches(t, {params.level, params.offset}, t.max_level());
        case Event::ThetaCoverNonempty: {
            const auto cover = tree::theta_cover(t);
            const int need = params.run_length > 0 ? params.run_length : t.max_level() + 1;
            for (auto r : cover.run_length)
                if (r >= need) return true;
            return false;
        }
    }
    return false;
}

} // namespace

MCResult probability(const KernelSchedule& schedule, int J, Event event,
                     const EventParams& params, long long trials, std::uint64_t seed) {
    if (trials < 100) throw DomainError("probability estimation needs at least 100 trials");
    MCResult out;
    out.trials = trials;
    out.seed_base = seed;
    out.event = event_name(event);
    for (long long i = 0; i < trials; ++i) {
        const auto t = tree::sample_tree(schedule, J, derive_seed(seed, i));
        out.successes += evaluate(t, event, params);
    }
    out.p_hat = static_cast<double>(out.successes) / trials;
    out.interval = wilson99(out.successes, trials);
    return out;
}

MomentResult moment(const KernelSchedule& schedule, int J, Statistic stat, int j,
                    long long trials, std::uint64_t seed) {
    if (j > J) throw RangeError("statistic level beyond sampled depth");
    MomentResult out;
    out.trials = trials;
    double sum = 0.0, sumsq = 0.0;
    for (long long i = 0; i < trials; ++i) {
        const auto t = tree::sample_tree(schedule, J, derive_seed(seed, i));
        const double v = stat == Statistic::CardS
                             ? static_cast<double>(t.count_ones(j))
                             : static_cast<double>(tree::fresh_ones(t, j).size());
        sum += v;
        sumsq += v * v;
    }
    out.mean = sum / trials;
    const double var = std::max(0.0, sumsq / trials - out.mean * out.mean);
    out.se = std::sqrt(var / trials);
    return out;
}

ThetaDimResult theta_dimension(const KernelSchedule& schedule, int J, long long trials,
                               std::uint64_t seed) {
    ThetaDimResult out;
    out.trials = trials;
    double sum = 0.0, sumsq = 0.0;
    for (long long i = 0; i < trials; ++i) {
        const auto t = tree::sample_tree(schedule, J, derive_seed(seed, i));
        const auto cover = tree::theta_cover(t);
        if (cover.offsets.empty()) continue;
        ++out.surviving;
        const auto counts = tree::dyadic_cover_counts(cover.offsets, J);
        const auto bd = analysis::box_dimension(counts);
        out.slopes.push_back(bd.slope);
        sum += bd.slope;
        sumsq += bd.slope * bd.slope;
    }
    out.survival_rate = static_cast<double>(out.surviving) / trials;
    out.survival_interval = wilson99(out.surviving, trials);
    if (out.surviving > 0) {
        out.mean_slope = sum / out.surviving;
        const double var =
            std::max(0.0, sumsq / out.surviving - out.mean_slope * out.mean_slope);
        out.slope_sd = std::sqrt(var);
    }
    return out;
}

double all_one_chain_probability(const KernelSchedule& schedule, int J) {
    // extinction of the all-1 subtree, backward from level J
    double die = 0.0; // P(1-subtree of a state-1 level-j vertex misses level J)
    for (int j = J - 1; j >= 0; --j) {
        const PairDistribution d = schedule.kernel_at(j, 1);
        die = d.p00 + d.p01 * die + d.p10 * die + d.p11 * die * die;
    }
    return schedule.initial_law() * (1.0 - die);
}

double fresh_absent_probability(const KernelSchedule& schedule, int J, int j1, int j2) {
    if (j1 < 1 || j2 > J || j1 > j2) throw RangeError("fresh range outside [1, J]");
    // F_j(x): no fresh vertex at levels in [j1, j2] below a level-j state-x vertex
    double f0 = 1.0, f1 = 1.0;
    for (int j = j2 - 1; j >= 0; --j) {
        const PairDistribution d = schedule.kernel_at(j, 0);
        const PairDistribution e = schedule.kernel_at(j, 1);
        const bool child_in_range = j + 1 >= j1;
        double g0;
        if (child_in_range) {
            // any 1-child of a 0-parent is fresh
            g0 = d.p00 * f0 * f0;
        } else {
            g0 = d.p00 * f0 * f0 + d.p01 * f0 * f1 + d.p10 * f1 * f0 + d.p11 * f1 * f1;
        }
        const double g1 =
            e.p00 * f0 * f0 + e.p01 * f0 * f1 + e.p10 * f1 * f0 + e.p11 * f1 * f1;
        f0 = g0;
        f1 = g1;
    }
    const double pi = schedule.initial_law();
    return pi * f1 + (1.0 - pi) * f0;
}

} // namespace rws::mc
