#ifndef RWS_MC_HPP
#define RWS_MC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rws/kernels.hpp"
#include "rws/tree.hpp"

namespace rws::mc {

// Closed registry of tree events so the CLI surface stays declarative.
enum class Event {
    SLevelEmpty,        // S_j empty (param: level)
    FreshRangeNonempty, // some S~_j nonempty for j in [level, level2]
    SubtreeSurvival,    // the all-1 subtree of (level, offset) reaches depth J
    ThetaCoverNonempty, // some level-J vertex carries an all-1 ancestor run
};

struct EventParams {
    int level = 0;
    int level2 = 0;
    std::uint64_t offset = 0;
    int run_length = 0; // ThetaCoverNonempty: required terminal 1-run (0: full run)
};

Event event_from_name(const std::string& name);
std::string event_name(Event e);

struct Wilson {
    double lo = 0.0;
    double hi = 1.0;
};

// 99% Wilson score interval
Wilson wilson99(long long successes, long long trials);

struct MCResult {
    long long trials = 0;
    long long successes = 0;
    double p_hat = 0.0;
    Wilson interval;
    std::uint64_t seed_base = 0;
    std::string event;
};

MCResult probability(const KernelSchedule& schedule, int J, Event event,
                     const EventParams& params, long long trials, std::uint64_t seed);

enum class Statistic { CardS, CardFresh };

struct MomentResult {
    long long trials = 0;
    double mean = 0.0;
    double se = 0.0;
};

MomentResult moment(const KernelSchedule& schedule, int J, Statistic stat, int j,
                    long long trials, std::uint64_t seed);

struct ThetaDimResult {
    long long trials = 0;
    long long surviving = 0;
    double survival_rate = 0.0;
    Wilson survival_interval;
    double mean_slope = 0.0;
    double slope_sd = 0.0;
    std::vector<double> slopes;
};

// Per surviving replicate: dyadic cover counts of the deepest one-set and
// their log-log slope; plus the survival frequency.
ThetaDimResult theta_dimension(const KernelSchedule& schedule, int J, long long trials,
                               std::uint64_t seed);

// Exact oracles (backward recursions over the kernel schedule):
// probability that some level-J vertex carries an all-1 ancestor chain back
// to the root, and probability that no fresh vertex appears at levels in
// [j1, j2].
double all_one_chain_probability(const KernelSchedule& schedule, int J);
double fresh_absent_probability(const KernelSchedule& schedule, int J, int j1, int j2);

} // namespace rws::mc

#endif
