#ifndef RWS_ANALYSIS_HPP
#define RWS_ANALYSIS_HPP

#include <Eigen/Core>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rws/kernels.hpp"
#include "rws/synth.hpp"
#include "rws/tree.hpp"

namespace rws::analysis {

// Sorted one-sets per level, shared by the pointwise estimators.
struct TreeIndex {
    int J = 0;
    std::vector<std::vector<std::uint64_t>> ones;  // S_j, levels 0..J
    std::vector<std::vector<std::uint64_t>> fresh; // S~_j, empty at level 0

    static TreeIndex build(const tree::TreeSample& t);
};

// torus distance
inline double torus_distance(double x, double y) {
    const double d = std::fabs(x - y);
    return std::min(d, 1.0 - d);
}

struct Witness {
    int level = -1;
    std::uint64_t offset = 0;
    bool clamped = false; // value cut at the probe ceiling (h_high = inf only)
};

struct HolderOptions {
    int j_min = 0;              // 0: ceil(J/2)
    double probe_ceiling = 0.0; // 0: 8 * h_low; used when h_high = inf
};

// hhat(x) = min(h_eff, min_{j in [j_min, J]} h_low j / -log2(2^-j + d_j(x)))
// with d_j the distance to the nearest large-coefficient anchor of level j.
double estimate_holder(const synth::CoefficientField& field, double x,
                       const HolderOptions& options = {}, Witness* witness = nullptr);

struct HolderField {
    int grid_log2 = 0;
    int j_min = 0;
    int J = 0;
    double h_low = 0.0;
    double h_high_eff = 0.0; // min(h_high, probe ceiling)
    Eigen::ArrayXd h;        // per grid point x = k / 2^grid_log2
    std::vector<Witness> witness;
};

HolderField estimate_holder_field(const synth::CoefficientField& field, int grid_log2,
                                  const HolderOptions& options = {});

struct LimsupFlags {
    bool in_L = false;
    bool in_L_tilde = false;
    bool in_theta_path = false;
    // finite-depth chain certificate: every witness at a level deep enough
    // for the father-propagation step resolves to a fresh witness or to an
    // all-1 witness chain reaching the window floor
    bool decomposition_consistent = true;
};

LimsupFlags limsup_membership(const TreeIndex& index, double x, double alpha, double h_low,
                              int j_min, int J);

struct BetaResult {
    bool defined = false;
    double beta = 0.0;
    double h_hat = 0.0; // base estimate at t = 0
    std::string reason;
};

// Least-squares slope over t of the Holder estimate of the order-t
// integrated field, minus one.  Undefined at probe-ceiling points.
BetaResult estimate_beta(const synth::CoefficientField& field, double x,
                         std::span<const double> t_grid, const HolderOptions& options = {});

// Grid version sharing one anchor sweep per level; `defined` marks the
// points whose estimate stays below the probe ceiling for every t.
Eigen::ArrayXd estimate_beta_field(const synth::CoefficientField& field, int grid_log2,
                                   std::span<const double> t_grid,
                                   const HolderOptions& options,
                                   std::vector<std::uint8_t>* defined);

struct BoxDimension {
    double slope = 0.0;
    double r2 = 0.0;
    int levels_used = 0;
    bool empty = false; // all counts zero: dimension -inf
};

// Log-log regression of cover counts over the upper half of the levels with
// nonzero counts.  All-zero counts give the empty-set convention (-inf).
BoxDimension box_dimension(const std::map<int, long long>& counts);

struct IsoSets {
    std::vector<std::uint8_t> in_E;      // |hhat - h| <= eps
    std::vector<std::uint8_t> in_Etilde; // hhat <= h + eps
    std::map<int, long long> counts_E;
    std::map<int, long long> counts_Etilde;
};

IsoSets iso_holder_sets(const HolderField& field, double h, double eps,
                        int max_cover_level = -1);

struct LocalityResult {
    std::vector<double> arc_slopes; // -inf marks arcs with too little mass
    double spread = 0.0;            // max - min over the finite slopes
    int arcs_excluded = 0;
};

LocalityResult locality_check(const HolderField& field, double h, double eps, int n_arcs,
                              int max_cover_level = -1);

// Nested-interval construction of a point with prescribed exponent h.
struct PointConstruction {
    enum class Status { Success, FreshExhaustion, WidthExhaustion, UnderResolved };

    struct Step {
        int level = 0;      // j_n
        double rho = 0.0;   // rho(j_n), truncated tail sum
        double lo = 0.0;    // interval left endpoint (torus)
        double length = 0.0;
        int anchor_level = -1; // level of the flush blocking ball
        std::uint64_t anchor_offset = 0;
    };

    double target_h = 0.0;
    Status status = Status::UnderResolved;
    std::string reason;
    int j0 = 0;
    double kappa_tilde = 1.0;
    double kappa = 1.0;       // theta >= 0 branch only
    bool theta_negative = true;
    std::vector<Step> steps;  // strictly nested intervals
    int levels_processed = 0; // deepest level whose balls were examined
    double y = 0.0;           // midpoint of the final interval (on success)
    double final_length = 0.0;
};

struct ConstructOptions {
    double rho_cap = 0.35; // interval length <= min(rho, rho_cap) 2^{-h_low j / h}
    int tail_levels = 64;  // extra levels of the eta tail beyond J
    double tail_abort_fraction = 0.10;
    // starting level is the first admissible level >= max(ceil(4 kappa~), j0_floor);
    // align with the estimator window so the flush anchors stay visible to it
    int j0_floor = 1;
};

PointConstruction construct_point(const tree::TreeSample& t, const KernelSchedule& schedule,
                                  double h_low, double target_h, double theta,
                                  const ConstructOptions& options = {});

} // namespace rws::analysis

#endif
