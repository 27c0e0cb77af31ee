#ifndef RWS_PARAMS_HPP
#define RWS_PARAMS_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rws/kernels.hpp"

namespace rws::params {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// gamma_j: expected number of state-1 sons of a state-1 vertex at level j.
double gamma(const KernelSchedule& schedule, int j);
// eta_j: probability that a state-0 vertex at level j has a state-1 son.
double eta(const KernelSchedule& schedule, int j);

struct LevelIndex {
    int value = 0;        // meaningful when !infinite
    bool infinite = false; // gamma_j = 0 for arbitrarily large j
    bool exact = false;    // closed form vs depth-J scan
};

// j_under = inf{ j0 : gamma_j > 0 for all j >= j0 }, resolved in closed form
// for analytic families, otherwise scanned up to depth J.
LevelIndex j_under(const KernelSchedule& schedule, int J);

struct ScalarEstimate {
    double value = 0.0; // may be +-inf
    bool exact = false;
};

// theta: liminf Cesaro average of log2 gamma over [j_under, j]; -inf when
// j_under is infinite.  Exact closed forms: constant gamma -> log2(gamma),
// sparse-badic -> 1 - a, geometric/power p-sequences -> -inf.  Otherwise the
// running minimum of the averages over j in [J/2, J], flagged inexact.
ScalarEstimate theta(const KernelSchedule& schedule, int J);

struct TailSum {
    double value = 0.0;      // +inf when a divergence certificate holds
    double tail_bound = 0.0; // truncation remainder bound (0 for exact/divergent)
    bool exact = false;
    bool divergent = false;
};

// varsigma_j = 2 sum_{n>=j} nu_{1,n}({(1,1)}) / (gamma_n prod_{l=j..n} gamma_l).
TailSum varsigma(const KernelSchedule& schedule, int j, double tol = 1e-10);

struct HTilde {
    enum class Kind { Exact, LowerBoundOnly, Bracket };
    double lo = 0.0;
    double hi = 0.0; // may be +inf
    Kind kind = Kind::Bracket;
    double point() const { return lo; } // representative value (lo for bounds)
};

// h_tilde = inf{ h > 0 : sum_j 2^{(1 - h_low/h) j} eta_j = inf }.
HTilde h_tilde(const KernelSchedule& schedule, double h_low, int J);

// Phi_j(z) = E[z^{#S_j}] via the per-parent-state subtree recursion
// (exact, O(j) per evaluation). phi0 is Phi_j(0) = P(S_j empty).
double phi_gf(const KernelSchedule& schedule, int j, double z);
double phi0(const KernelSchedule& schedule, int j);

enum class SeriesClass { Convergent, Divergent, Indeterminate };

// Convergence of sum_j 2^j eta_j (closed form for analytic families).
SeriesClass eta_series_class(const KernelSchedule& schedule, int J);

// Pattern of nu_{1,j}({(0,0)}) over levels: vanishing from some j_*
// onwards, positive infinitely often, or undecidable at depth J.
struct Nu1ZeroPattern {
    enum class Kind { ZeroFrom, PositiveInfinitelyOften, Indeterminate };
    Kind kind = Kind::Indeterminate;
    int j_star = 0; // for ZeroFrom
};
Nu1ZeroPattern nu1_00_pattern(const KernelSchedule& schedule, int J);

enum class Regime { SparseAppearance, DenseAppearance, OutOfScope, Indeterminate };

struct RegimeReport {
    Regime regime = Regime::Indeterminate;
    ScalarEstimate theta;
    bool theta_lt_one = true;
    SeriesClass eta_class = SeriesClass::Indeterminate;
    std::string note;
};

RegimeReport classify_regime(const KernelSchedule& schedule, int J);

// Everything the spectrum evaluation needs, computed once.
struct DerivedParams {
    int J = 0;
    double h_low = 0.0;
    double h_high = kInf;
    std::vector<double> gamma_seq; // levels 0..J
    std::vector<double> eta_seq;
    std::vector<double> phi0_seq; // levels 0..min(J, 32)
    LevelIndex j_under;
    ScalarEstimate theta;
    TailSum varsigma_at_junder;
    HTilde h_tilde;
    SeriesClass eta_class = SeriesClass::Indeterminate;
    Nu1ZeroPattern nu1_pattern;
    RegimeReport regime;
};

DerivedParams derive(const KernelSchedule& schedule, int J, double h_low, double h_high,
                     double tol = 1e-10);

struct ValidationReport {
    struct RowIssue {
        int level = 0;
        int parent_state = 0;
        std::string what;
    };
    std::vector<RowIssue> row_issues;
    bool rows_valid = true;
    ScalarEstimate theta;
    bool theta_lt_one = true;
    SeriesClass eta_class = SeriesClass::Indeterminate;
    Nu1ZeroPattern nu1_pattern;
    std::vector<std::string> warnings;
};

// Checks PairDistribution invariants for all levels <= J and reports which
// model hypotheses hold.  Never throws; failures are listed in the report.
ValidationReport validate_schedule(const KernelSchedule& schedule, int J);

} // namespace rws::params

#endif
