#ifndef RWS_SPECTRUM_HPP
#define RWS_SPECTRUM_HPP

#include <optional>
#include <string>
#include <vector>

#include "rws/params.hpp"
#include "rws/synth.hpp"

namespace rws::spectrum {

// Exact piecewise description of h -> d(h): point masses plus at most one
// linear piece d = h / h_tilde; everything else maps to -inf.
struct PiecewiseSpectrum {
    struct Point {
        double h = 0.0;
        double d = 0.0;
        std::string note;
    };
    struct Linear {
        double h_from = 0.0; // open endpoint
        double h_to = 0.0;   // closed iff to_closed
        bool to_closed = true;
        double h_tilde = 0.0; // d = h / h_tilde on the piece
    };
    std::vector<Point> points;
    std::optional<Linear> linear;

    // -inf outside the declared pieces
    double eval(double h) const;
};

struct ProbabilityReport {
    enum class Kind {
        Exact,         // value holds with the recorded tail bound
        One,           // certificate forces probability one
        Zero,          // certificate forces probability zero
        Interior,      // strictly inside (0,1), no closed form
        Positive,      // > 0, upper side unresolved
        LessThanOne,   // < 1, lower side unresolved
        Indeterminate, // undecidable at finite depth
    };
    Kind kind = Kind::Indeterminate;
    double value = 0.0;      // meaningful for Exact / One / Zero
    double tail_bound = 0.0; // truncation bound when Exact
    std::string certificate;

    static ProbabilityReport exact(double v, double tail, std::string cert);
};

enum class TriState { No, Yes, Indeterminate };

struct SpectrumPrediction {
    params::Regime regime = params::Regime::Indeterminate;
    PiecewiseSpectrum d;
    // candidates for d(h_low); one entry when deterministic
    std::vector<double> d_at_h_low;
    ProbabilityReport p_dim_neg_inf;                   // P(d(h_low) = -inf)
    std::optional<ProbabilityReport> p_theta_attained; // P(d(h_low) = theta)
    TriState random_spectrum = TriState::Indeterminate;
    std::string branch_note;
};

// Full case split of the spectrum law from the derived parameters.  Throws
// AmbiguityError when an inexact bracket straddles a case boundary.
SpectrumPrediction predict(const KernelSchedule& schedule, const params::DerivedParams& p);

// Law of the emptiness of the propagation set: exact product formula when
// nu_{1,j}({(0,0)}) vanishes from some level on, otherwise the certificate
// trichotomy.
ProbabilityReport p_theta_empty(const KernelSchedule& schedule,
                                const params::DerivedParams& p);

struct LargeDeviationResult {
    std::vector<double> h_grid;
    std::vector<double> eps_list;
    // values[i][e]: limsup proxy of (1/j) log2 #{ |C| in the (h_i, eps_e) band }
    std::vector<std::vector<double>> values;
};

// Coefficient-histogram spectrum over the window [j_lo, J]; by the
// two-valued structure the mass concentrates on {h_low, h_high}.
LargeDeviationResult large_deviation_spectrum(const synth::CoefficientField& field,
                                              const std::vector<double>& h_grid,
                                              const std::vector<double>& eps_list,
                                              int j_lo = -1);

} // namespace rws::spectrum

#endif
