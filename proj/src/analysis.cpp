#include "rws/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "rws/errors.hpp"
#include "rws/params.hpp"

namespace rws::analysis {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

TreeIndex TreeIndex::build(const tree::TreeSample& t) {
    TreeIndex idx;
    idx.J = t.max_level();
    idx.ones.resize(idx.J + 1);
    idx.fresh.resize(idx.J + 1);
    for (int j = 0; j <= idx.J; ++j) {
        idx.ones[j] = tree::level_ones(t, j);
        if (j >= 1) idx.fresh[j] = tree::fresh_ones(t, j);
    }
    return idx;
}

namespace {

// distance from x to the nearest anchor k 2^-level among the sorted offsets
double nearest_distance(const std::vector<std::uint64_t>& offsets, int level, double x) {
    if (offsets.empty()) return kInf;
    const double scale = std::exp2(static_cast<double>(level));
    auto it = std::lower_bound(offsets.begin(), offsets.end(),
                               static_cast<std::uint64_t>(std::ceil(x * scale)));
    double best = kInf;
    const std::size_t n = offsets.size();
    const std::size_t i = static_cast<std::size_t>(it - offsets.begin());
    for (std::size_t cand : {i % n, (i + n - 1) % n, (i + 1) % n})
        best = std::min(best, torus_distance(x, static_cast<double>(offsets[cand]) / scale));
    return best;
}

// index of the nearest anchor (same probing as nearest_distance)
std::size_t nearest_index(const std::vector<std::uint64_t>& offsets, int level, double x) {
    const double scale = std::exp2(static_cast<double>(level));
    auto it = std::lower_bound(offsets.begin(), offsets.end(),
                               static_cast<std::uint64_t>(std::ceil(x * scale)));
    const std::size_t n = offsets.size();
    const std::size_t i = static_cast<std::size_t>(it - offsets.begin());
    std::size_t best = i % n;
    double bd = kInf;
    for (std::size_t cand : {i % n, (i + n - 1) % n, (i + 1) % n}) {
        const double d = torus_distance(x, static_cast<double>(offsets[cand]) / scale);
        if (d < bd) {
            bd = d;
            best = cand;
        }
    }
    return best;
}

double ratio_at_level(double h_low, int j, double d) {
    const double arg = std::exp2(-static_cast<double>(j)) + d;
    if (arg >= 1.0) return kInf;
    return h_low * static_cast<double>(j) / -std::log2(arg);
}

struct ResolvedHolderOptions {
    int j_min;
    double h_eff;
    bool infinite_high;
};

ResolvedHolderOptions resolve(const HolderOptions& options, int J, double h_low,
                              double h_high) {
    ResolvedHolderOptions r;
    r.j_min = options.j_min > 0 ? options.j_min : (J + 1) / 2;
    if (r.j_min < 1) r.j_min = 1;
    r.infinite_high = std::isinf(h_high);
    const double ceiling = options.probe_ceiling > 0.0 ? options.probe_ceiling : 8.0 * h_low;
    r.h_eff = r.infinite_high ? ceiling : h_high;
    return r;
}

} // namespace

double estimate_holder(const synth::CoefficientField& field, double x,
                       const HolderOptions& options, Witness* witness) {
    const int J = field.max_level();
    const auto r = resolve(options, J, field.h_low(), field.h_high());
    double best = r.h_eff;
    Witness w;
    w.clamped = r.infinite_high;
    for (int j = r.j_min; j <= J; ++j) {
        const auto offsets = field.large_offsets(j);
        if (offsets.empty()) continue;
        const double d = nearest_distance(offsets, j, x);
        const double a = ratio_at_level(field.h_low(), j, d);
        if (a < best) {
            best = a;
            w.level = j;
            w.offset = offsets[nearest_index(offsets, j, x)];
            w.clamped = false;
        }
    }
    if (witness) *witness = w;
    return best;
}

HolderField estimate_holder_field(const synth::CoefficientField& field, int grid_log2,
                                  const HolderOptions& options) {
    const int J = field.max_level();
    const auto r = resolve(options, J, field.h_low(), field.h_high());
    const std::size_t N = 1ull << grid_log2;

    HolderField out;
    out.grid_log2 = grid_log2;
    out.j_min = r.j_min;
    out.J = J;
    out.h_low = field.h_low();
    out.h_high_eff = r.h_eff;
    out.h = Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(N), r.h_eff);
    out.witness.assign(N, Witness{-1, 0, r.infinite_high});

    for (int j = r.j_min; j <= J; ++j) {
        const auto offsets = field.large_offsets(j);
        if (offsets.empty()) continue;
        const double scale = std::exp2(static_cast<double>(j));
        const std::size_t S = offsets.size();
        std::size_t ptr = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double x = static_cast<double>(i) / static_cast<double>(N);
            while (ptr < S && static_cast<double>(offsets[ptr]) / scale < x) ++ptr;
            double d;
            std::size_t pick;
            const double right = ptr < S
                                     ? static_cast<double>(offsets[ptr]) / scale - x
                                     : static_cast<double>(offsets[0]) / scale + 1.0 - x;
            const double left = ptr > 0
                                    ? x - static_cast<double>(offsets[ptr - 1]) / scale
                                    : x + 1.0 - static_cast<double>(offsets[S - 1]) / scale;
            if (right <= left) {
                d = right;
                pick = ptr < S ? ptr : 0;
            } else {
                d = left;
                pick = ptr > 0 ? ptr - 1 : S - 1;
            }
            const double a = ratio_at_level(field.h_low(), j, d);
            if (a < out.h[static_cast<Eigen::Index>(i)]) {
                out.h[static_cast<Eigen::Index>(i)] = a;
                out.witness[i] = Witness{j, offsets[pick], false};
            }
        }
    }
    return out;
}

LimsupFlags limsup_membership(const TreeIndex& index, double x, double alpha, double h_low,
                              int j_min, int J) {
    if (!(alpha > h_low)) throw DomainError("limsup membership requires alpha > h_low");
    if (j_min < 1 || J > index.J) throw RangeError("window outside the indexed depth");
    LimsupFlags flags;

    auto threshold = [&](int j) { return std::exp2(-h_low * static_cast<double>(j) / alpha); };
    auto in_sorted = [](const std::vector<std::uint64_t>& v, std::uint64_t k) {
        auto it = std::lower_bound(v.begin(), v.end(), k);
        return it != v.end() && *it == k;
    };

    std::vector<double> dist(J + 1, kInf);
    for (int j = j_min; j <= J; ++j) {
        dist[j] = nearest_distance(index.ones[j], j, x);
        if (dist[j] < threshold(j)) flags.in_L = true;
        if (nearest_distance(index.fresh[j], j, x) < threshold(j)) flags.in_L_tilde = true;
    }

    flags.in_theta_path = true;
    for (int j = j_min; j <= J && flags.in_theta_path; ++j) {
        const auto k = static_cast<std::uint64_t>(x * std::exp2(static_cast<double>(j)));
        flags.in_theta_path = in_sorted(index.ones[j], k);
    }

    // chain certificate: every witness deep enough for the father-propagation
    // step resolves to a fresh witness or to an all-1 witness chain reaching
    // the window floor
    const double step_floor =
        (1.0 - std::log2(std::exp2(h_low / alpha) - 1.0)) / (1.0 - h_low / alpha);
    const int m0 = std::max(j_min, static_cast<int>(std::ceil(step_floor)));
    for (int j = m0; j <= J; ++j) {
        if (!(dist[j] < threshold(j))) continue;
        std::uint64_t cur = index.ones[j][nearest_index(index.ones[j], j, x)];
        for (int lvl = j; lvl > m0; --lvl) {
            const std::uint64_t father = cur >> 1;
            if (!in_sorted(index.ones[lvl - 1], father)) {
                if (!in_sorted(index.fresh[lvl], cur)) flags.decomposition_consistent = false;
                break;
            }
            const double fd = torus_distance(
                x, static_cast<double>(father) / std::exp2(static_cast<double>(lvl - 1)));
            if (!(fd < threshold(lvl - 1))) flags.decomposition_consistent = false;
            cur = father;
        }
    }
    return flags;
}

BetaResult estimate_beta(const synth::CoefficientField& field, double x,
                         std::span<const double> t_grid, const HolderOptions& options) {
    BetaResult out;
    const int J = field.max_level();
    const auto r = resolve(options, J, field.h_low(), field.h_high());
    if (t_grid.size() < 2) throw DomainError("beta estimation needs at least two t values");
    for (double t : t_grid)
        if (t < 0.0) throw DomainError("integration orders must be nonnegative");

    // one distance pass: the order-t integrated field keeps the same anchors,
    // only the exponent pair moves to (h_low + t, h_high + t)
    std::vector<double> dist(J + 1, kInf);
    for (int j = r.j_min; j <= J; ++j)
        dist[j] = nearest_distance(field.large_offsets(j), j, x);

    std::vector<double> hs;
    hs.reserve(t_grid.size());
    for (double t : t_grid) {
        const double h_eff_t = r.h_eff + t;
        double best = h_eff_t;
        bool clamped = r.infinite_high;
        for (int j = r.j_min; j <= J; ++j) {
            if (std::isinf(dist[j])) continue;
            const double arg = std::exp2(-static_cast<double>(j)) + dist[j];
            if (arg >= 1.0) continue;
            const double a = (field.h_low() + t) * static_cast<double>(j) / -std::log2(arg);
            if (a < best) {
                best = a;
                clamped = false;
            }
        }
        if (clamped) {
            out.reason = "estimate sits at the probe ceiling; oscillation exponent undefined";
            return out;
        }
        hs.push_back(best);
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        sx += t_grid[i];
        sy += hs[i];
        sxx += t_grid[i] * t_grid[i];
        sxy += t_grid[i] * hs[i];
    }
    out.defined = true;
    out.h_hat = hs[0];
    out.beta = (n * sxy - sx * sy) / (n * sxx - sx * sx) - 1.0;
    return out;
}

Eigen::ArrayXd estimate_beta_field(const synth::CoefficientField& field, int grid_log2,
                                   std::span<const double> t_grid,
                                   const HolderOptions& options,
                                   std::vector<std::uint8_t>* defined) {
    const int J = field.max_level();
    const auto r = resolve(options, J, field.h_low(), field.h_high());
    if (t_grid.size() < 2) throw DomainError("beta estimation needs at least two t values");
    const std::size_t N = 1ull << grid_log2;
    const std::size_t T = t_grid.size();

    // per point and t: min over levels of (h_low + t) j / -log2(2^-j + d_j)
    std::vector<Eigen::ArrayXd> vals(T);
    for (std::size_t ti = 0; ti < T; ++ti)
        vals[ti] = Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(N),
                                            r.h_eff + t_grid[ti]);

    for (int j = r.j_min; j <= J; ++j) {
        const auto offsets = field.large_offsets(j);
        if (offsets.empty()) continue;
        const double scale = std::exp2(static_cast<double>(j));
        const std::size_t S = offsets.size();
        std::size_t ptr = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double x = static_cast<double>(i) / static_cast<double>(N);
            while (ptr < S && static_cast<double>(offsets[ptr]) / scale < x) ++ptr;
            const double right = ptr < S
                                     ? static_cast<double>(offsets[ptr]) / scale - x
                                     : static_cast<double>(offsets[0]) / scale + 1.0 - x;
            const double left = ptr > 0
                                    ? x - static_cast<double>(offsets[ptr - 1]) / scale
                                    : x + 1.0 - static_cast<double>(offsets[S - 1]) / scale;
            const double d = std::min(right, left);
            const double arg = std::exp2(-static_cast<double>(j)) + d;
            if (arg >= 1.0) continue;
            const double base = static_cast<double>(j) / -std::log2(arg);
            for (std::size_t ti = 0; ti < T; ++ti) {
                const double a = (field.h_low() + t_grid[ti]) * base;
                auto& v = vals[ti][static_cast<Eigen::Index>(i)];
                if (a < v) v = a;
            }
        }
    }

    Eigen::ArrayXd beta(static_cast<Eigen::Index>(N));
    if (defined) defined->assign(N, 1);
    double sx = 0, sxx = 0;
    for (double t : t_grid) {
        sx += t;
        sxx += t * t;
    }
    const double nT = static_cast<double>(T);
    for (std::size_t i = 0; i < N; ++i) {
        if (r.infinite_high && vals[0][static_cast<Eigen::Index>(i)] >= r.h_eff) {
            beta[static_cast<Eigen::Index>(i)] = std::numeric_limits<double>::quiet_NaN();
            if (defined) (*defined)[i] = 0;
            continue;
        }
        double sy = 0, sxy = 0;
        for (std::size_t ti = 0; ti < T; ++ti) {
            sy += vals[ti][static_cast<Eigen::Index>(i)];
            sxy += t_grid[ti] * vals[ti][static_cast<Eigen::Index>(i)];
        }
        beta[static_cast<Eigen::Index>(i)] = (nT * sxy - sx * sy) / (nT * sxx - sx * sx) - 1.0;
    }
    return beta;
}

BoxDimension box_dimension(const std::map<int, long long>& counts) {
    BoxDimension out;
    std::vector<std::pair<int, long long>> nz;
    for (const auto& [level, count] : counts)
        if (count > 0) nz.emplace_back(level, count);
    if (nz.empty()) {
        out.empty = true;
        out.slope = -kInf;
        return out;
    }
    if (nz.size() < 4)
        throw DomainError("box dimension needs at least 4 levels with nonzero counts");
    const std::size_t use = std::max<std::size_t>(2, (nz.size() + 1) / 2);
    const std::size_t from = nz.size() - use;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = from; i < nz.size(); ++i) {
        const double xj = nz[i].first;
        const double yj = std::log2(static_cast<double>(nz[i].second));
        sx += xj;
        sy += yj;
        sxx += xj * xj;
        sxy += xj * yj;
        ++n;
    }
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - out.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double mean_y = sy / n;
    for (std::size_t i = from; i < nz.size(); ++i) {
        const double yj = std::log2(static_cast<double>(nz[i].second));
        const double fit = out.slope * nz[i].first + intercept;
        ss_res += (yj - fit) * (yj - fit);
        ss_tot += (yj - mean_y) * (yj - mean_y);
    }
    out.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    out.levels_used = n;
    return out;
}

namespace {

std::map<int, long long> cover_counts(const std::vector<std::size_t>& members, int grid_log2,
                                      int max_level) {
    std::map<int, long long> counts;
    for (int level = 0; level <= max_level; ++level) {
        const int shift = grid_log2 - level;
        long long n = 0;
        std::size_t prev = ~std::size_t{0};
        for (std::size_t i : members) {
            const std::size_t box = i >> shift;
            if (box != prev) {
                ++n;
                prev = box;
            }
        }
        counts[level] = n;
    }
    return counts;
}

} // namespace

IsoSets iso_holder_sets(const HolderField& field, double h, double eps, int max_cover_level) {
    if (!(eps > 0.0)) throw DomainError("iso-set tolerance must be positive");
    const std::size_t N = static_cast<std::size_t>(field.h.size());
    const int max_level =
        max_cover_level >= 0 ? max_cover_level : std::min(field.J, field.grid_log2);
    IsoSets out;
    out.in_E.assign(N, 0);
    out.in_Etilde.assign(N, 0);
    std::vector<std::size_t> members_e, members_et;
    for (std::size_t i = 0; i < N; ++i) {
        const double v = field.h[static_cast<Eigen::Index>(i)];
        if (std::fabs(v - h) <= eps) {
            out.in_E[i] = 1;
            members_e.push_back(i);
        }
        if (v <= h + eps) {
            out.in_Etilde[i] = 1;
            members_et.push_back(i);
        }
    }
    out.counts_E = cover_counts(members_e, field.grid_log2, max_level);
    out.counts_Etilde = cover_counts(members_et, field.grid_log2, max_level);
    return out;
}

LocalityResult locality_check(const HolderField& field, double h, double eps, int n_arcs,
                              int max_cover_level) {
    if (n_arcs < 2) throw DomainError("locality check needs at least 2 arcs");
    const std::size_t N = static_cast<std::size_t>(field.h.size());
    const int max_level =
        max_cover_level >= 0 ? max_cover_level : std::min(field.J, field.grid_log2);
    LocalityResult out;
    double lo = kInf, hi = -kInf;
    for (int a = 0; a < n_arcs; ++a) {
        const std::size_t from = N * static_cast<std::size_t>(a) / n_arcs;
        const std::size_t to = N * static_cast<std::size_t>(a + 1) / n_arcs;
        std::vector<std::size_t> members;
        for (std::size_t i = from; i < to; ++i)
            if (field.h[static_cast<Eigen::Index>(i)] <= h + eps) members.push_back(i);
        auto counts = cover_counts(members, field.grid_log2, max_level);
        int nonzero = 0;
        for (const auto& [lvl, c] : counts) nonzero += c > 0;
        if (nonzero < 4) {
            out.arc_slopes.push_back(-kInf);
            ++out.arcs_excluded;
            continue;
        }
        const auto bd = box_dimension(counts);
        out.arc_slopes.push_back(bd.slope);
        lo = std::min(lo, bd.slope);
        hi = std::max(hi, bd.slope);
    }
    out.spread = hi >= lo ? hi - lo : 0.0;
    return out;
}

namespace {

// free segments of a base arc (local coordinates in [0, base_len)) after
// removing balls; each segment records the ball bounding its left end
struct FreeSegment {
    double lo = 0.0;
    double hi = 0.0;
    int anchor_level = -1;
    std::uint64_t anchor_offset = 0;
};

struct Ball {
    double center = 0.0;
    double radius = 0.0;
    int level = 0;
    std::uint64_t offset = 0;
};

std::vector<FreeSegment> remove_balls(double base_lo, double base_len,
                                      const std::vector<Ball>& balls, bool full_circle) {
    struct Blocked {
        double lo, hi;
        int level;
        std::uint64_t offset;
    };
    std::vector<Blocked> blocked;
    for (const Ball& b : balls) {
        if (2.0 * b.radius >= 1.0) return {};
        double start = std::fmod(b.center - b.radius - base_lo, 1.0);
        if (start < 0.0) start += 1.0;
        const double len = 2.0 * b.radius;
        if (start < base_len)
            blocked.push_back({start, std::min(base_len, start + len), b.level, b.offset});
        if (start + len > 1.0)
            blocked.push_back({0.0, std::min(base_len, start + len - 1.0), b.level, b.offset});
    }
    std::sort(blocked.begin(), blocked.end(),
              [](const Blocked& a, const Blocked& b) { return a.lo < b.lo; });

    std::vector<FreeSegment> free;
    double cursor = 0.0;
    int last_level = -1;
    std::uint64_t last_offset = 0;
    for (const Blocked& b : blocked) {
        if (b.lo > cursor) free.push_back({cursor, b.lo, last_level, last_offset});
        if (b.hi > cursor) {
            cursor = b.hi;
            last_level = b.level;
            last_offset = b.offset;
        }
    }
    if (cursor < base_len) free.push_back({cursor, base_len, last_level, last_offset});

    if (full_circle && free.size() >= 2 && free.front().lo == 0.0 &&
        free.back().hi == base_len) {
        // the two boundary segments are one wrapped component
        FreeSegment merged = free.back();
        merged.hi = base_len + free.front().hi;
        free.front() = merged;
        free.pop_back();
    }
    return free;
}

const FreeSegment* widest_segment(const std::vector<FreeSegment>& free) {
    const FreeSegment* best = nullptr;
    for (const auto& seg : free)
        if (!best || seg.hi - seg.lo > best->hi - best->lo) best = &seg;
    return best;
}

} // namespace

PointConstruction construct_point(const tree::TreeSample& t, const KernelSchedule& schedule,
                                  double h_low, double target_h, double theta,
                                  const ConstructOptions& options) {
    PointConstruction out;
    out.target_h = target_h;
    const int J = t.max_level();
    if (!(h_low > 0.0) || !(target_h >= h_low))
        throw DomainError("construction requires 0 < h_low <= h");

    const TreeIndex index = TreeIndex::build(t);
    const double exp_ratio = h_low / target_h;

    // rho(j) = j 2^{h_low j / h} sum_{j' > j} 2^{(1 - h_low/h) j'} eta_{j'-1} j'^2,
    // truncated past the sampled depth with an observed-ratio tail bound
    const int j_ext = J + options.tail_levels;
    std::vector<double> suffix(j_ext + 2, 0.0);
    std::vector<double> terms(j_ext + 1, 0.0);
    for (int jp = 1; jp <= j_ext; ++jp)
        terms[jp] = std::exp2((1.0 - exp_ratio) * jp) * schedule.eta(jp - 1) *
                    static_cast<double>(jp) * jp;
    for (int jp = j_ext; jp >= 1; --jp) suffix[jp] = suffix[jp + 1] + terms[jp];
    {
        double ratio = 0.0;
        for (int jp = j_ext - 8; jp < j_ext; ++jp)
            if (terms[jp] > 0.0) ratio = std::max(ratio, terms[jp + 1] / terms[jp]);
        const double tail =
            terms[j_ext] == 0.0 ? 0.0
            : ratio < 1.0       ? terms[j_ext] * ratio / (1.0 - ratio)
                                : kInf;
        const double partial = suffix[1];
        if (!(tail <= options.tail_abort_fraction * std::max(partial, 1e-300))) {
            out.status = PointConstruction::Status::UnderResolved;
            out.reason = "rho tail bound exceeds the allowed fraction of the truncated sum";
            return out;
        }
    }
    auto rho_at = [&](int j) {
        return static_cast<double>(j) * std::exp2(h_low * j / target_h) * suffix[j + 1];
    };

    // empirical replacements for the almost-sure count constants
    double kappa_tilde = 1.0;
    for (int j = 1; j <= J; ++j) {
        const double eta = schedule.eta(j - 1);
        if (eta <= 0.0) continue;
        const double bound = std::exp2(static_cast<double>(j)) * eta * j * j;
        kappa_tilde = std::max(kappa_tilde, index.fresh[j].size() / bound);
    }
    out.kappa_tilde = kappa_tilde;
    out.theta_negative = theta < 0.0;

    const auto ju = params::j_under(schedule, J);
    double kappa = 1.0;
    if (!out.theta_negative && !ju.infinite) {
        double log2_prod = 0.0;
        for (int j = ju.value; j <= J; ++j) {
            const double bound = std::exp2(0.5 * (1.0 - theta) * j + log2_prod);
            if (bound > 0.0 && !index.ones[j].empty())
                kappa = std::max(kappa, index.ones[j].size() / bound);
            log2_prod += std::log2(std::max(schedule.gamma(j), 1e-300));
        }
    }
    out.kappa = kappa;

    auto ball_radius = [&](int level) { return std::exp2(-exp_ratio * level); };

    // starting level: realized-count form of the removal-budget inequalities
    std::vector<double> removal_from(J + 2, 0.0);
    for (int j = J; j >= 1; --j)
        removal_from[j] = removal_from[j + 1] + 2.0 * index.fresh[j].size() * ball_radius(j);
    int j0 = -1;
    const int j0_floor =
        std::max({1, options.j0_floor, static_cast<int>(std::ceil(4.0 * kappa_tilde))});
    for (int j = j0_floor; j <= J; ++j) {
        if (!(removal_from[j] <= 0.25)) continue;
        if (!out.theta_negative) {
            const double eaten =
                3.0 * index.ones[j - 1].size() * std::exp2(-static_cast<double>(j - 1));
            if (!(eaten <= 0.25)) continue;
        }
        j0 = j;
        break;
    }
    if (j0 < 0) {
        out.status = PointConstruction::Status::UnderResolved;
        out.reason = "no admissible starting level within the sampled depth";
        return out;
    }
    out.j0 = j0;

    bool any_fresh = false;
    for (int j = j0; j <= J && !any_fresh; ++j) any_fresh = !index.fresh[j].empty();
    if (!any_fresh) {
        out.status = PointConstruction::Status::FreshExhaustion;
        out.reason = "no fresh vertices at levels >= " + std::to_string(j0);
        out.levels_processed = j0;
        return out;
    }

    auto interval_length = [&](int j) {
        return std::min(rho_at(j), options.rho_cap) * ball_radius(j);
    };

    // step 1: first level admitting a flush placement next to a blocking ball
    double cur_lo = 0.0, cur_len = 1.0;
    int cur_level = j0 - 1;
    bool have_interval = false;
    std::vector<Ball> balls;
    if (!out.theta_negative) {
        const double r0 = 1.5 * std::exp2(-static_cast<double>(j0 - 1));
        for (std::uint64_t k : index.ones[j0 - 1])
            balls.push_back(
                {static_cast<double>(k) / std::exp2(j0 - 1), r0, j0 - 1, k});
    }
    for (int j = j0; j <= J; ++j) {
        for (std::uint64_t k : index.fresh[j])
            balls.push_back({static_cast<double>(k) / std::exp2(j), ball_radius(j), j, k});
        bool seen_fresh = false;
        for (int jj = j0; jj <= j && !seen_fresh; ++jj) seen_fresh = !index.fresh[jj].empty();
        if (!seen_fresh) continue;
        const double L = interval_length(j);
        auto free = remove_balls(0.0, 1.0, balls, true);
        const FreeSegment* widest = widest_segment(free);
        if (!widest || widest->hi - widest->lo < L) continue;
        double lo = widest->lo;
        if (lo >= 1.0) lo -= 1.0;
        out.steps.push_back({j, rho_at(j), lo, L, widest->anchor_level, widest->anchor_offset});
        cur_lo = lo;
        cur_len = L;
        cur_level = j;
        have_interval = true;
        break;
    }
    if (!have_interval) {
        out.status = PointConstruction::Status::WidthExhaustion;
        out.reason = "no component wide enough for the first interval";
        out.levels_processed = J;
        return out;
    }

    // later steps: refine whenever a fresh vertex lands inside the interval
    while (true) {
        int advanced = -1;
        for (int j = cur_level + 1; j <= J; ++j) {
            bool catch_found = false;
            for (int jj = cur_level + 1; jj <= j && !catch_found; ++jj) {
                for (std::uint64_t k : index.fresh[jj]) {
                    double pos = static_cast<double>(k) / std::exp2(jj) - cur_lo;
                    pos -= std::floor(pos);
                    if (pos < cur_len) {
                        catch_found = true;
                        break;
                    }
                }
            }
            if (!catch_found) continue;
            std::vector<Ball> inner;
            for (int jj = cur_level + 1; jj <= j; ++jj)
                for (std::uint64_t k : index.fresh[jj])
                    inner.push_back(
                        {static_cast<double>(k) / std::exp2(jj), ball_radius(jj), jj, k});
            double L = interval_length(j);
            L = std::min(L, 0.999 * cur_len); // keep the nesting strict
            auto free = remove_balls(cur_lo, cur_len, inner, false);
            const FreeSegment* widest = widest_segment(free);
            if (!widest || widest->hi - widest->lo < L) continue;
            double lo = cur_lo + widest->lo;
            if (lo >= 1.0) lo -= 1.0;
            const int anchor_level = widest->anchor_level >= 0
                                         ? widest->anchor_level
                                         : out.steps.back().anchor_level;
            const std::uint64_t anchor_offset = widest->anchor_level >= 0
                                                    ? widest->anchor_offset
                                                    : out.steps.back().anchor_offset;
            out.steps.push_back({j, rho_at(j), lo, L, anchor_level, anchor_offset});
            cur_lo = lo;
            cur_len = L;
            cur_level = j;
            advanced = j;
            break;
        }
        if (advanced < 0) break;
    }

    // final pass: exclude the balls of the remaining levels
    std::vector<Ball> rest;
    for (int jj = cur_level + 1; jj <= J; ++jj)
        for (std::uint64_t k : index.fresh[jj])
            rest.push_back({static_cast<double>(k) / std::exp2(jj), ball_radius(jj), jj, k});
    auto free = remove_balls(cur_lo, cur_len, rest, false);
    const FreeSegment* widest = widest_segment(free);
    if (!widest) {
        out.status = PointConstruction::Status::WidthExhaustion;
        out.reason = "final interval consumed by deeper balls";
        out.levels_processed = J;
        return out;
    }
    double y = cur_lo + 0.5 * (widest->lo + widest->hi);
    if (y >= 1.0) y -= 1.0;
    out.y = y;
    out.final_length = widest->hi - widest->lo;
    out.levels_processed = J;
    out.status = PointConstruction::Status::Success;
    return out;
}

} // namespace rws::analysis
