#include "rws/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rws/errors.hpp"

namespace rws {

bool PairDistribution::valid(double tol) const {
    const double entries[4] = {p00, p01, p10, p11};
    for (double p : entries) {
        if (!(p >= 0.0 && p <= 1.0)) return false;
    }
    return std::fabs(sum() - 1.0) <= tol;
}

bool PairDistribution::degenerate() const {
    return p00 == 1.0 || p01 == 1.0 || p10 == 1.0 || p11 == 1.0;
}

PairDistribution PairDistribution::product_bernoulli(double per_child) {
    const double v = per_child;
    const double w = 1.0 - v;
    return PairDistribution{w * w, w * v, v * w, v * v};
}

PairDistribution PairDistribution::point_mass(int child0, int child1) {
    PairDistribution d;
    if (child0 == 0 && child1 == 0) d.p00 = 1.0;
    else if (child0 == 0 && child1 == 1) d.p01 = 1.0;
    else if (child0 == 1 && child1 == 0) d.p10 = 1.0;
    else d.p11 = 1.0;
    return d;
}

int PairDistribution::sample(double u) const {
    if (u < p00) return 0;
    u -= p00;
    if (u < p01) return 1;
    u -= p01;
    if (u < p10) return 2;
    return 3;
}

double SequenceSpec::value_at(int j) const {
    switch (kind) {
        case Kind::Constant:
            return amplitude;
        case Kind::Geometric:
            return amplitude * std::exp2(-rate * static_cast<double>(j));
        case Kind::Power:
            return amplitude * std::pow(static_cast<double>(j) + 1.0, -rate);
        case Kind::EtaGeometric:
            return std::min(1.0, amplitude * std::exp2(-rate * static_cast<double>(j)));
    }
    return 0.0;
}

double SequenceSpec::bernoulli_at(int j) const {
    if (kind == Kind::EtaGeometric) {
        // q solving 1-(1-q)^2 = eta, in the cancellation-free form
        const double eta = value_at(j);
        return eta / (1.0 + std::sqrt(std::max(0.0, 1.0 - eta)));
    }
    const double v = value_at(j);
    if (v < 0.0 || v > 1.0)
        throw ConfigError("sequence value " + std::to_string(v) + " at level " +
                          std::to_string(j) + " is not a probability");
    return v;
}

std::string SequenceSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Constant: os << "const"; break;
        case Kind::Geometric: os << "geometric"; break;
        case Kind::Power: os << "power"; break;
        case Kind::EtaGeometric: os << "eta-geometric"; break;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%.17g,%.17g)", amplitude, rate);
    return os.str() + buf;
}

namespace {

// floor(log_b(x)) for x >= 1 by exact integer search.
int floor_log(long long x, int b) {
    int e = 0;
    long long power = 1;
    while (power * b <= x) {
        power *= b;
        ++e;
    }
    return e;
}

long long ipow(int b, int e) {
    long long r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

} // namespace

std::pair<double, double> SparseBadicFamily::bracket_log2(double a, int b, long long jn) {
    const double lo = -static_cast<double>(jn - 1);
    const double hi = -2.0 * std::log2(static_cast<double>(jn)) +
                      (a * (1.0 - 1.0 / b) - 1.0) * static_cast<double>(jn);
    return {lo, hi};
}

double SparseBadicFamily::p_at(int j) const {
    if (j == 0) return std::exp2(-a);
    const long long hi = ipow(b, floor_log(j + 1, b));
    const long long lo = ipow(b, floor_log(j, b));
    return std::exp2(-a * static_cast<double>(hi - lo));
}

double SparseBadicFamily::q_at(int j) const {
    // q lives at levels j = j_n - 1 with j_n = b^(n+1) - 1, n > n0.
    const long long jn = static_cast<long long>(j) + 1;
    long long power = b; // b^(n+1) for n = 0
    int n = 0;
    while (power - 1 < jn) {
        power *= b;
        ++n;
    }
    if (power - 1 != jn || n <= n0) return 0.0;
    auto [lo, hi] = bracket_log2(a, b, jn);
    if (lo >= hi) return 0.0;
    return std::exp2(0.5 * (lo + hi));
}

KernelSchedule::KernelSchedule(KernelFamily family, double initial_law)
    : family_(std::move(family)), initial_law_(initial_law) {
    if (!(initial_law_ >= 0.0 && initial_law_ <= 1.0))
        throw ConfigError("initial_law must lie in [0,1]");
    if (auto* c = std::get_if<ConstantFamily>(&family_)) {
        if (!(c->p >= 0.0 && c->p <= 1.0 && c->q >= 0.0 && c->q <= 1.0))
            throw ConfigError("constant family probabilities must lie in [0,1]");
    } else if (auto* t = std::get_if<TableFamily>(&family_)) {
        if (t->rows1.empty() || t->rows0.empty())
            throw ConfigError("table family needs at least one row per parent state");
    } else if (auto* r = std::get_if<SparseBadicFamily>(&family_)) {
        if (!(r->a > 0.0 && r->a < 1.0))
            throw ConfigError("sparse-badic parameter a must lie in (0,1)");
        if (r->b < 2) throw ConfigError("sparse-badic parameter b must be an integer >= 2");
    } else if (auto* pb = std::get_if<ProductBernoulliFamily>(&family_)) {
        // probe a few levels so bad amplitudes fail at construction
        for (int j : {0, 1, 2, 7, 31}) {
            (void)pb->p_seq.bernoulli_at(j);
            (void)pb->q_seq.bernoulli_at(j);
        }
    }
}

KernelSchedule KernelSchedule::constant(double p, double q, double initial_law) {
    return KernelSchedule(ConstantFamily{p, q}, initial_law);
}

KernelSchedule KernelSchedule::product_bernoulli(SequenceSpec p_seq, SequenceSpec q_seq,
                                                 double initial_law) {
    return KernelSchedule(ProductBernoulliFamily{p_seq, q_seq}, initial_law);
}

KernelSchedule KernelSchedule::table(std::vector<PairDistribution> rows1,
                                     std::vector<PairDistribution> rows0,
                                     double initial_law) {
    return KernelSchedule(TableFamily{std::move(rows1), std::move(rows0)}, initial_law);
}

KernelSchedule KernelSchedule::sparse_badic(double a, int b, double initial_law) {
    SparseBadicFamily fam{a, b, 0};
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("sparse-badic parameter a must lie in (0,1)");
    if (b < 2) throw ConfigError("sparse-badic parameter b must be an integer >= 2");
    // n0 = first n whose bracket is nonempty; q is emitted for n > n0 only.
    int n = 0;
    long long jn = b; // b^(n+1)
    for (;; ++n) {
        auto [lo, hi] = SparseBadicFamily::bracket_log2(a, b, jn - 1);
        if (lo < hi) break;
        if (jn > (1ll << 40)) throw ConfigError("sparse-badic bracket never becomes nonempty");
        jn *= b;
    }
    fam.n0 = n;
    return KernelSchedule(fam, initial_law);
}

PairDistribution KernelSchedule::kernel_at(int j, int parent_state) const {
    if (j < 0) throw RangeError("kernel level must be nonnegative");
    return std::visit(
        [&](const auto& fam) -> PairDistribution {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, ConstantFamily>) {
                return PairDistribution::product_bernoulli(parent_state == 1 ? fam.p
                                                                             : fam.q);
            } else if constexpr (std::is_same_v<T, ProductBernoulliFamily>) {
                const SequenceSpec& seq = parent_state == 1 ? fam.p_seq : fam.q_seq;
                return PairDistribution::product_bernoulli(seq.bernoulli_at(j));
            } else if constexpr (std::is_same_v<T, TableFamily>) {
                const auto& rows = parent_state == 1 ? fam.rows1 : fam.rows0;
                const std::size_t idx =
                    std::min<std::size_t>(static_cast<std::size_t>(j), rows.size() - 1);
                return rows[idx];
            } else {
                return PairDistribution::product_bernoulli(
                    parent_state == 1 ? fam.p_at(j) : fam.q_at(j));
            }
        },
        family_);
}

double KernelSchedule::gamma(int j) const {
    if (j < 0) throw RangeError("kernel level must be nonnegative");
    return std::visit(
        [&](const auto& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, ConstantFamily>) {
                return 2.0 * fam.p;
            } else if constexpr (std::is_same_v<T, ProductBernoulliFamily>) {
                return 2.0 * fam.p_seq.bernoulli_at(j);
            } else if constexpr (std::is_same_v<T, TableFamily>) {
                const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(j),
                                                              fam.rows1.size() - 1);
                return fam.rows1[idx].expected_ones();
            } else {
                return 2.0 * fam.p_at(j);
            }
        },
        family_);
}

double KernelSchedule::eta(int j) const {
    if (j < 0) throw RangeError("kernel level must be nonnegative");
    return std::visit(
        [&](const auto& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, ConstantFamily>) {
                return fam.q * (2.0 - fam.q);
            } else if constexpr (std::is_same_v<T, ProductBernoulliFamily>) {
                if (fam.q_seq.kind == SequenceSpec::Kind::EtaGeometric)
                    return fam.q_seq.value_at(j); // exact by construction
                const double q = fam.q_seq.bernoulli_at(j);
                return q * (2.0 - q);
            } else if constexpr (std::is_same_v<T, TableFamily>) {
                const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(j),
                                                              fam.rows0.size() - 1);
                return 1.0 - fam.rows0[idx].mass_none();
            } else {
                const double q = fam.q_at(j);
                return q * (2.0 - q);
            }
        },
        family_);
}

std::string KernelSchedule::describe() const {
    std::ostringstream os;
    char buf[128];
    std::visit(
        [&](const auto& fam) {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, ConstantFamily>) {
                std::snprintf(buf, sizeof buf, "constant p=%.17g q=%.17g", fam.p, fam.q);
                os << buf;
            } else if constexpr (std::is_same_v<T, ProductBernoulliFamily>) {
                os << "product-bernoulli p=" << fam.p_seq.describe()
                   << " q=" << fam.q_seq.describe();
            } else if constexpr (std::is_same_v<T, TableFamily>) {
                os << "table";
                auto dump = [&](const char* tag, const std::vector<PairDistribution>& rows) {
                    os << ' ' << tag << '[';
                    for (const auto& r : rows) {
                        std::snprintf(buf, sizeof buf, "(%.17g,%.17g,%.17g,%.17g)", r.p00,
                                      r.p01, r.p10, r.p11);
                        os << buf;
                    }
                    os << ']';
                };
                dump("s1", fam.rows1);
                dump("s0", fam.rows0);
            } else {
                std::snprintf(buf, sizeof buf, "sparse-badic a=%.17g b=%d n0=%d", fam.a, fam.b,
                              fam.n0);
                os << buf;
            }
        },
        family_);
    std::snprintf(buf, sizeof buf, " initial_law=%.17g", initial_law_);
    os << buf;
    return os.str();
}

std::array<std::uint8_t, 16> KernelSchedule::fingerprint() const {
    // two-lane FNV-1a over the canonical description
    const std::string text = describe();
    std::uint64_t h1 = 0xcbf29ce484222325ull;
    std::uint64_t h2 = 0x84222325cbf29ce4ull;
    for (unsigned char c : text) {
        h1 = (h1 ^ c) * 0x100000001b3ull;
        h2 = (h2 ^ (c + 0x9Eu)) * 0x100000001b3ull;
    }
    std::array<std::uint8_t, 16> out{};
    for (int i = 0; i < 8; ++i) {
        out[i] = static_cast<std::uint8_t>(h1 >> (8 * i));
        out[8 + i] = static_cast<std::uint8_t>(h2 >> (8 * i));
    }
    return out;
}

PairDistribution kernel_at(const KernelSchedule& schedule, int j, int parent_state) {
    return schedule.kernel_at(j, parent_state);
}

KernelSchedule sparse_badic_schedule(double a, int b, double initial_law) {
    return KernelSchedule::sparse_badic(a, b, initial_law);
}

} // namespace rws
