#include "rws/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "rws/errors.hpp"
#include "rws/tree.hpp"

namespace rws {

namespace {

struct Line {
    int number;
    std::string section;
    std::string key;
    std::string value;
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_real(const Line& l) {
    if (l.value == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double v = std::stod(l.value, &pos);
        if (pos != l.value.size()) fail(l.number, "trailing characters in number");
        return v;
    } catch (const std::invalid_argument&) {
        fail(l.number, "expected a number, got '" + l.value + "'");
    } catch (const std::out_of_range&) {
        fail(l.number, "number out of range");
    }
}

long long parse_int(const Line& l) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(l.value, &pos);
        if (pos != l.value.size()) fail(l.number, "trailing characters in integer");
        return v;
    } catch (const std::invalid_argument&) {
        fail(l.number, "expected an integer, got '" + l.value + "'");
    } catch (const std::out_of_range&) {
        fail(l.number, "integer out of range");
    }
}

SequenceSpec::Kind sequence_kind(const Line& l) {
    if (l.value == "constant") return SequenceSpec::Kind::Constant;
    if (l.value == "geometric") return SequenceSpec::Kind::Geometric;
    if (l.value == "power") return SequenceSpec::Kind::Power;
    if (l.value == "eta-geometric") return SequenceSpec::Kind::EtaGeometric;
    fail(l.number, "unknown sequence kind '" + l.value + "'");
}

PairDistribution parse_row(const Line& l, int expected_level) {
    std::istringstream is(l.value);
    int j;
    PairDistribution d;
    if (!(is >> j >> d.p00 >> d.p01 >> d.p10 >> d.p11))
        fail(l.number, "row needs: level p00 p01 p10 p11");
    std::string rest;
    if (is >> rest) fail(l.number, "trailing characters in row");
    if (j != expected_level)
        fail(l.number, "rows must list consecutive levels starting at 0; expected level " +
                           std::to_string(expected_level));
    if (!d.valid(1e-9)) fail(l.number, "row probabilities must be in [0,1] and sum to 1");
    return d;
}

} // namespace

int depth_cap_from_env() {
    if (const char* v = std::getenv("RWS_DEPTH_CAP")) {
        const int cap = std::atoi(v);
        if (cap >= 1 && cap <= 40) return cap;
    }
    return tree::kDefaultDepthCap;
}

std::string RunConfig::fingerprint_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (auto byte : fingerprint) {
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 15]);
    }
    return out;
}

RunConfig parse_config(const std::string& text) {
    std::vector<Line> lines;
    {
        std::istringstream is(text);
        std::string raw;
        int number = 0;
        std::string section;
        while (std::getline(is, raw)) {
            ++number;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw = raw.substr(0, hash);
            const std::string s = trim(raw);
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']') fail(number, "unterminated section header");
                section = trim(s.substr(1, s.size() - 2));
                if (section != "schedule" && section != "model" && section != "run")
                    fail(number, "unknown section '" + section + "'");
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) fail(number, "expected key = value");
            if (section.empty()) fail(number, "key outside any section");
            lines.push_back({number, section, trim(s.substr(0, eq)), trim(s.substr(eq + 1))});
        }
    }

    RunConfig cfg;
    cfg.depth_cap = depth_cap_from_env();

    std::string family;
    double p = -1, q = -1, a = -1, initial_law = 1.0;
    int b = 0;
    SequenceSpec pseq{SequenceSpec::Kind::Constant, -1, 0};
    SequenceSpec qseq{SequenceSpec::Kind::Constant, -1, 0};
    bool pseq_kind_set = false, qseq_kind_set = false;
    std::vector<PairDistribution> rows1, rows0;

    bool have_h_low = false, have_h_high = false, have_J = false, have_m = false;

    for (const Line& l : lines) {
        if (l.section == "schedule") {
            if (l.key == "family") family = l.value;
            else if (l.key == "p") p = parse_real(l);
            else if (l.key == "q") q = parse_real(l);
            else if (l.key == "a") a = parse_real(l);
            else if (l.key == "b") b = static_cast<int>(parse_int(l));
            else if (l.key == "initial_law") initial_law = parse_real(l);
            else if (l.key == "p_kind") { pseq.kind = sequence_kind(l); pseq_kind_set = true; }
            else if (l.key == "p_amplitude") pseq.amplitude = parse_real(l);
            else if (l.key == "p_rate") pseq.rate = parse_real(l);
            else if (l.key == "q_kind") { qseq.kind = sequence_kind(l); qseq_kind_set = true; }
            else if (l.key == "q_amplitude") qseq.amplitude = parse_real(l);
            else if (l.key == "q_rate") qseq.rate = parse_real(l);
            else if (l.key == "row1") rows1.push_back(parse_row(l, static_cast<int>(rows1.size())));
            else if (l.key == "row0") rows0.push_back(parse_row(l, static_cast<int>(rows0.size())));
            else fail(l.number, "unknown key '" + l.key + "' in [schedule]");
        } else if (l.section == "model") {
            if (l.key == "h_low") { cfg.h_low = parse_real(l); have_h_low = true; }
            else if (l.key == "h_high") { cfg.h_high = parse_real(l); have_h_high = true; }
            else fail(l.number, "unknown key '" + l.key + "' in [model]");
        } else {
            if (l.key == "J") { cfg.J = static_cast<int>(parse_int(l)); have_J = true; }
            else if (l.key == "grid_exponent") { cfg.grid_log2 = static_cast<int>(parse_int(l)); have_m = true; }
            else if (l.key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(l));
            else if (l.key == "j_min") cfg.j_min = static_cast<int>(parse_int(l));
            else if (l.key == "probe_ceiling") cfg.probe_ceiling = parse_real(l);
            else if (l.key == "output_dir") cfg.output_dir = l.value;
            else fail(l.number, "unknown key '" + l.key + "' in [run]");
        }
    }

    if (family.empty()) throw ConfigError("config: [schedule] family is required");
    if (family == "constant") {
        if (p < 0 || q < 0) throw ConfigError("constant family needs p and q");
        cfg.schedule = KernelSchedule::constant(p, q, initial_law);
    } else if (family == "product-bernoulli") {
        if (!pseq_kind_set || !qseq_kind_set || pseq.amplitude < 0 || qseq.amplitude < 0)
            throw ConfigError(
                "product-bernoulli family needs p_kind/p_amplitude and q_kind/q_amplitude");
        cfg.schedule = KernelSchedule::product_bernoulli(pseq, qseq, initial_law);
    } else if (family == "table") {
        if (rows1.empty() || rows0.empty())
            throw ConfigError("table family needs row1 and row0 entries");
        cfg.schedule = KernelSchedule::table(rows1, rows0, initial_law);
    } else if (family == "sparse-badic") {
        if (a < 0 || b < 2)
            throw ConfigError("sparse-badic family needs a in (0,1), integer b >= 2");
        cfg.schedule = KernelSchedule::sparse_badic(a, b, initial_law);
    } else {
        throw ConfigError("unknown family '" + family + "'");
    }

    if (!have_h_low || !have_h_high)
        throw ConfigError("config: [model] h_low and h_high are required");
    if (!(cfg.h_low > 0.0) || !(cfg.h_low < cfg.h_high))
        throw ConfigError("config: exponents must satisfy 0 < h_low < h_high");
    if (!have_J) throw ConfigError("config: [run] J is required");
    if (cfg.J < 0 || cfg.J > cfg.depth_cap)
        throw ConfigError("config: J must lie in [0, " + std::to_string(cfg.depth_cap) + "]");
    if (!have_m) cfg.grid_log2 = cfg.J + 4;
    if (cfg.grid_log2 < cfg.J + 4)
        throw ConfigError("config: grid_exponent must be at least J + 4");
    if (cfg.j_min < 0 || (cfg.j_min > 0 && cfg.j_min > cfg.J))
        throw ConfigError("config: j_min must lie in [1, J] (or 0 for the default)");
    if (cfg.probe_ceiling < 0.0) throw ConfigError("config: probe_ceiling must be >= 0");

    {
        std::ostringstream canon;
        canon << cfg.schedule->describe() << "|h_low=" << cfg.h_low
              << "|h_high=" << cfg.h_high << "|J=" << cfg.J << "|m=" << cfg.grid_log2
              << "|seed=" << cfg.seed << "|j_min=" << cfg.j_min
              << "|ceiling=" << cfg.probe_ceiling;
        const std::string s = canon.str();
        std::uint64_t h1 = 0xcbf29ce484222325ull, h2 = 0x84222325cbf29ce4ull;
        for (unsigned char c : s) {
            h1 = (h1 ^ c) * 0x100000001b3ull;
            h2 = (h2 ^ (c + 0x9Eu)) * 0x100000001b3ull;
        }
        for (int i = 0; i < 8; ++i) {
            cfg.fingerprint[i] = static_cast<std::uint8_t>(h1 >> (8 * i));
            cfg.fingerprint[8 + i] = static_cast<std::uint8_t>(h2 >> (8 * i));
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace rws
