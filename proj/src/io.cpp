#include "rws/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "rws/errors.hpp"

namespace rws::io {

namespace {

void put_u64_le(std::ostream& os, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64_le(std::istream& is) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        const int c = is.get();
        if (c == EOF) throw RangeError("truncated tree file");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_tree(const std::string& path, const tree::TreeSample& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os.write("HMTT", 4);
    os.put(1); // version
    os.put(static_cast<char>(t.max_level()));
    put_u64_le(os, t.seed());
    os.write(reinterpret_cast<const char*>(t.schedule_fingerprint().data()), 16);
    for (int j = 0; j <= t.max_level(); ++j) {
        const auto& words = t.level_words(j);
        const std::uint64_t bits = 1ull << j;
        const std::uint64_t bytes = (bits + 7) >> 3;
        for (std::uint64_t byte = 0; byte < bytes; ++byte) {
            const std::uint64_t word = words[byte >> 3];
            os.put(static_cast<char>((word >> (8 * (byte & 7))) & 0xff));
        }
    }
    if (!os) throw ConfigError("write failed: " + path);
}

tree::TreeSample read_tree(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open for reading: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "HMTT", 4) != 0)
        throw ConfigError("not a tree-sample file: " + path);
    const int version = is.get();
    if (version != 1) throw ConfigError("unsupported tree file version");
    const int J = is.get();
    if (J < 0 || J > 40) throw ConfigError("corrupt tree file: bad depth");
    const std::uint64_t seed = get_u64_le(is);
    std::array<std::uint8_t, 16> fp{};
    is.read(reinterpret_cast<char*>(fp.data()), 16);
    if (!is) throw ConfigError("truncated tree file");
    tree::TreeSample t(J, seed, fp);
    for (int j = 0; j <= J; ++j) {
        auto& words = t.level_words(j);
        const std::uint64_t bits = 1ull << j;
        const std::uint64_t bytes = (bits + 7) >> 3;
        for (std::uint64_t byte = 0; byte < bytes; ++byte) {
            const int c = is.get();
            if (c == EOF) throw ConfigError("truncated tree file");
            words[byte >> 3] |= static_cast<std::uint64_t>(static_cast<unsigned char>(c))
                                << (8 * (byte & 7));
        }
    }
    return t;
}

void write_path_csv(const std::string& path, const synth::SamplePath& p) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << "x,value\n";
    const auto N = p.values.size();
    for (Eigen::Index n = 0; n < N; ++n) {
        os << format_double(static_cast<double>(n) / static_cast<double>(N)) << ','
           << format_double(p.values[n]) << '\n';
    }
    if (!os) throw ConfigError("write failed: " + path);
}

Eigen::ArrayXd read_path_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open for reading: " + path);
    std::string line;
    std::getline(is, line); // header
    std::vector<double> vals;
    while (std::getline(is, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("malformed csv line");
        vals.push_back(std::stod(line.substr(comma + 1)));
    }
    Eigen::ArrayXd out(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) out[static_cast<Eigen::Index>(i)] = vals[i];
    return out;
}

void write_path_f64(const std::string& path, const synth::SamplePath& p) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    for (Eigen::Index n = 0; n < p.values.size(); ++n) {
        const double v = p.values[n];
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64_le(os, bits);
    }
    if (!os) throw ConfigError("write failed: " + path);
}

Eigen::ArrayXd read_path_f64(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open for reading: " + path);
    std::vector<double> vals;
    for (;;) {
        const int peek = is.peek();
        if (peek == EOF) break;
        const std::uint64_t bits = get_u64_le(is);
        double v;
        std::memcpy(&v, &bits, 8);
        vals.push_back(v);
    }
    Eigen::ArrayXd out(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) out[static_cast<Eigen::Index>(i)] = vals[i];
    return out;
}

void write_path_sidecar(const std::string& path, const synth::SamplePath& p,
                        const RunConfig& config, double h_low, double h_high) {
    nlohmann::json j;
    j["n"] = p.values.size();
    j["grid_exponent"] = p.grid_log2;
    j["J"] = p.J;
    j["wavelet"] = p.wavelet;
    j["h_low"] = h_low;
    j["h_high"] = std::isinf(h_high) ? nlohmann::json("inf") : nlohmann::json(h_high);
    j["tail_bound"] = p.tail_bound;
    j["config_fingerprint"] = config.fingerprint_hex();
    j["seed"] = config.seed;
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << j.dump(2) << '\n';
}

} // namespace rws::io
