#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rws/config.hpp"
#include "rws/errors.hpp"
#include "rws/io.hpp"
#include "rws/synth.hpp"

using namespace rws;

namespace {

std::string minimal_config() {
    return "[schedule]\n"
           "family = constant\n"
           "p = 0.7\n"
           "q = 0.0\n"
           "initial_law = 1.0\n"
           "[model]\n"
           "h_low = 0.5\n"
           "h_high = 3\n"
           "[run]\n"
           "J = 16\n"
           "grid_exponent = 20\n"
           "seed = 1\n";
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("minimal config parses with defaults") {
    auto cfg = parse_config(minimal_config());
    CHECK(cfg.h_low == 0.5);
    CHECK(cfg.h_high == 3.0);
    CHECK(cfg.J == 16);
    CHECK(cfg.grid_log2 == 20);
    CHECK(cfg.seed == 1);
    CHECK(cfg.j_min == 0);
    CHECK(cfg.schedule.has_value());
    CHECK(cfg.fingerprint_hex().size() == 32);
}

TEST_CASE("config rejections name the constraint with a line number") {
    auto bad = minimal_config();
    bad.replace(bad.find("h_low = 0.5"), 11, "h_low = 5.0");
    CHECK_THROWS_WITH_AS(parse_config(bad), doctest::Contains("0 < h_low < h_high"),
                         ConfigError);

    CHECK_THROWS_WITH_AS(parse_config("[schedule]\nfamily = constant\nbogus = 1\n"),
                         doctest::Contains("line 3"), ConfigError);

    auto deep = minimal_config();
    deep.replace(deep.find("J = 16"), 6, "J = 31");
    CHECK_THROWS_AS(parse_config(deep), ConfigError);
}

TEST_CASE("infinite h_high token") {
    auto text = minimal_config();
    text.replace(text.find("h_high = 3"), 10, "h_high = inf");
    auto cfg = parse_config(text);
    CHECK(std::isinf(cfg.h_high));
}

TEST_CASE("product-bernoulli and sparse-badic configs") {
    auto cfg = parse_config(
        "[schedule]\n"
        "family = product-bernoulli\n"
        "p_kind = constant\np_amplitude = 0.6\np_rate = 0\n"
        "q_kind = eta-geometric\nq_amplitude = 1.0\nq_rate = 0.5\n"
        "[model]\nh_low = 1\nh_high = 5\n[run]\nJ = 12\n");
    CHECK(cfg.schedule->eta(4) == doctest::Approx(std::exp2(-2.0)));
    CHECK(cfg.grid_log2 == 16); // default J + 4

    auto r4 = parse_config(
        "[schedule]\nfamily = sparse-badic\na = 0.3\nb = 2\n"
        "[model]\nh_low = 1\nh_high = 5\n[run]\nJ = 10\n");
    CHECK(std::get_if<SparseBadicFamily>(&r4.schedule->family()) != nullptr);
}

TEST_CASE("table config with consecutive rows") {
    auto cfg = parse_config(
        "[schedule]\n"
        "family = table\n"
        "row1 = 0 0 0 0 1\n"
        "row1 = 1 0.09 0.21 0.21 0.49\n"
        "row0 = 0 1 0 0 0\n"
        "[model]\nh_low = 0.5\nh_high = 2\n[run]\nJ = 8\n");
    CHECK(cfg.schedule->kernel_at(0, 1).p11 == 1.0);
    CHECK(cfg.schedule->kernel_at(5, 1).p11 == doctest::Approx(0.49));

    CHECK_THROWS_AS(parse_config("[schedule]\nfamily = table\nrow1 = 2 1 0 0 0\n"
                                 "row0 = 0 1 0 0 0\n[model]\nh_low = 1\nh_high = 2\n"
                                 "[run]\nJ = 4\n"),
                    ConfigError);
}

TEST_CASE("depth cap honors the environment override") {
    auto deep = minimal_config();
    deep.replace(deep.find("J = 16"), 6, "J = 28");
    deep.replace(deep.find("grid_exponent = 20"), 18, "grid_exponent = 32");
    CHECK_THROWS_AS(parse_config(deep), ConfigError);
    setenv("RWS_DEPTH_CAP", "30", 1);
    auto cfg = parse_config(deep);
    CHECK(cfg.J == 28);
    CHECK(cfg.depth_cap == 30);
    unsetenv("RWS_DEPTH_CAP");
}

TEST_CASE("tree files round-trip byte-identically") {
    auto s = KernelSchedule::constant(0.6, 0.1, 0.9);
    auto t = tree::sample_tree(s, 12, 4242);
    const std::string path = "/tmp/rws_test_tree.hmtt";
    io::write_tree(path, t);
    auto back = io::read_tree(path);
    CHECK(back.max_level() == 12);
    CHECK(back.seed() == 4242);
    CHECK(back.schedule_fingerprint() == t.schedule_fingerprint());
    for (int j = 0; j <= 12; ++j) CHECK(back.level_words(j) == t.level_words(j));
    const std::string first = slurp(path);
    io::write_tree(path, back);
    CHECK(slurp(path) == first);
    std::remove(path.c_str());
}

TEST_CASE("tree file layout is normative") {
    // hand-built sample: root 1; level 1 = (1, 0); level 2 = (0, 1, 0, 0)
    tree::TreeSample t(2, 0x0102030405060708ull, {});
    t.set(0, 0);
    t.set(1, 0);
    t.set(2, 1);
    const std::string path = "/tmp/rws_test_golden.hmtt";
    io::write_tree(path, t);
    const std::string bytes = slurp(path);
    REQUIRE(bytes.size() == 4 + 1 + 1 + 8 + 16 + 3);
    CHECK(bytes.substr(0, 4) == "HMTT");
    CHECK(bytes[4] == 1); // version
    CHECK(bytes[5] == 2); // J
    // seed little-endian
    const unsigned char* b = reinterpret_cast<const unsigned char*>(bytes.data());
    CHECK(b[6] == 0x08);
    CHECK(b[13] == 0x01);
    // levels bit-packed LSB-first: level 0 = 0b1, level 1 = 0b01, level 2 = 0b0010
    CHECK(b[30] == 0x01);
    CHECK(b[31] == 0x01);
    CHECK(b[32] == 0x02);
    std::remove(path.c_str());
}

TEST_CASE("path exports round-trip") {
    auto s = KernelSchedule::constant(0.6, 0.1, 1.0);
    auto t = tree::sample_tree(s, 6, 7);
    auto field = synth::coefficients(t, 0.5, 3.0);
    auto p = synth::synthesize(field, synth::Wavelet::meyer_smooth(), 10);

    const std::string csv = "/tmp/rws_test_path.csv";
    io::write_path_csv(csv, p);
    auto back = io::read_path_csv(csv);
    REQUIRE(back.size() == p.values.size());
    CHECK((back == p.values).all()); // 17 significant digits round-trip

    const std::string f64 = "/tmp/rws_test_path.f64";
    io::write_path_f64(f64, p);
    auto back2 = io::read_path_f64(f64);
    REQUIRE(back2.size() == p.values.size());
    CHECK((back2 == p.values).all());
    const std::string first = slurp(f64);
    synth::SamplePath rewrite = p;
    rewrite.values = back2;
    io::write_path_f64(f64, rewrite);
    CHECK(slurp(f64) == first);

    std::remove(csv.c_str());
    std::remove(f64.c_str());
}
