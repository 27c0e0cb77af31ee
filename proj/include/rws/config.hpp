#ifndef RWS_CONFIG_HPP
#define RWS_CONFIG_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "rws/kernels.hpp"

namespace rws {

// One config drives every subcommand, so an experiment is reproducible from
// a single file.  Structured text: [section] headers, key = value lines,
// '#' comments.  Unknown keys and domain violations are reported with line
// numbers.
struct RunConfig {
    std::optional<KernelSchedule> schedule;
    double h_low = 0.0;
    double h_high = 0.0; // may be +inf (token "inf")
    int J = 0;
    int grid_log2 = 0;
    std::uint64_t seed = 1;
    int j_min = 0;              // 0: ceil(J/2)
    double probe_ceiling = 0.0; // 0: 8 h_low
    std::string output_dir = ".";
    int depth_cap = 26;

    // hash of the normalized config text; embedded in every artifact
    std::array<std::uint8_t, 16> fingerprint{};
    std::string fingerprint_hex() const;
};

// Depth cap: default 26, overridable through the environment variable
// RWS_DEPTH_CAP.
int depth_cap_from_env();

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

} // namespace rws

#endif
