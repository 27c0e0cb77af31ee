#ifndef RWS_IO_HPP
#define RWS_IO_HPP

#include <string>

#include "rws/config.hpp"
#include "rws/synth.hpp"
#include "rws/tree.hpp"

namespace rws::io {

// Tree-sample file, normative for cross-run comparisons:
//   magic "HMTT", version u8 (= 1), J u8, seed u64 LE,
//   schedule fingerprint 16 bytes, then the levels 0..J concatenated,
//   bit-packed little-endian (bit k of a level lives in byte k>>3, bit k&7).
void write_tree(const std::string& path, const tree::TreeSample& t);
tree::TreeSample read_tree(const std::string& path);

// Path exports: CSV `x,value` with 17 significant digits, or raw
// little-endian 64-bit floats plus a JSON sidecar.
void write_path_csv(const std::string& path, const synth::SamplePath& p);
Eigen::ArrayXd read_path_csv(const std::string& path);

void write_path_f64(const std::string& path, const synth::SamplePath& p);
Eigen::ArrayXd read_path_f64(const std::string& path);

void write_path_sidecar(const std::string& path, const synth::SamplePath& p,
                        const RunConfig& config, double h_low, double h_high);

std::string format_double(double v); // 17 significant digits, round-trip safe

} // namespace rws::io

#endif
