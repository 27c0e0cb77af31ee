#ifndef RWS_TREE_HPP
#define RWS_TREE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "rws/kernels.hpp"

namespace rws::tree {

// Vertex (j, k): the word u in {0,1}^j with k = sum u_i 2^(j-i).
struct VertexIndex {
    int level = 0;
    std::uint64_t offset = 0;

    VertexIndex father() const { return {level - 1, offset >> 1}; }
    VertexIndex child(int side) const {
        return {level + 1, (offset << 1) | static_cast<std::uint64_t>(side)};
    }
    // left endpoint of the dyadic interval lambda_u, as a torus point
    double anchor() const {
        return static_cast<double>(offset) * std::exp2(-static_cast<double>(level));
    }
    bool operator==(const VertexIndex&) const = default;
};

// One realization of the chain to depth J, one bit per vertex.
class TreeSample {
public:
    TreeSample(int max_level, std::uint64_t seed, std::array<std::uint8_t, 16> fingerprint);

    int max_level() const { return max_level_; }
    std::uint64_t seed() const { return seed_; }
    const std::array<std::uint8_t, 16>& schedule_fingerprint() const { return fingerprint_; }

    bool get(int j, std::uint64_t k) const {
        return (levels_[j][k >> 6] >> (k & 63)) & 1u;
    }
    void set(int j, std::uint64_t k) { levels_[j][k >> 6] |= 1ull << (k & 63); }

    std::uint64_t count_ones(int j) const;
    const std::vector<std::uint64_t>& level_words(int j) const { return levels_[j]; }
    std::vector<std::uint64_t>& level_words(int j) { return levels_[j]; }

    void check_level(int j) const;

private:
    int max_level_;
    std::uint64_t seed_;
    std::array<std::uint8_t, 16> fingerprint_;
    std::vector<std::vector<std::uint64_t>> levels_;
};

inline constexpr int kDefaultDepthCap = 26;

// Root from the initial law, then level by level each parent draws its child
// pair from nu_{state, level}; bit-identical for identical (schedule, J, seed).
TreeSample sample_tree(const KernelSchedule& schedule, int J, std::uint64_t seed,
                       int depth_cap = kDefaultDepthCap);

// S_j: sorted offsets of state-1 vertices at level j.
std::vector<std::uint64_t> level_ones(const TreeSample& tree, int j);

// S~_j: state-1 vertices at level j whose father is in state 0.
std::vector<std::uint64_t> fresh_ones(const TreeSample& tree, int j);

// Depth-J cover of the propagation set: the state-1 vertices of the deepest
// level, each tagged with the length of its terminal all-1 ancestor run.
struct ThetaCover {
    int J = 0;
    std::vector<std::uint64_t> offsets;
    std::vector<std::int32_t> run_length; // in [1, J+1], counts v and its 1-ancestors
};
ThetaCover theta_cover(const TreeSample& tree);

// Number of level-j dyadic intervals meeting the given level-J offsets,
// for every j in [0, from_level].
std::map<int, long long> dyadic_cover_counts(const std::vector<std::uint64_t>& offsets,
                                             int from_level);

// True iff the all-1 subtree rooted at u contains a level-J vertex.
bool subtree_reaches(const TreeSample& tree, VertexIndex u, int J);

} // namespace rws::tree

#endif
