#include "rws/tree.hpp"

#include <bit>
#include <cmath>

#include "rws/errors.hpp"
#include "rws/rng.hpp"

namespace rws::tree {

TreeSample::TreeSample(int max_level, std::uint64_t seed,
                       std::array<std::uint8_t, 16> fingerprint)
    : max_level_(max_level), seed_(seed), fingerprint_(fingerprint) {
    levels_.resize(max_level_ + 1);
    for (int j = 0; j <= max_level_; ++j)
        levels_[j].assign(((1ull << j) + 63) >> 6, 0ull);
}

void TreeSample::check_level(int j) const {
    if (j < 0 || j > max_level_)
        throw RangeError("level " + std::to_string(j) + " outside sampled depth " +
                         std::to_string(max_level_));
}

std::uint64_t TreeSample::count_ones(int j) const {
    check_level(j);
    std::uint64_t n = 0;
    for (std::uint64_t w : levels_[j]) n += std::popcount(w);
    return n;
}

TreeSample sample_tree(const KernelSchedule& schedule, int J, std::uint64_t seed,
                       int depth_cap) {
    if (J < 0) throw RangeError("tree depth must be nonnegative");
    if (J > depth_cap)
        throw ConfigError("tree depth " + std::to_string(J) + " exceeds the depth cap " +
                          std::to_string(depth_cap));
    TreeSample t(J, seed, schedule.fingerprint());

    const bool root_one = vertex_uniform(seed, -1, 0) < schedule.initial_law();
    if (root_one) t.set(0, 0);

    for (int j = 0; j < J; ++j) {
        const PairDistribution d1 = schedule.kernel_at(j, 1);
        const PairDistribution d0 = schedule.kernel_at(j, 0);
        const bool skip_zero_parents = d0.p00 == 1.0;
        const std::uint64_t n = 1ull << j;
        for (std::uint64_t k = 0; k < n; ++k) {
            const bool one = t.get(j, k);
            if (!one && skip_zero_parents) continue;
            const PairDistribution& d = one ? d1 : d0;
            const int outcome =
                d.degenerate()
                    ? d.sample(0.0)
                    : d.sample(vertex_uniform(seed, j, k));
            if (outcome & 2) t.set(j + 1, k << 1);
            if (outcome & 1) t.set(j + 1, (k << 1) | 1);
        }
    }
    return t;
}

std::vector<std::uint64_t> level_ones(const TreeSample& tree, int j) {
    tree.check_level(j);
    std::vector<std::uint64_t> out;
    const auto& words = tree.level_words(j);
    for (std::size_t w = 0; w < words.size(); ++w) {
        std::uint64_t bits = words[w];
        while (bits) {
            const int b = std::countr_zero(bits);
            out.push_back((static_cast<std::uint64_t>(w) << 6) | static_cast<unsigned>(b));
            bits &= bits - 1;
        }
    }
    return out;
}

std::vector<std::uint64_t> fresh_ones(const TreeSample& tree, int j) {
    if (j < 1) throw RangeError("fresh vertices exist from level 1 on");
    tree.check_level(j);
    std::vector<std::uint64_t> out;
    for (std::uint64_t k : level_ones(tree, j))
        if (!tree.get(j - 1, k >> 1)) out.push_back(k);
    return out;
}

ThetaCover theta_cover(const TreeSample& tree) {
    const int J = tree.max_level();
    ThetaCover cover;
    cover.J = J;
    cover.offsets = level_ones(tree, J);
    cover.run_length.reserve(cover.offsets.size());
    for (std::uint64_t k : cover.offsets) {
        std::int32_t run = 1;
        std::uint64_t a = k;
        for (int j = J - 1; j >= 0; --j) {
            a >>= 1;
            if (!tree.get(j, a)) break;
            ++run;
        }
        cover.run_length.push_back(run);
    }
    return cover;
}

std::map<int, long long> dyadic_cover_counts(const std::vector<std::uint64_t>& offsets,
                                             int from_level) {
    std::map<int, long long> counts;
    for (int j = 0; j <= from_level; ++j) {
        const int shift = from_level - j;
        long long n = 0;
        std::uint64_t prev = ~0ull;
        for (std::uint64_t k : offsets) {
            const std::uint64_t box = k >> shift;
            if (box != prev) {
                ++n;
                prev = box;
            }
        }
        counts[j] = n;
    }
    return counts;
}

bool subtree_reaches(const TreeSample& tree, VertexIndex u, int J) {
    tree.check_level(u.level);
    if (J > tree.max_level()) throw RangeError("target level beyond sampled depth");
    if (!tree.get(u.level, u.offset)) return false;
    std::vector<VertexIndex> stack{u};
    while (!stack.empty()) {
        const VertexIndex v = stack.back();
        stack.pop_back();
        if (v.level == J) return true;
        for (int side : {0, 1}) {
            const VertexIndex c = v.child(side);
            if (tree.get(c.level, c.offset)) stack.push_back(c);
        }
    }
    return false;
}

} // namespace rws::tree
