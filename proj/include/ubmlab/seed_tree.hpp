#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ubmlab {

/// Hierarchical seed derivation.
///
/// A SeedTree is a master seed plus a path of (label, index) pairs. Each node
/// carries a 64-bit key obtained by hashing its parent's key with the label and
/// index, so the stream for a given path never depends on the order in which
/// other paths were visited. This is what makes Monte Carlo output independent
/// of the worker schedule.
class SeedTree {
public:
    using Step = std::pair<std::string, std::uint64_t>;

    explicit SeedTree(std::uint64_t master);

    [[nodiscard]] SeedTree child(std::string_view label, std::uint64_t index = 0) const;

    [[nodiscard]] std::uint64_t master() const noexcept { return master_; }
    [[nodiscard]] const std::vector<Step>& path() const noexcept { return path_; }
    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

    /// Fresh engine positioned at the start of this node's stream.
    [[nodiscard]] std::mt19937_64 engine() const;

    /// "master/label:index/label:index", stable and human readable.
    [[nodiscard]] std::string path_string() const;

    friend bool operator==(const SeedTree& a, const SeedTree& b) {
        return a.master_ == b.master_ && a.path_ == b.path_;
    }

private:
    std::uint64_t master_;
    std::vector<Step> path_;
    std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace ubmlab
