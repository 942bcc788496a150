#include "ubmlab/seed_tree.hpp"

#include <array>

namespace ubmlab {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

SeedTree::SeedTree(std::uint64_t master) : master_(master), key_(splitmix64(master)) {}

SeedTree SeedTree::child(std::string_view label, std::uint64_t index) const {
    SeedTree out = *this;
    out.path_.emplace_back(std::string(label), index);
    std::uint64_t k = splitmix64(key_ ^ fnv1a(label));
    k = splitmix64(k ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    out.key_ = k;
    return out;
}

std::mt19937_64 SeedTree::engine() const {
    std::array<std::uint32_t, 8> words{};
    std::uint64_t s = key_;
    for (std::size_t i = 0; i < words.size(); i += 2) {
        s = splitmix64(s);
        words[i] = static_cast<std::uint32_t>(s);
        words[i + 1] = static_cast<std::uint32_t>(s >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

std::string SeedTree::path_string() const {
    std::string out = std::to_string(master_);
    for (const auto& [label, index] : path_) {
        out += '/';
        out += label;
        out += ':';
        out += std::to_string(index);
    }
    return out;
}

}  // namespace ubmlab
