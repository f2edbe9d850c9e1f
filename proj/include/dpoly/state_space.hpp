#pragma once

// Enumeration of all closed paths of length L in Z^d, with a bijection
// between paths and indices 0..|Omega_L|-1.
//
// States are packed into a 64-bit key, first site in the most significant
// bits, so that numeric order of keys is lexicographic order of the code
// string.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dpoly/errors.hpp"
#include "dpoly/particle_law.hpp"
#include "dpoly/path.hpp"

namespace dpoly {

inline constexpr std::size_t kDefaultStateCapacity = 2'000'000;

class StateIndex {
 public:
  /// Every closed path exactly once, in lexicographic code order.
  static StateIndex enumerate(int L, int d, std::size_t capacity = kDefaultStateCapacity) {
    require_shape(L, d);
    StateIndex s(L, d);
    if (static_cast<long>(L) * s.bits_ > 64)
      throw CapacityError("path of length " + std::to_string(L) + " does not fit a 64-bit key");
    const double log_size = log_partition_function(L, d);
    if (log_size > std::log(static_cast<double>(capacity)) + 1e-9)
      throw CapacityError("state space |Omega_L| = " + std::to_string(std::exp(log_size)) +
                          " exceeds capacity " + std::to_string(capacity));
    s.keys_.reserve(static_cast<std::size_t>(std::llround(std::exp(log_size))));

    std::vector<int> pos(static_cast<std::size_t>(d), 0);
    int l1 = 0;
    auto dfs = [&](auto&& self, int site, std::uint64_t key) -> void {
      if (site == L) {
        s.keys_.push_back(key);
        return;
      }
      const int remaining = L - site - 1;
      for (int c = 0; c < 2 * d; ++c) {
        const auto a = static_cast<std::size_t>(axis_of(static_cast<Code>(c), d));
        const int step = sign_of(static_cast<Code>(c), d);
        const int before = std::abs(pos[a]);
        pos[a] += step;
        const int delta = std::abs(pos[a]) - before;
        l1 += delta;
        if (l1 <= remaining) self(self, site + 1, (key << s.bits_) | static_cast<std::uint64_t>(c));
        l1 -= delta;
        pos[a] -= step;
      }
    };
    dfs(dfs, 0, 0);
    return s;
  }

  int length() const noexcept { return L_; }
  int dim() const noexcept { return d_; }
  std::size_t size() const noexcept { return keys_.size(); }
  const std::vector<std::uint64_t>& keys() const noexcept { return keys_; }

  std::uint64_t pack(std::span<const Code> z) const noexcept {
    std::uint64_t key = 0;
    for (Code c : z) key = (key << bits_) | c;
    return key;
  }

  void unpack(std::uint64_t key, std::span<Code> out) const noexcept {
    const std::uint64_t mask = (std::uint64_t{1} << bits_) - 1;
    for (int x = L_ - 1; x >= 0; --x) {
      out[static_cast<std::size_t>(x)] = static_cast<Code>(key & mask);
      key >>= bits_;
    }
  }

  /// Index of the packed key, or size() if absent.
  std::size_t find(std::uint64_t key) const noexcept {
    auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    return (it != keys_.end() && *it == key) ? static_cast<std::size_t>(it - keys_.begin()) : keys_.size();
  }

  std::size_t find(std::span<const Code> z) const noexcept { return find(pack(z)); }

  std::size_t rank(const PolymerPath& p) const {
    if (p.length() != L_ || p.dim() != d_) throw DomainError("path shape does not match index");
    const std::size_t i = find(p.increments());
    if (i == size()) throw InvalidPathError("path not present in index");
    return i;
  }

  PolymerPath unrank(std::size_t i) const {
    std::vector<Code> z(static_cast<std::size_t>(L_));
    unpack(keys_.at(i), z);
    return PolymerPath(d_, std::move(z));
  }

  void codes(std::size_t i, std::span<Code> out) const { unpack(keys_[i], out); }

 private:
  StateIndex(int L, int d) : L_(L), d_(d) {
    bits_ = 1;
    while ((1 << bits_) < 2 * d) ++bits_;
  }

  int L_;
  int d_;
  int bits_;
  std::vector<std::uint64_t> keys_;
};

// ---------------------------------------------------------------------------
// Symmetries of the dynamics: signed permutations of the d axes, composed
// with path reversal (zeta'_x = -zeta_{L+1-x}).  Both preserve the uniform
// measure and commute with the generator.

/// Each element maps a code to its image under a signed axis permutation.
inline std::vector<std::vector<Code>> signed_axis_permutations(int d) {
  std::vector<int> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<Code>> out;
  do {
    for (int signs = 0; signs < (1 << d); ++signs) {
      std::vector<Code> map(static_cast<std::size_t>(2 * d));
      for (int c = 0; c < 2 * d; ++c) {
        const int a = axis_of(static_cast<Code>(c), d);
        int s = sign_of(static_cast<Code>(c), d);
        if (signs & (1 << a)) s = -s;
        const int target = perm[static_cast<std::size_t>(a)];
        map[static_cast<std::size_t>(c)] = static_cast<Code>(s > 0 ? target : target + d);
      }
      out.push_back(std::move(map));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

/// Indices of one representative per symmetry orbit, and orbit sizes.
struct OrbitPartition {
  std::vector<std::size_t> representatives;
  std::vector<std::size_t> orbit_sizes;
};

inline OrbitPartition symmetry_orbits(const StateIndex& index) {
  const int L = index.length(), d = index.dim();
  const auto maps = signed_axis_permutations(d);
  std::vector<char> seen(index.size(), 0);
  OrbitPartition out;
  std::vector<Code> z(static_cast<std::size_t>(L)), img(static_cast<std::size_t>(L));
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (seen[i]) continue;
    index.codes(i, z);
    members.clear();
    for (const auto& m : maps) {
      for (int reversed = 0; reversed < 2; ++reversed) {
        for (int x = 0; x < L; ++x) {
          const Code c = reversed ? negate(z[static_cast<std::size_t>(L - 1 - x)], d) : z[static_cast<std::size_t>(x)];
          img[static_cast<std::size_t>(x)] = m[c];
        }
        const std::size_t j = index.find(img);
        if (!seen[j]) {
          seen[j] = 1;
          members.push_back(j);
        }
      }
    }
    out.representatives.push_back(i);
    out.orbit_sizes.push_back(members.size());
  }
  return out;
}

}  // namespace dpoly
