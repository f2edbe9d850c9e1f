#pragma once

// Directed (1+d)-dimensional lattice paths stored as increment strings.
//
// An increment is a signed unit vector of Z^d coded in {0, ..., 2d-1}:
// code j < d is +e_{j+1}, code j >= d is -e_{j-d+1}.  A path of length L is
// valid when every direction has as many positive as negative steps, so
// that the heights eta_0 = eta_L = o.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpoly/errors.hpp"

namespace dpoly {

using Code = std::uint8_t;
using Point = std::vector<int>;

inline constexpr Code negate(Code c, int d) noexcept {
  return static_cast<Code>(c < d ? c + d : c - d);
}
inline constexpr int axis_of(Code c, int d) noexcept { return c % d; }
inline constexpr int sign_of(Code c, int d) noexcept { return c < d ? 1 : -1; }

inline void require_shape(int length, int dim) {
  if (dim < 1) throw DomainError("dimension d must be positive");
  if (length < 2 || length % 2 != 0)
    throw DomainError("path length L must be a positive even integer");
}

/// Particle counts (N_1, ..., N_d): N_j is the number of +e_j increments.
struct ParticleCounts {
  std::vector<int> counts;

  int total() const {
    int s = 0;
    for (int c : counts) s += c;
    return s;
  }
  bool operator==(const ParticleCounts&) const = default;
};

/// Validated, immutable closed path.
class PolymerPath {
 public:
  PolymerPath(int dim, std::vector<Code> increments)
      : dim_(dim), inc_(std::move(increments)) {
    require_shape(static_cast<int>(inc_.size()), dim_);
    std::vector<int> balance(static_cast<std::size_t>(dim_), 0);
    for (Code c : inc_) {
      if (c >= 2 * dim_) throw InvalidPathError("increment code out of range");
      balance[static_cast<std::size_t>(axis_of(c, dim_))] += sign_of(c, dim_);
    }
    for (int b : balance)
      if (b != 0) throw InvalidPathError("path does not return to the origin");
  }

  int length() const noexcept { return static_cast<int>(inc_.size()); }
  int dim() const noexcept { return dim_; }
  std::span<const Code> increments() const noexcept { return inc_; }
  Code operator[](std::size_t i) const noexcept { return inc_[i]; }

  /// Heights eta_0..eta_L.
  std::vector<Point> heights() const;

  /// First coordinate h_x = eta_x . e_1 for x = 0..L.
  std::vector<int> first_coordinate() const {
    std::vector<int> h(inc_.size() + 1, 0);
    for (std::size_t x = 0; x < inc_.size(); ++x)
      h[x + 1] = h[x] + (axis_of(inc_[x], dim_) == 0 ? sign_of(inc_[x], dim_) : 0);
    return h;
  }

  /// Canonical text form: character 'A' + code at each site.
  std::string encode() const {
    std::string s(inc_.size(), 'A');
    for (std::size_t i = 0; i < inc_.size(); ++i) s[i] = static_cast<char>('A' + inc_[i]);
    return s;
  }

  static PolymerPath decode(std::string_view text, int dim) {
    std::vector<Code> inc(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      const int c = text[i] - 'A';
      if (c < 0 || c >= 2 * dim) throw InvalidPathError("bad character in path encoding");
      inc[i] = static_cast<Code>(c);
    }
    return PolymerPath(dim, std::move(inc));
  }

  bool operator==(const PolymerPath&) const = default;

 private:
  int dim_;
  std::vector<Code> inc_;
};

/// zeta_x = eta_x - eta_{x-1}.  Heights must start and end at the origin and
/// move by one unit step at a time.
inline std::vector<Code> gradient(int dim, std::span<const Point> heights) {
  if (heights.size() < 2) throw InvalidPathError("need at least two heights");
  for (const Point& p : heights)
    if (static_cast<int>(p.size()) != dim) throw InvalidPathError("height has wrong dimension");
  auto is_origin = [](const Point& p) {
    return std::all_of(p.begin(), p.end(), [](int v) { return v == 0; });
  };
  if (!is_origin(heights.front()) || !is_origin(heights.back()))
    throw InvalidPathError("endpoints must be the origin");

  std::vector<Code> inc;
  inc.reserve(heights.size() - 1);
  for (std::size_t x = 1; x < heights.size(); ++x) {
    int moved_axis = -1;
    int step = 0;
    for (int a = 0; a < dim; ++a) {
      const int delta = heights[x][a] - heights[x - 1][a];
      if (delta == 0) continue;
      if (moved_axis >= 0 || (delta != 1 && delta != -1))
        throw InvalidPathError("non-unit step at site " + std::to_string(x));
      moved_axis = a;
      step = delta;
    }
    if (moved_axis < 0) throw InvalidPathError("zero step at site " + std::to_string(x));
    inc.push_back(static_cast<Code>(step > 0 ? moved_axis : moved_axis + dim));
  }
  return inc;
}

/// Inverse of gradient: partial sums starting from the origin.
inline std::vector<Point> integrate(int dim, std::span<const Code> increments) {
  std::vector<Point> h(increments.size() + 1, Point(static_cast<std::size_t>(dim), 0));
  for (std::size_t x = 0; x < increments.size(); ++x) {
    h[x + 1] = h[x];
    h[x + 1][static_cast<std::size_t>(axis_of(increments[x], dim))] += sign_of(increments[x], dim);
  }
  return h;
}

inline std::vector<Point> PolymerPath::heights() const { return integrate(dim_, inc_); }

inline ParticleCounts particle_counts(std::span<const Code> increments, int dim) {
  ParticleCounts n{std::vector<int>(static_cast<std::size_t>(dim), 0)};
  for (Code c : increments)
    if (c < dim) ++n.counts[c];
  return n;
}

inline ParticleCounts particle_counts(const PolymerPath& path) {
  return particle_counts(path.increments(), path.dim());
}

/// eta*_x = x e_1 for x <= L/2 and (L - x) e_1 beyond: the maximal
/// configuration for the first coordinate.
inline PolymerPath extremal_path(int length, int dim) {
  require_shape(length, dim);
  std::vector<Code> inc(static_cast<std::size_t>(length));
  std::fill(inc.begin(), inc.begin() + length / 2, Code{0});
  std::fill(inc.begin() + length / 2, inc.end(), static_cast<Code>(dim));
  return PolymerPath(dim, std::move(inc));
}

// ---------------------------------------------------------------------------
// Heat-bath moves.
//
// Site x in 1..L-1 couples increments zeta_x and zeta_{x+1}, i.e. array
// positions x-1 and x.  When eta_{x-1} != eta_{x+1} the pair is either kept
// or swapped with probability 1/2 each.  When eta_{x-1} = eta_{x+1}, i.e.
// zeta_{x+1} = -zeta_x, the pair is redrawn uniformly among the 2d pairs
// (e_j, -e_j).  The identity outcome is part of the candidate list.

/// Calls visit(first, second, probability) for every candidate pair at x.
template <class Visitor>
inline void for_each_heat_bath_move(std::span<const Code> z, int dim, int x, Visitor&& visit) {
  const Code a = z[static_cast<std::size_t>(x - 1)];
  const Code b = z[static_cast<std::size_t>(x)];
  if (b == negate(a, dim)) {
    const double p = 1.0 / (2.0 * dim);
    for (int j = 0; j < 2 * dim; ++j)
      visit(static_cast<Code>(j), negate(static_cast<Code>(j), dim), p);
  } else {
    visit(a, b, 0.5);
    visit(b, a, 0.5);
  }
}

struct Candidate {
  PolymerPath path;
  double probability;
};

inline std::vector<Candidate> heat_bath_candidates(const PolymerPath& path, int x) {
  const int L = path.length();
  if (x < 1 || x > L - 1) throw DomainError("site x must lie in 1..L-1");
  std::vector<Candidate> out;
  std::vector<Code> work(path.increments().begin(), path.increments().end());
  for_each_heat_bath_move(path.increments(), path.dim(), x, [&](Code first, Code second, double p) {
    work[static_cast<std::size_t>(x - 1)] = first;
    work[static_cast<std::size_t>(x)] = second;
    out.push_back({PolymerPath(path.dim(), work), p});
  });
  return out;
}

}  // namespace dpoly
