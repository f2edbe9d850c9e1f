#pragma once

// Continuous-time Monte Carlo of the heat-bath dynamics.  Every site rings
// at rate 1, so the total event rate is L - 1 and the ringing site is
// uniform; the state is held constant between events.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dpoly/errors.hpp"
#include "dpoly/parallel.hpp"
#include "dpoly/path.hpp"
#include "dpoly/rng.hpp"
#include "dpoly/state_space.hpp"
#include "dpoly/stats.hpp"
#include "dpoly/wilson.hpp"

namespace dpoly {

/// 64-bit FNV-1a of the increment string.
inline std::uint64_t state_hash(std::span<const Code> z) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Code c : z) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Mutable chain state with first-coordinate heights and counts kept in
/// step with the increments.
class PolymerChain {
 public:
  explicit PolymerChain(const PolymerPath& start)
      : d_(start.dim()), z_(start.increments().begin(), start.increments().end()),
        h_(start.first_coordinate()), counts_(particle_counts(start).counts) {}

  int length() const noexcept { return static_cast<int>(z_.size()); }
  int dim() const noexcept { return d_; }
  std::span<const Code> increments() const noexcept { return z_; }
  std::span<const int> heights() const noexcept { return h_; }
  const std::vector<int>& counts() const noexcept { return counts_; }

  /// Heat-bath update at site x in 1..L-1.
  void update(int x, Stream& rng) {
    const auto lo = static_cast<std::size_t>(x - 1), hi = static_cast<std::size_t>(x);
    const Code a = z_[lo], b = z_[hi];
    Code na, nb;
    if (b == negate(a, d_)) {
      na = static_cast<Code>(rng.below(static_cast<std::uint64_t>(2 * d_)));
      nb = negate(na, d_);
      if (a < d_) --counts_[a];
      else --counts_[b];
      ++counts_[na < d_ ? na : nb];
    } else {
      if (rng.bits() >> 63) return;
      na = b;
      nb = a;
    }
    z_[lo] = na;
    z_[hi] = nb;
    h_[hi] = h_[lo] + (axis_of(na, d_) == 0 ? sign_of(na, d_) : 0);
  }

  /// One event of the continuous-time chain: a uniform site rings.
  void step(Stream& rng) { update(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(length() - 1))), rng); }

  PolymerPath path() const { return PolymerPath(d_, z_); }

 private:
  int d_;
  std::vector<Code> z_;
  std::vector<int> h_;
  std::vector<int> counts_;
};

struct Observables {
  bool phi = true;
  bool counts = true;
  bool state_hash = true;
};

struct SimConfig {
  int L = 0;
  int d = 0;
  double t_max = 0.0;
  std::vector<double> sample_times;
  std::size_t n_trajectories = 1;
  std::uint64_t master_seed = 0;
  Observables observables{};
};

struct Sample {
  double t = 0.0;
  double phi = 0.0;
  std::vector<int> counts;
  std::uint64_t state_hash = 0;
  /// Sum of increments; zero for a valid path.
  int drift = 0;
};

struct TrajectoryRecord {
  std::size_t id = 0;
  std::uint64_t master_seed = 0;
  std::vector<Sample> samples;
  std::uint64_t events = 0;
};

inline void validate(const SimConfig& c) {
  require_shape(c.L, c.d);
  if (c.n_trajectories < 1) throw DomainError("need at least one trajectory");
  if (!(c.t_max >= 0.0)) throw DomainError("t_max must be nonnegative");
  if (!std::is_sorted(c.sample_times.begin(), c.sample_times.end()))
    throw DomainError("sample times must be sorted");
  if (!c.sample_times.empty() && (c.sample_times.front() < 0.0 || c.sample_times.back() > c.t_max))
    throw DomainError("sample times must lie in [0, t_max]");
}

/// Evenly spaced times 0, dt, 2 dt, ... up to t_max.
inline std::vector<double> regular_times(double t_max, double dt) {
  std::vector<double> ts;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t > t_max * (1.0 + 1e-12)) break;
    ts.push_back(std::min(t, t_max));
  }
  return ts;
}

inline TrajectoryRecord run_trajectory(const SimConfig& config, const PolymerPath& initial,
                                       const WilsonStatistic& stat, std::size_t id) {
  Stream rng(config.master_seed, id);
  PolymerChain chain(initial);
  TrajectoryRecord rec;
  rec.id = id;
  rec.master_seed = config.master_seed;
  rec.samples.reserve(config.sample_times.size());
  const double rate = static_cast<double>(config.L - 1);

  auto record = [&](double t) {
    Sample s;
    s.t = t;
    if (config.observables.phi) s.phi = stat.from_heights(chain.heights());
    if (config.observables.counts) s.counts = chain.counts();
    if (config.observables.state_hash) s.state_hash = state_hash(chain.increments());
    s.drift = chain.heights().back();
    std::vector<int> balance(static_cast<std::size_t>(config.d), 0);
    for (Code c : chain.increments()) balance[static_cast<std::size_t>(axis_of(c, config.d))] += sign_of(c, config.d);
    for (int b : balance) s.drift += std::abs(b);
    rec.samples.push_back(std::move(s));
  };

  double t = 0.0;
  std::size_t next = 0;
  const auto& ts = config.sample_times;
  while (next < ts.size()) {
    const double hold = rng.exponential(rate);
    while (next < ts.size() && ts[next] < t + hold) record(ts[next++]);
    t += hold;
    if (t > config.t_max) break;
    chain.step(rng);
    ++rec.events;
  }
  return rec;
}

/// Independent trajectories from a common start; record i uses the stream
/// (master_seed, i), so output does not depend on the thread count.
inline std::vector<TrajectoryRecord> simulate(const SimConfig& config, const PolymerPath& initial) {
  validate(config);
  if (initial.length() != config.L || initial.dim() != config.d)
    throw InvalidPathError("initial path does not match L and d");
  const WilsonStatistic stat(config.L);
  std::vector<TrajectoryRecord> out(config.n_trajectories);
  parallel_for(config.n_trajectories, [&](std::size_t i) { out[i] = run_trajectory(config, initial, stat, i); });
  return out;
}

/// Values of Phi at sample k across trajectories.
inline std::vector<double> phi_at(const std::vector<TrajectoryRecord>& recs, std::size_t k) {
  std::vector<double> v;
  v.reserve(recs.size());
  for (const auto& r : recs) v.push_back(r.samples.at(k).phi);
  return v;
}

// ---------------------------------------------------------------------------
// Equilibrium sampling.

struct EquilibriumSample {
  std::vector<PolymerPath> states;
  /// True when states are exact independent uniform draws.
  bool exact = false;
  double burn_in = 0.0;
  std::uint64_t events_between_samples = 0;
};

/// Exact uniform draws by index for L <= 10, d <= 2; otherwise one long
/// chain from eta*, burned in for 10 L^2 log L time units and sampled every
/// L^2 events.  Long-chain samples are correlated; use batch means.
inline EquilibriumSample equilibrium_sample(int L, int d, std::size_t n_samples, std::uint64_t seed) {
  require_shape(L, d);
  EquilibriumSample out;
  out.states.reserve(n_samples);
  Stream rng(seed, 0xe9u);
  if (L <= 10 && d <= 2) {
    const auto index = StateIndex::enumerate(L, d);
    out.exact = true;
    for (std::size_t k = 0; k < n_samples; ++k) out.states.push_back(index.unrank(rng.below(index.size())));
    return out;
  }
  PolymerChain chain(extremal_path(L, d));
  out.burn_in = 10.0 * L * L * std::log(static_cast<double>(L));
  const double rate = static_cast<double>(L - 1);
  for (double t = 0.0; t < out.burn_in; t += rng.exponential(rate)) chain.step(rng);
  out.events_between_samples = static_cast<std::uint64_t>(L) * static_cast<std::uint64_t>(L);
  for (std::size_t k = 0; k < n_samples; ++k) {
    for (std::uint64_t e = 0; e < out.events_between_samples; ++e) chain.step(rng);
    out.states.push_back(chain.path());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Total-variation lower bound from the event {Phi >= a}.

struct TvLowerEstimate {
  double T = 0.0;
  double threshold = 0.0;
  /// P(Phi_T >= a | eta*) with its one-sided bound
  double p_start = 0.0;
  double p_start_lower = 0.0;
  /// mu(Phi >= a) with its one-sided bound
  double p_equilibrium = 0.0;
  double p_equilibrium_upper = 0.0;
  bool equilibrium_exact = false;
  /// point estimate and lower confidence bound of the TV lower bound
  double estimate = 0.0;
  double lower = 0.0;
  double confidence = 0.95;
  std::size_t trajectories = 0;
  std::uint64_t seed = 0;
};

/// P(Phi_T >= a | eta*) - mu(Phi >= a).  The two one-sided bounds are each
/// taken at level (1 + confidence)/2, so `lower` holds at `confidence` by a
/// union bound.  mu(Phi >= a) is exact when the state space has at most
/// `exact_states` elements, otherwise estimated from a long equilibrium run
/// with batch-means errors.
inline TvLowerEstimate tv_lower_estimate(int L, int d, double T, double a, std::size_t n_traj, std::uint64_t seed,
                                         std::size_t equilibrium_samples = 100'000,
                                         double confidence = 0.95, double exact_states = 1e5) {
  if (T < 0.0) throw DomainError("T must be nonnegative");
  TvLowerEstimate r;
  r.T = T;
  r.threshold = a;
  r.confidence = confidence;
  r.trajectories = n_traj;
  r.seed = seed;
  const double side = 0.5 + 0.5 * confidence;

  SimConfig cfg;
  cfg.L = L;
  cfg.d = d;
  cfg.t_max = T;
  cfg.sample_times = {T};
  cfg.n_trajectories = n_traj;
  cfg.master_seed = seed;
  cfg.observables = {true, false, false};
  const auto recs = simulate(cfg, extremal_path(L, d));
  std::size_t hits = 0;
  for (const auto& rec : recs) hits += rec.samples[0].phi >= a;
  r.p_start = static_cast<double>(hits) / static_cast<double>(n_traj);
  r.p_start_lower = wilson_interval(hits, n_traj, 2.0 * side - 1.0).lower;

  const WilsonStatistic stat(L);
  if (log_partition_function(L, d) <= std::log(exact_states)) {
    const auto index = StateIndex::enumerate(L, d);
    const StateFunction phi = phi_vector(index, stat);
    r.p_equilibrium = static_cast<double>((phi.array() >= a).count()) / static_cast<double>(index.size());
    r.p_equilibrium_upper = r.p_equilibrium;
    r.equilibrium_exact = true;
  } else {
    const auto eq = equilibrium_sample(L, d, equilibrium_samples, seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<double> ind;
    ind.reserve(eq.states.size());
    for (const auto& s : eq.states) ind.push_back(stat(s) >= a ? 1.0 : 0.0);
    const auto m = mean_estimate(ind);
    const double se = eq.exact ? m.std_error : batch_means_std_error(ind);
    r.p_equilibrium = m.mean;
    // never below the score bound for an iid sample of the same size
    const double score = wilson_interval(static_cast<std::size_t>(std::llround(m.mean * ind.size())), ind.size(),
                                         2.0 * side - 1.0).upper;
    r.p_equilibrium_upper = std::min(1.0, std::max(m.mean + normal_quantile(side) * se, score));
  }
  r.estimate = r.p_start - r.p_equilibrium;
  r.lower = r.p_start_lower - r.p_equilibrium_upper;
  return r;
}

}  // namespace dpoly
