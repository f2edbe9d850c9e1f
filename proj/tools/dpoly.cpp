// Command-line front end.  Every command writes one JSON report (schema 1)
// with an embedded run manifest; `simulate` writes trajectories as CSV.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpoly/dpoly.hpp"

using json = nlohmann::json;
using namespace dpoly;

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitNonConvergence = 4;

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json nullable(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Run {
  std::string command;
  json params = json::object();
  json seeds = json::object();
  json tolerances = json::object();
  std::string out;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  json manifest(const json& outputs) const {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {{"command", command},
            {"params", params},
            {"seeds", seeds},
            {"tolerances", tolerances},
            {"version", kVersion},
            {"outputs", outputs},
            // the only field that varies between identical invocations
            {"timestamp", {{"utc", utc_now()}, {"wall_seconds", wall}}}};
  }

  void write(std::ostream& os, const std::string& text) const { os << text << '\n'; }

  void emit(const json& result, json outputs = json::array()) const {
    if (!out.empty()) outputs.push_back(out);
    const json report = {{"schema", 1}, {"manifest", manifest(outputs)}, {"result", result}};
    const std::string text = report.dump(2);
    if (out.empty()) {
      write(std::cout, text);
    } else {
      std::ofstream f(out);
      if (!f) throw std::runtime_error("cannot open " + out);
      write(f, text);
    }
  }
};

// ---------------------------------------------------------------------------

json enumerate_cmd(int L, int d, std::size_t cap) {
  const auto index = StateIndex::enumerate(L, d, cap);
  const auto z = partition_function(L, d);
  const auto orbits = symmetry_orbits(index);
  const bool match = BigInt(index.size()) == z.multinomial && z.multinomial == z.random_walk;
  return {{"L", L},
          {"d", d},
          {"count", index.size()},
          {"partition_function", z.multinomial.str()},
          {"walk_count", z.random_walk.str()},
          {"return_probability", srw_return_probability(L, d)},
          {"symmetry_orbits", orbits.representatives.size()},
          {"counts_agree", match}};
}

json law_cmd(int L, int d, bool conv, bool exact) {
  const auto g = count_distribution(L, d);
  std::vector<double> gamma;
  for (int n = 0; n <= g.max_count(); ++n) gamma.push_back(g.weight(n));
  const auto m = moment_bounds(g);
  json r = {{"L", L},
            {"d", d},
            {"gamma", gamma},
            {"nbar", g.center()},
            {"mean", g.mean()},
            {"sigma2", m.sigma2},
            {"var_x", m.var_x},
            {"sigma2_over_L", m.sigma2_over_L},
            {"var_x_over_L2", m.var_x_over_L2},
            {"ratio_constant", m.ratio_constant}};
  if (exact) {
    std::vector<std::string> q;
    for (const auto& v : count_distribution_exact(L, d)) q.push_back(v.str());
    r["gamma_exact"] = q;
  }
  if (conv) {
    const auto c = minimal_conv_constant(g);
    json cj = {{"c_min", nullable(c)}};
    if (c) {
      const auto rep = conv_condition_check(g, *c);
      cj["holds"] = rep.holds;
      cj["support_margin"] = rep.support_margin;
      cj["decay_up_margin"] = rep.decay_up_margin;
      cj["decay_down_margin"] = rep.decay_down_margin;
      cj["envelope_lower_margin"] = rep.envelope_lower_margin;
      cj["envelope_upper_margin"] = rep.envelope_upper_margin;
    }
    r["conv"] = cj;
  }
  return r;
}

json spectrum_cmd(int L, int d, std::size_t cap, const LanczosOptions& opt) {
  const auto index = StateIndex::enumerate(L, d, cap);
  const auto gen = build_generator(index);
  const auto g = spectral_gap(gen, opt);
  const WilsonStatistic stat(L);
  const auto eig = eigenfunction_check(index, gen, stat);
  return {{"L", L},
          {"d", d},
          {"dim", index.size()},
          {"gap", g.gap},
          {"residual", g.residual},
          {"iterations", g.iterations},
          {"kappa", stat.kappa()},
          {"gap_over_kappa", g.gap / stat.kappa()},
          {"eigenfunction_residual", eig.max_residual}};
}

json mix_exact(int L, int d, std::size_t cap, const MixingTimeOptions& opt) {
  const auto index = StateIndex::enumerate(L, d, cap);
  const auto gen = build_generator(index);
  const auto m = exact_mixing_time(index, gen, opt);
  return {{"L", L},
          {"d", d},
          {"dim", index.size()},
          {"t_mix", m.t_mix},
          {"t_lower", m.t_lower},
          {"lower_bound_only", m.lower_bound_only},
          {"worst_start", index.unrank(m.worst_start).encode()},
          // the extremal start is still unmixed at the lower bracket
          {"extremal_attains_worst_case", tv_from(gen, index.rank(extremal_path(L, d)), m.t_lower) > opt.threshold},
          {"starts_examined", m.starts_examined},
          {"L2logL", L * L * std::log(static_cast<double>(L))}};
}

json mix_wilson(int L, int d, std::optional<double> eps) {
  const double C0 = eps ? 1.0 / (4.0 * *eps) : analytic_variance_constant(L, d);
  const auto r = lower_bound_time(L, d, C0);
  return {{"L", L},
          {"d", d},
          {"C0", r.C0},
          {"C0_source", eps ? "eps" : "analytic"},
          {"eps", r.eps},
          {"kappa", r.kappa},
          {"phi_star", r.phi_star},
          {"threshold", r.threshold},
          {"T_lb", r.T_lb},
          {"T_lb_over_L2logL", r.T_lb / (L * L * std::log(static_cast<double>(L)))}};
}

json lsi_report(const LsiReport& r) {
  return {{"alpha_est", r.alpha_est},
          {"witness", r.witness},
          {"linearized", r.linearized},
          {"optimizer_best", finite_or_null(r.optimizer_best)},
          {"gap", r.gap},
          {"half_gap_holds", r.alpha_est <= r.gap / 2 + 1e-8},
          {"restarts", r.restarts},
          {"failed_restarts", r.failed_restarts}};
}

json lsi_cmd(int L, int d, std::size_t cap, const LsiOptions& opt, const MixingTimeOptions& mopt) {
  const auto index = StateIndex::enumerate(L, d, cap);
  const auto gen = build_generator(index);
  const auto r = lsi_constant_estimate(gen, opt);
  json j = lsi_report(r);
  j["L"] = L;
  j["d"] = d;
  j["dim"] = index.size();
  j["alpha_L2"] = r.alpha_est * L * L;
  const auto m = exact_mixing_time(index, gen, mopt);
  const auto b = mixing_bound_check(m.t_mix, index.size(), r.alpha_est);
  j["mixing_bound"] = {{"t_mix", b.t_mix},
                       {"t_mix_lower_bound_only", m.lower_bound_only},
                       {"rhs", b.bound},
                       {"log_inv_pi_min", b.log_inv_pi_min},
                       {"holds", b.holds},
                       {"note", "soft check: alpha_est is an upper bound on alpha"}};
  return j;
}

json entropy_lab_cmd(int L, int d, int i, std::optional<int> n, std::vector<double> grid, bool delta_units) {
  if (n) {
    if (delta_units) {
      const double delta = delta_factor(count_distribution(L, d - i), *n);
      for (double& t : grid) t /= delta;
    }
    const auto r = chi_laplace_probe(L, d, i, *n, grid);
    return {{"L_sub", L},      {"d", d},
            {"i", i},          {"n", *n},
            {"deterministic", r.deterministic},
            {"nu_chi", r.nu_chi},
            {"nu_n2", r.nu_n2},
            {"nu_n2_identity", r.nu_n2_identity},
            {"sigma2", r.sigma2},
            {"delta", r.delta},
            {"t_grid", r.t_grid},
            {"log_laplace", r.log_laplace},
            {"sup_ratio", r.sup_ratio}};
  }
  const auto r = laplace_sup(L, d, i, grid);
  return {{"L_sub", L},
          {"d", d},
          {"i", i},
          {"t_delta_grid", grid},
          {"sup_ratio", r.sup_ratio},
          {"argmax_n", r.argmax_n},
          {"argmax_t_delta", r.argmax_t_delta}};
}

json decomposition_json(int L, int d, std::size_t samples, std::uint64_t seed) {
  const auto index = StateIndex::enumerate(L, d);
  const ConditioningLevels levels(index);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0, top = 0.0;
  StateFunction f(static_cast<Eigen::Index>(index.size()));
  for (std::size_t k = 0; k < samples; ++k) {
    for (auto& v : f) v = std::exp((0.3 + 0.05 * static_cast<double>(k % 40)) * normal(rng));
    f /= f.mean();
    for (int i = 0; i < d; ++i) {
      const auto r = entropy_decomposition_check(levels, f, i);
      worst = std::max(worst, r.max_residual);
      top = std::max(top, r.top_level);
    }
  }
  return {{"L", L}, {"d", d}, {"samples", samples}, {"max_residual", worst}, {"top_level", top}};
}

std::vector<std::string> parse_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

std::vector<int> parse_colors(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw DomainError("bad color count '" + tok + "'");
    }
  }
  return out;
}

json interchange_cmd(int n, const std::string& op, const std::string& graph, const std::optional<std::vector<int>>& colors,
                     const LsiOptions& opt) {
  const Graph g = graph == "complete" ? Graph::complete : Graph::segment;
  json r = {{"n", n}, {"graph", graph}, {"op", op}, {"counts", colors ? json(*colors) : json(nullptr)}};
  if (op == "gap") {
    const auto gen = build_interchange_generator(n, g);
    const double gap = n <= 6 ? spectral_gap_dense(gen) : spectral_gap(gen).gap;
    r["gap"] = gap;
    r["random_walk_gap"] = g == Graph::segment ? 2.0 * (1.0 - std::cos(std::numbers::pi / n)) : static_cast<double>(n);
    if (colors) {
      const ColoredSpace space(*colors);
      if (space.n() != n) throw DomainError("color counts must sum to n");
      const auto direct = colored_generator(space, g);
      const auto projected = project_generator(gen, space);
      const Eigen::MatrixXd diff = Eigen::MatrixXd(direct.matrix) - Eigen::MatrixXd(projected.matrix);
      r["colored_dim"] = space.size();
      r["colored_gap"] = space.size() > 1 ? spectral_gap_dense(direct) : 0.0;
      r["projection_max_entry_diff"] = diff.cwiseAbs().maxCoeff();
    }
  } else if (op == "lsi") {
    if (g != Graph::segment) throw DomainError("lsi is implemented for the segment");
    const auto s = lsi_segment(n, colors, opt);
    r["gap"] = s.gap;
    r["alpha_est"] = s.alpha;
    r["alpha_n2"] = s.alpha * n * n;
    r["witness"] = s.witness;
    if (s.colored_alpha) {
      r["colored_gap"] = s.colored_gap;
      r["colored_alpha_est"] = *s.colored_alpha;
      r["colored_witness"] = s.colored_witness;
      r["contraction_holds"] = s.contraction_holds;
      r["contraction_slack"] = s.contraction_slack;
    }
  } else if (op == "compare") {
    const double sup = dirichlet_comparison(n);
    r["sup_ratio"] = sup;
    r["sup_ratio_over_n3"] = sup / (static_cast<double>(n) * n * n);
    if (n >= 2) {
      const auto split = entropy_split_check(n, n / 2 > 0 ? n / 2 : 1, 100, opt.seed);
      r["entropy_split_max_residual"] = split.max_residual;
    }
  } else if (op == "recursion") {
    const auto rc = recursion_check(n, opt);
    r["n1"] = rc.n1;
    r["alpha_n"] = rc.alpha_n;
    r["alpha_n1"] = finite_or_null(rc.alpha_n1);
    r["alpha_n2"] = finite_or_null(rc.alpha_n2);
    r["excess"] = rc.excess;
    r["implied_C"] = rc.implied_C;
  }
  return r;
}

json scaling_cmd(const std::vector<int>& grid, int d, std::size_t cap, std::size_t lsi_max, const LsiOptions& lopt,
                 const MixingTimeOptions& mopt) {
  json rows = json::array();
  std::vector<double> Ls, Ts, L2logL, gaps, alphas_L, alphas;
  for (int L : grid) {
    const auto index = StateIndex::enumerate(L, d, cap);
    const auto gen = build_generator(index);
    const auto m = exact_mixing_time(index, gen, mopt);
    const auto g = spectral_gap(gen);
    const double x = L * L * std::log(static_cast<double>(L));
    json row = {{"L", L},
                {"dim", index.size()},
                {"t_mix", m.t_mix},
                {"lower_bound_only", m.lower_bound_only},
                {"gap", g.gap},
                {"gap_over_kappa", g.gap / WilsonStatistic(L).kappa()},
                {"L2logL", x},
                {"t_mix_over_L2logL", m.t_mix / x},
                {"alpha_est", nullptr}};
    if (index.size() <= lsi_max && index.size() >= 2) {
      LsiOptions o = lopt;
      o.gap_vector = g.eigenvector;
      const auto a = lsi_constant_estimate(gen, o);
      row["alpha_est"] = a.alpha_est;
      row["alpha_L2"] = a.alpha_est * L * L;
      row["witness"] = a.witness;
      alphas_L.push_back(L);
      alphas.push_back(a.alpha_est);
    }
    rows.push_back(row);
    Ls.push_back(L);
    Ts.push_back(m.t_mix);
    L2logL.push_back(x);
    gaps.push_back(g.gap);
    std::cerr << "scaling: L=" << L << " t_mix=" << m.t_mix << "\n";
  }
  auto fit_json = [](const LineFit& f) { return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}}; };
  json fits = json::object();
  if (Ls.size() >= 2) {
    fits["log_tmix_vs_log_L"] = fit_json(fit_power_law(Ls, Ts));
    fits["log_tmix_vs_log_L2logL"] = fit_json(fit_power_law(L2logL, Ts));
    fits["log_gap_vs_log_L"] = fit_json(fit_power_law(Ls, gaps));
    if (alphas.size() >= 2) fits["log_alpha_vs_log_L"] = fit_json(fit_power_law(alphas_L, alphas));
    double lo = 1e300, hi = 0.0;
    for (std::size_t k = 0; k < Ts.size(); ++k) {
      lo = std::min(lo, Ts[k] / L2logL[k]);
      hi = std::max(hi, Ts[k] / L2logL[k]);
    }
    fits["t_mix_over_L2logL_spread"] = hi / lo;
  }
  return {{"d", d}, {"rows", rows}, {"fits", fits}};
}

struct SimulateArgs {
  int L = 0, d = 0;
  double tmax = 0.0;
  std::size_t traj = 1;
  std::uint64_t seed = 0;
  std::string obs = "phi,counts";
  std::optional<double> sample_every;
  std::string summary;
};

void simulate_cmd(const SimulateArgs& a, const Run& run) {
  SimConfig c;
  c.L = a.L;
  c.d = a.d;
  c.t_max = a.tmax;
  c.n_trajectories = a.traj;
  c.master_seed = a.seed;
  c.observables = {false, false, false};
  for (const auto& o : parse_list(a.obs)) {
    if (o == "phi") c.observables.phi = true;
    else if (o == "counts") c.observables.counts = true;
    else if (o == "hash" || o == "state_hash") c.observables.state_hash = true;
    else throw DomainError("unknown observable '" + o + "'");
  }
  const double dt = a.sample_every.value_or(a.tmax > 0.0 ? a.tmax / 100.0 : 1.0);
  if (!(dt > 0.0)) throw DomainError("--sample-every must be positive");
  c.sample_times = regular_times(a.tmax, dt);
  const auto recs = simulate(c, extremal_path(a.L, a.d));

  std::ofstream file;
  if (!run.out.empty()) {
    file.open(run.out);
    if (!file) throw std::runtime_error("cannot open " + run.out);
  }
  std::ostream& os = run.out.empty() ? std::cout : file;
  os << "traj_id,t";
  if (c.observables.phi) os << ",phi";
  if (c.observables.counts)
    for (int j = 1; j <= a.d; ++j) os << ",N_" << j;
  if (c.observables.state_hash) os << ",state_hash";
  os << '\n' << std::setprecision(17);
  std::uint64_t events = 0;
  for (const auto& r : recs) {
    events += r.events;
    for (const auto& s : r.samples) {
      os << r.id << ',' << s.t;
      if (c.observables.phi) os << ',' << s.phi;
      if (c.observables.counts)
        for (int v : s.counts) os << ',' << v;
      if (c.observables.state_hash) os << ',' << s.state_hash;
      os << '\n';
    }
  }

  json result = {{"L", a.L},
                 {"d", a.d},
                 {"t_max", a.tmax},
                 {"sample_every", dt},
                 {"trajectories", a.traj},
                 {"samples_per_trajectory", c.sample_times.size()},
                 {"mean_events", static_cast<double>(events) / static_cast<double>(recs.size())},
                 {"start", "extremal"}};
  if (c.observables.phi) {
    const auto m = mean_estimate(phi_at(recs, c.sample_times.size() - 1));
    const WilsonStatistic stat(a.L);
    result["phi_final_mean"] = m.mean;
    result["phi_final_variance"] = m.variance;
    result["phi_expected_mean"] = std::exp(-stat.kappa() * c.sample_times.back()) * stat.phi_star();
  }
  if (!a.summary.empty() || !run.out.empty()) {
    Run s = run;
    s.out = a.summary;
    s.emit(result, run.out.empty() ? json::array() : json::array({run.out}));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat-bath dynamics of directed lattice polymers: exact analysis and simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Run run;
  int L = 0, d = 0;
  std::size_t cap = kDefaultStateCapacity;
  std::optional<std::uint64_t> seed;
  auto add_shape = [&](CLI::App* sub) {
    sub->add_option("--L", L, "path length (even)")->required();
    sub->add_option("--d", d, "transverse dimension")->required();
    sub->add_option("--out", run.out, "write the report here instead of stdout");
  };
  auto add_cap = [&](CLI::App* sub) { sub->add_option("--cap", cap, "state-space capacity"); };

  auto* enumerate = app.add_subcommand("enumerate", "enumerate the state space and check the counts");
  add_shape(enumerate);
  add_cap(enumerate);

  bool conv = false, exact = false;
  auto* law = app.add_subcommand("law", "law of the particle count N_1");
  add_shape(law);
  law->add_flag("--conv", conv, "evaluate the convexity condition and its minimal constant");
  law->add_flag("--exact", exact, "also print the law as exact rationals");

  LanczosOptions lanczos;
  auto* spectrum = app.add_subcommand("spectrum", "spectral gap of the generator");
  add_shape(spectrum);
  add_cap(spectrum);
  spectrum->add_option("--tol", lanczos.tolerance, "Lanczos residual tolerance");

  std::string mode;
  std::optional<double> eps;
  MixingTimeOptions mopt;
  auto* mix = app.add_subcommand("mix", "mixing time: exact, or the Wilson lower bound");
  add_shape(mix);
  add_cap(mix);
  mix->add_option("--mode", mode, "exact | wilson-lb")->required()->check(CLI::IsMember({"exact", "wilson-lb"}));
  mix->add_option("--eps", eps, "Chebyshev parameter; default uses the analytic variance constant");
  mix->add_option("--rel-tol", mopt.relative_tolerance, "bisection relative tolerance");

  LsiOptions lopt;
  auto* lsi = app.add_subcommand("lsi", "log-Sobolev constant estimate");
  add_shape(lsi);
  add_cap(lsi);
  lsi->add_option("--restarts", lopt.restarts, "random restarts");
  lsi->add_option("--seed", seed, "seed for the restarts")->required();

  SimulateArgs sim;
  auto* simulate_sub = app.add_subcommand("simulate", "Monte Carlo trajectories from the extremal path (CSV)");
  add_shape(simulate_sub);
  simulate_sub->add_option("--tmax", sim.tmax, "final time")->required();
  simulate_sub->add_option("--traj", sim.traj, "number of trajectories")->required();
  simulate_sub->add_option("--seed", seed, "master seed")->required();
  simulate_sub->add_option("--obs", sim.obs, "comma list of phi, counts, hash");
  simulate_sub->add_option("--sample-every", sim.sample_every, "sampling interval (default tmax/100)");
  simulate_sub->add_option("--summary", sim.summary, "write the JSON summary here");

  int level = 0;
  std::optional<int> n_count;
  std::vector<double> t_grid;
  std::string t_units = "absolute";
  std::size_t decomposition = 0;
  auto* lab = app.add_subcommand("entropy-lab", "chi normalization and Laplace transform probe");
  add_shape(lab);
  lab->add_option("--i", level, "conditioning level")->required();
  lab->add_option("--n", n_count, "value of N_{i+1} + 1; omit to take the sup over n");
  lab->add_option("--t-grid", t_grid, "comma list of t values")->delimiter(',');
  lab->add_option("--t-units", t_units, "absolute | delta (units of 1/Delta)")
      ->check(CLI::IsMember({"absolute", "delta"}));
  lab->add_option("--decomposition", decomposition, "also check the entropy chain rule on this many densities");
  lab->add_option("--seed", seed, "seed for --decomposition");

  int n_labels = 0;
  std::string op, graph = "segment", colors;
  auto* inter = app.add_subcommand("interchange", "interchange process on the segment and its colorings");
  inter->add_option("--n", n_labels, "number of vertices")->required();
  inter->add_option("--op", op, "gap | lsi | compare | recursion")
      ->required()
      ->check(CLI::IsMember({"gap", "lsi", "compare", "recursion"}));
  inter->add_option("--colors", colors, "comma list of color counts");
  inter->add_option("--graph", graph, "segment | complete")->check(CLI::IsMember({"segment", "complete"}));
  inter->add_option("--restarts", lopt.restarts, "random restarts for lsi");
  inter->add_option("--seed", seed, "seed (required for lsi, recursion and compare)");
  inter->add_option("--out", run.out, "write the report here instead of stdout");

  std::vector<int> L_grid;
  std::size_t lsi_max = 10'000;
  auto* scaling = app.add_subcommand("scaling", "T_mix, gap and alpha over an L-grid with fits");
  scaling->add_option("--L-grid", L_grid, "comma list of L")->required()->delimiter(',');
  scaling->add_option("--d", d, "transverse dimension")->required();
  scaling->add_option("--out", run.out, "write the report here instead of stdout");
  scaling->add_option("--lsi-max", lsi_max, "largest state space for the log-Sobolev estimate");
  scaling->add_option("--restarts", lopt.restarts, "random restarts for the log-Sobolev estimate");
  scaling->add_option("--seed", seed, "seed for the log-Sobolev restarts")->required();
  add_cap(scaling);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;
  }

  try {
    if (seed) {
      run.seeds["master"] = *seed;
      lopt.seed = *seed;
    }
    auto shape = [&] { run.params = {{"L", L}, {"d", d}, {"cap", cap}}; };
    if (*enumerate) {
      run.command = "enumerate";
      shape();
      run.emit(enumerate_cmd(L, d, cap));
    } else if (*law) {
      run.command = "law";
      run.params = {{"L", L}, {"d", d}, {"conv", conv}, {"exact", exact}};
      run.emit(law_cmd(L, d, conv, exact));
    } else if (*spectrum) {
      run.command = "spectrum";
      shape();
      run.tolerances = {{"lanczos_residual", lanczos.tolerance}};
      run.emit(spectrum_cmd(L, d, cap, lanczos));
    } else if (*mix) {
      run.command = "mix";
      shape();
      run.params["mode"] = mode;
      if (mode == "exact") {
        run.tolerances = {{"threshold", mopt.threshold},
                          {"relative_tolerance", mopt.relative_tolerance},
                          {"uniformization", mopt.uniformization.tolerance},
                          {"exact_limit", mopt.exact_limit}};
        run.emit(mix_exact(L, d, cap, mopt));
      } else {
        run.params["eps"] = eps ? json(*eps) : json(nullptr);
        run.emit(mix_wilson(L, d, eps));
      }
    } else if (*lsi) {
      run.command = "lsi";
      shape();
      run.params["restarts"] = lopt.restarts;
      run.tolerances = {{"max_iterations", lopt.max_iterations}, {"mixing_relative_tolerance", mopt.relative_tolerance}};
      run.emit(lsi_cmd(L, d, cap, lopt, mopt));
    } else if (*simulate_sub) {
      run.command = "simulate";
      sim.L = L;
      sim.d = d;
      sim.seed = *seed;
      run.params = {{"L", L},
                    {"d", d},
                    {"tmax", sim.tmax},
                    {"traj", sim.traj},
                    {"obs", sim.obs},
                    {"sample_every", sim.sample_every ? json(*sim.sample_every) : json(nullptr)}};
      simulate_cmd(sim, run);
    } else if (*lab) {
      run.command = "entropy-lab";
      const bool delta_units = t_units == "delta" || !n_count;
      if (t_grid.empty()) t_grid = n_count ? std::vector<double>{-2, -1, -0.5, 0.5, 1, 2} : symmetric_geometric_grid(1.0 / 64, 64.0, 1.25);
      run.params = {{"L", L},
                    {"d", d},
                    {"i", level},
                    {"n", n_count ? json(*n_count) : json("all")},
                    {"t_grid", t_grid},
                    {"t_units", delta_units ? "delta" : "absolute"},
                    {"decomposition", decomposition}};
      json r = entropy_lab_cmd(L, d, level, n_count, t_grid, delta_units);
      if (decomposition > 0) {
        if (!seed) throw DomainError("--decomposition needs --seed");
        r["decomposition"] = decomposition_json(L, d, decomposition, *seed);
        run.tolerances = {{"decomposition", 1e-12}};
      }
      run.emit(r);
    } else if (*inter) {
      run.command = "interchange";
      std::optional<std::vector<int>> cc;
      if (!colors.empty()) cc = parse_colors(colors);
      if (op != "gap" && !seed) throw DomainError("--op " + op + " needs --seed");
      run.params = {{"n", n_labels}, {"op", op}, {"graph", graph}, {"colors", cc ? json(*cc) : json(nullptr)}};
      if (op == "lsi" || op == "recursion") run.params["restarts"] = lopt.restarts;
      run.emit(interchange_cmd(n_labels, op, graph, cc, lopt));
    } else if (*scaling) {
      run.command = "scaling";
      run.params = {{"L_grid", L_grid}, {"d", d}, {"cap", cap}, {"lsi_max", lsi_max}, {"restarts", lopt.restarts}};
      run.tolerances = {{"threshold", mopt.threshold},
                        {"relative_tolerance", mopt.relative_tolerance},
                        {"uniformization", mopt.uniformization.tolerance},
                        {"exact_limit", mopt.exact_limit}};
      run.emit(scaling_cmd(L_grid, d, cap, lsi_max, lopt, mopt));
    }
  } catch (const CapacityError& e) {
    std::cerr << "capacity: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const InvalidPathError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

