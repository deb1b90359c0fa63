#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "bdar/coupling.hpp"
#include "bdar/jump_chain.hpp"
#include "bdar/meanfield.hpp"
#include "bdar/oracle.hpp"
#include "bdar/params.hpp"
#include "bdar/replicas.hpp"
#include "bdar/state_io.hpp"
#include "bdar/stats.hpp"

namespace bdar::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kSchemaVersion = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::string command;
  int n = 0;
  int C = 0;
  int d = 0;
  std::string lambda;
  std::uint64_t seed = 1;
  std::int64_t steps = -1;
  int replicas = -1;
  std::int64_t burn_in = -1;
  std::int64_t thin = -1;
  std::string variant = "bdar";
  std::string out = ".";
  std::string config;
  int threads = 1;

  std::string mode = "coalescence";
  bool compare_sim = false;
  bool dump_p = false;
  bool dump_state = false;
  double t_end = 200.0;
  double dt = 1e-3;
  std::string xi0;
  std::int64_t record_every = 1000;
  int node = 1;
  int load = -1;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("cannot parse ") + what + " value '" + item + "'");
    }
  }
  if (values.empty()) throw UsageError(std::string("empty ") + what + " list");
  return values;
}

double single_lambda(const Settings& s) {
  const auto values = parse_list(s.lambda, "--lambda");
  if (values.size() != 1) throw UsageError("this command takes a single --lambda value");
  return values.front();
}

ModelParams model_params(const Settings& s) {
  try {
    return ModelParams::make(s.n, s.C, s.d, single_lambda(s));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

json settings_json(const Settings& s) {
  json j{{"n", s.n},        {"C", s.C},         {"d", s.d},           {"lambda", s.lambda},
         {"seed", s.seed},  {"steps", s.steps}, {"replicas", s.replicas}, {"burn_in", s.burn_in},
         {"thin", s.thin},  {"variant", s.variant}, {"out", s.out}, {"threads", s.threads}};
  if (!s.config.empty()) j["config"] = s.config;
  if (s.command == "couple") j["mode"] = s.mode;
  if (s.command == "oracle") {
    j["compare_sim"] = s.compare_sim;
    j["dump_p"] = s.dump_p;
  }
  if (s.command == "simulate") j["dump_state"] = s.dump_state;
  if (s.command == "ode") {
    j["t_end"] = s.t_end;
    j["dt"] = s.dt;
    j["xi0"] = s.xi0;
    j["record_every"] = s.record_every;
  }
  if (s.command == "concentration") {
    j["node"] = s.node;
    j["load"] = s.load;
  }
  return j;
}

json params_json(const ModelParams& p) {
  return json{{"n", p.n},
              {"C", p.C},
              {"d", p.d},
              {"lambda", p.lambda},
              {"arrival_probability", p.arrival_probability()},
              {"lambda0", p.lambda0()},
              {"lambda1", p.lambda1()},
              {"regime", to_string(p.regime())},
              {"burn_in_s", p.burn_in_exact()},
              {"slot_count", p.slot_count()}};
}

json manifest(const Settings& s) {
  return json{{"schema_version", kSchemaVersion}, {"command", s.command}, {"settings", settings_json(s)}};
}

fs::path prepare_out(const Settings& s) {
  fs::path dir(s.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ExperimentFailure("cannot create output directory " + s.out + ": " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw ExperimentFailure("cannot write " + path.string());
  f << std::setprecision(17);
  return f;
}

void write_json(const fs::path& path, const json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
  if (!f) throw ExperimentFailure("failed writing " + path.string());
}

void require(bool given, const char* flag) {
  if (!given) throw UsageError(std::string("missing required option ") + flag);
}

void require_model(const Settings& s, bool need_n) {
  if (need_n) require(s.n != 0, "--n");
  require(s.C != 0, "--C");
  require(s.d != 0, "--d");
  require(!s.lambda.empty(), "--lambda");
  if (s.threads < 1) throw UsageError("--threads must be positive");
}

RoutingVariant variant_of(const Settings& s) {
  try {
    return parse_variant(s.variant);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_simulate(const Settings& s, std::ostream& out) {
  require_model(s, true);
  require(s.steps > 0, "--steps");
  const ModelParams p = model_params(s);
  const RoutingVariant variant = variant_of(s);
  const std::int64_t burn = s.burn_in >= 0 ? s.burn_in : default_burn_in(p);
  const std::int64_t thin = s.thin > 0 ? s.thin : p.pair_count();
  if (burn >= s.steps) throw UsageError("--burn-in must be smaller than --steps");
  const fs::path dir = prepare_out(s);

  auto snapshots = open_out(dir / "snapshots.csv");
  snapshots << "step,v,j,f\n";
  std::ofstream phi_file;
  if (p.n >= 4) {
    phi_file = open_out(dir / "phi.csv");
    phi_file << "step,phi1,phi2,phi_tilde\n";
  }
  std::int64_t in_r = 0;
  std::int64_t observed = 0;
  json final_state;
  const std::int64_t last = burn + (s.steps - burn) / thin * thin;
  const auto observer = [&](std::int64_t step, const NetworkState& st) {
    ++observed;
    if (in_R(st, p)) ++in_r;
    for (int v = 0; v < st.n(); ++v) {
      for (int j = 0; j <= st.capacity(); ++j) snapshots << step << ',' << v + 1 << ',' << j << ',' << st.node_load_count(v, j) << '\n';
    }
    if (p.n >= 4) {
      const Phi phi = phi_functionals(st);
      phi_file << step << ',' << phi.phi1 << ',' << phi.phi2 << ',' << phi.phi_tilde << '\n';
    }
    if (s.dump_state && step == last) final_state = state_to_json(st);
  };
  const EquilibriumEstimate est = equilibrium_average(p, s.steps, burn, thin, Rng(s.seed), variant, observer);

  auto summary_csv = open_out(dir / "summary.csv");
  summary_csv << "j,zeta,stderr\n";
  for (int j = 0; j <= p.C; ++j) {
    summary_csv << j << ',' << est.zeta[static_cast<std::size_t>(j)] << ',' << est.standard_error[static_cast<std::size_t>(j)] << '\n';
  }

  json m = manifest(s);
  m["settings"]["burn_in"] = burn;
  m["settings"]["thin"] = thin;
  m["params"] = params_json(p);
  m["zeta"] = est.zeta;
  m["zeta_stderr"] = est.standard_error;
  m["samples"] = est.samples;
  m["batches"] = est.batches;
  m["arrivals"] = est.arrivals;
  m["blocked"] = est.blocked;
  const auto rate = blocking_rate(est.arrivals, est.blocked);
  m["blocking_rate"] = rate ? json(*rate) : json(nullptr);
  m["in_R_fraction"] = observed ? static_cast<double>(in_r) / observed : 0.0;
  const FixedPointResult fp = fixed_point(MeanFieldParams::from(p));
  m["eta_star"] = fp.eta;
  m["eta_star_diameter"] = fp.diameter;
  double gap = 0.0;
  for (int j = 0; j <= p.C; ++j) gap = std::max(gap, std::abs(est.zeta[static_cast<std::size_t>(j)] - fp.eta[static_cast<std::size_t>(j)]));
  m["zeta_eta_linf"] = gap;
  write_json(dir / "summary.json", m);
  if (s.dump_state) write_json(dir / "final_state.json", final_state);
  out << "zeta";
  for (double z : est.zeta) out << ' ' << z;
  out << "  (" << est.samples << " snapshots, |zeta - eta*|_inf = " << gap << ")\n";
  return kOk;
}

int cmd_couple(const Settings& s, std::ostream& out) {
  require_model(s, true);
  require(s.replicas != -1, "--replicas");
  if (s.replicas < 1) throw UsageError("--replicas must be positive");
  const ModelParams p = model_params(s);
  const RoutingVariant variant = variant_of(s);
  const fs::path dir = prepare_out(s);
  json m = manifest(s);
  m["params"] = params_json(p);

  if (s.mode == "contraction") {
    if (s.replicas < 2) throw UsageError("contraction needs at least two replicas");
    if (variant != RoutingVariant::Bdar) throw UsageError("contraction mode supports bdar routing only");
    const ContractionEstimate est = contraction_estimate(p, s.replicas, s.seed, true);
    auto csv = open_out(dir / "contraction.csv");
    csv << "replica,pre_distance,post_distance\n";
    for (std::size_t i = 0; i < est.records.size(); ++i) {
      csv << i + 1 << ',' << est.records[i].pre << ',' << est.records[i].post << '\n';
    }
    m["estimate"] = est.mean_ratio;
    m["standard_error"] = est.standard_error;
    m["ci95"] = {est.ci_low, est.ci_high};
    m["theoretical_factor"] = est.theoretical_factor;
    m["trials"] = est.trials;
    write_json(dir / "summary.json", m);
    out << "contraction estimate " << est.mean_ratio << " +- " << est.standard_error << " (bound "
        << est.theoretical_factor << ")\n";
    return kOk;
  }
  if (s.mode != "coalescence") throw UsageError("--mode must be coalescence or contraction");

  const std::int64_t max_steps = s.steps > 0 ? s.steps : 10000000;
  m["settings"]["steps"] = max_steps;
  const Rng root(s.seed);
  std::vector<std::optional<std::int64_t>> times(static_cast<std::size_t>(s.replicas));
  const NetworkState x0 = full_state(p.n, p.C);
  const NetworkState y0(p.n, p.C);
  for_each_replica(s.replicas, s.threads, [&](std::int64_t i) {
    times[static_cast<std::size_t>(i)] =
        coalescence_experiment(p, x0, y0, max_steps, root.split(static_cast<std::uint64_t>(i)), variant);
  });
  auto csv = open_out(dir / "coalescence.csv");
  csv << "replica,seed,hitting_time_or_censored\n";
  std::int64_t done = 0;
  std::vector<double> sorted;
  for (std::size_t i = 0; i < times.size(); ++i) {
    csv << i + 1 << ',' << root.split(i).seed() << ',';
    if (times[i]) {
      csv << *times[i];
      ++done;
      sorted.push_back(static_cast<double>(*times[i]));
    } else {
      csv << "censored";
      sorted.push_back(INFINITY);
    }
    csv << '\n';
  }
  std::sort(sorted.begin(), sorted.end());
  const double frac = static_cast<double>(done) / s.replicas;
  m["coalesced"] = done;
  m["censored"] = s.replicas - done;
  m["coalesced_fraction"] = frac;
  if (frac >= 0.9) {
    const std::size_t k = sorted.size() / 2;
    m["median"] = sorted.size() % 2 ? sorted[k] : 0.5 * (sorted[k - 1] + sorted[k]);
  } else {
    m["median"] = nullptr;
  }
  write_json(dir / "summary.json", m);
  out << done << " of " << s.replicas << " replicas coalesced\n";
  if (done == 0) throw ExperimentFailure("every replica was censored at " + std::to_string(max_steps) + " steps");
  return kOk;
}

int cmd_fixedpoint(const Settings& s, std::ostream& out) {
  require_model(s, false);
  const auto lambdas = parse_list(s.lambda, "--lambda");
  const fs::path dir = prepare_out(s);
  auto csv = open_out(dir / "fixedpoint.csv");
  csv << "lambda,C,d";
  for (int j = 0; j <= s.C; ++j) csv << ",eta_" << j;
  csv << ",residual,iterations,diameter,regime,status\n";
  json rows = json::array();
  bool failed = false;
  for (double lam : lambdas) {
    MeanFieldParams mp;
    try {
      mp = MeanFieldParams::make(s.C, s.d, lam);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const FixedPointResult r = fixed_point(mp);
    std::string status = "ok";
    if (!r.converged) {
      status = "not_converged";
      failed = true;
    } else if (r.diameter > 1e-9) {
      status = "starts_disagree";
    }
    csv << lam << ',' << s.C << ',' << s.d;
    for (double e : r.eta) csv << ',' << e;
    csv << ',' << r.residual << ',' << r.iterations << ',' << r.diameter << ',' << to_string(mp.regime()) << ',' << status
        << '\n';
    rows.push_back({{"lambda", lam}, {"eta", r.eta}, {"residual", r.residual}, {"iterations", r.iterations},
                    {"diameter", r.diameter}, {"map", r.map}, {"regime", to_string(mp.regime())}, {"status", status}});
    out << "lambda " << lam << ": eta* =";
    for (double e : r.eta) out << ' ' << e;
    out << " [" << status << "]\n";
  }
  json m = manifest(s);
  m["rows"] = rows;
  write_json(dir / "summary.json", m);
  return failed ? kExperimentFailure : kOk;
}

int cmd_ode(const Settings& s, std::ostream& out) {
  require_model(s, false);
  if (!(s.dt > 0.0)) throw UsageError("--dt must be positive");
  if (!(s.t_end >= 0.0)) throw UsageError("--t-end must be nonnegative");
  if (s.record_every < 1) throw UsageError("--record-every must be positive");
  MeanFieldParams mp;
  try {
    mp = MeanFieldParams::make(s.C, s.d, single_lambda(s));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Simplex xi0 = s.xi0.empty() ? vertex(s.C, s.C) : parse_list(s.xi0, "--xi0");
  try {
    check_simplex(xi0, s.C);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--xi0: ") + e.what());
  }
  const fs::path dir = prepare_out(s);
  const OdeResult r = ode_integrate(xi0, mp, s.t_end, s.dt, s.record_every);
  auto csv = open_out(dir / "ode.csv");
  csv << "t";
  for (int j = 0; j <= s.C; ++j) csv << ",xi_" << j;
  csv << '\n';
  for (std::size_t k = 0; k < r.points.size(); ++k) {
    csv << r.times[k];
    for (double x : r.points[k]) csv << ',' << x;
    csv << '\n';
  }
  const FixedPointResult fp = fixed_point(mp);
  double gap = 0.0;
  for (std::size_t j = 0; j < fp.eta.size(); ++j) gap = std::max(gap, std::abs(r.points.back()[j] - fp.eta[j]));
  json m = manifest(s);
  m["settings"]["xi0"] = xi0;
  m["final"] = r.points.back();
  m["eta_star"] = fp.eta;
  m["distance_to_eta_star"] = gap;
  m["max_projection"] = r.max_projection;
  write_json(dir / "summary.json", m);
  out << "final point distance to eta* " << gap << '\n';
  return kOk;
}

int cmd_oracle(const Settings& s, std::ostream& out) {
  require_model(s, true);
  const ModelParams p = model_params(s);
  const RoutingVariant variant = variant_of(s);
  const StateIndex index = enumerate_states(p);
  const fs::path dir = prepare_out(s);
  const SparseMatrix P = build_transition_matrix(p, index, variant);
  const StationaryResult st = stationary(P);
  const ExactExpectations ex = exact_expectations(st.pi, index, p);
  json m = manifest(s);
  m["params"] = params_json(p);
  m["states"] = index.size();
  m["solver"] = st.method;
  m["residual"] = st.residual;
  json states = json::array();
  for (std::int64_t i = 0; i < index.size(); ++i) {
    states.push_back({{"state", state_to_json(index.state(i))}, {"pi", st.pi(static_cast<Eigen::Index>(i))}});
  }
  m["pi"] = states;
  m["zeta"] = ex.zeta;
  m["zeta_by_node"] = ex.zeta_by_node;
  if (ex.phi_tilde) m["phi_tilde"] = *ex.phi_tilde;
  if (variant == RoutingVariant::Bdar) {
    const QCheck q = q_matrix_check(P, build_generator(p, index), p);
    m["q_matrix_defect"] = q.defect;
    const BalanceDefects b = balance_defects(P, st.pi, index, p);
    m["balance"] = {{"pointwise", b.pointwise}, {"stationarity", b.stationarity}, {"fixed_point_identity", b.fixed_point_identity}};
  }
  if (s.compare_sim) {
    const std::int64_t steps = s.steps > 0 ? s.steps : 10000000;
    const auto freq = simulated_frequencies(p, index, steps, Rng(s.seed));
    double worst = 0.0;
    for (std::size_t i = 0; i < freq.size(); ++i) worst = std::max(worst, std::abs(freq[i] - st.pi(static_cast<Eigen::Index>(i))));
    m["simulation"] = {{"steps", steps}, {"linf", worst}};
    out << "simulation vs pi (linf) " << worst << '\n';
  }
  if (s.dump_p) {
    auto csv = open_out(dir / "P.csv");
    csv << "row,col,prob\n";
    for (int r = 0; r < P.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(P, r); it; ++it) csv << it.row() << ',' << it.col() << ',' << it.value() << '\n';
    }
  }
  write_json(dir / "oracle.json", m);
  out << index.size() << " states, residual " << st.residual << '\n';
  return kOk;
}

int cmd_concentration(const Settings& s, std::ostream& out) {
  require_model(s, true);
  require(s.replicas != -1, "--replicas");
  if (s.replicas < 100) throw UsageError("--replicas must be at least 100");
  const ModelParams p = model_params(s);
  const int load = s.load >= 0 ? s.load : p.C;
  if (s.node < 1 || s.node > p.n) throw UsageError("--node must be a label in 1..n");
  if (load > p.C) throw UsageError("--load must be in 0..C");
  const std::int64_t steps = s.steps > 0 ? s.steps : default_burn_in(p);
  const fs::path dir = prepare_out(s);
  const ConcentrationResult r = concentration_experiment(p, s.replicas, steps, s.node - 1, load, s.seed, s.threads);
  auto csv = open_out(dir / "concentration.csv");
  csv << "replica,f\n";
  for (std::size_t i = 0; i < r.values.size(); ++i) csv << i + 1 << ',' << r.values[i] << '\n';
  auto tails = open_out(dir / "tails.csv");
  tails << "a,probability\n";
  for (const auto& t : r.tails) tails << t.a << ',' << t.probability << '\n';
  json m = manifest(s);
  m["settings"]["steps"] = steps;
  m["settings"]["load"] = load;
  m["params"] = params_json(p);
  m["mean"] = r.mean;
  m["variance"] = r.variance;
  json tj = json::array();
  for (const auto& t : r.tails) tj.push_back({{"a", t.a}, {"probability", t.probability}});
  m["tails"] = tj;
  write_json(dir / "summary.json", m);
  out << "mean " << r.mean << ", variance " << r.variance << '\n';
  return kOk;
}

// Options that a JSON config file may supply; flags given on the command
// line take precedence.
struct Binding {
  CLI::Option* option;
  std::function<void(const json&)> assign;
};

template <class T>
Binding bind_option(CLI::App& app, const std::string& flag, T& target, const std::string& help) {
  CLI::Option* opt = app.add_option(flag, target, help);
  return Binding{opt, [&target](const json& v) {
    if constexpr (std::is_same_v<T, std::string>) {
      // Numbers and lists of numbers are accepted for string-valued options.
      if (v.is_number()) {
        std::ostringstream ss;
        ss << std::setprecision(17) << v.get<double>();
        target = ss.str();
        return;
      }
      if (v.is_array()) {
        std::ostringstream ss;
        ss << std::setprecision(17);
        for (std::size_t i = 0; i < v.size(); ++i) ss << (i ? "," : "") << v[i].get<double>();
        target = ss.str();
        return;
      }
    }
    target = v.get<T>();
  }};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Simulator and mean-field analyser for balanced dynamic alternative routing"};
  app.require_subcommand(1, 1);
  std::map<std::string, std::vector<std::pair<std::string, Binding>>> bindings;

  const auto common = [&](CLI::App* sub) {
    auto& b = bindings[sub->get_name()];
    b.emplace_back("n", bind_option(*sub, "--n", s.n, "number of nodes"));
    b.emplace_back("C", bind_option(*sub, "--C", s.C, "link capacity"));
    b.emplace_back("d", bind_option(*sub, "--d", s.d, "alternative routes per call"));
    b.emplace_back("lambda", bind_option(*sub, "--lambda", s.lambda, "arrival rate per pair (comma list for fixedpoint)"));
    b.emplace_back("seed", bind_option(*sub, "--seed", s.seed, "random seed"));
    b.emplace_back("steps", bind_option(*sub, "--steps", s.steps, "jump-chain steps"));
    b.emplace_back("replicas", bind_option(*sub, "--replicas", s.replicas, "independent replicas"));
    b.emplace_back("burn_in", bind_option(*sub, "--burn-in", s.burn_in, "burn-in steps"));
    b.emplace_back("thin", bind_option(*sub, "--thin", s.thin, "steps between snapshots"));
    b.emplace_back("variant", bind_option(*sub, "--variant", s.variant, "routing rule: bdar or fdar"));
    b.emplace_back("out", bind_option(*sub, "--out", s.out, "output directory"));
    b.emplace_back("threads", bind_option(*sub, "--threads", s.threads, "worker threads for replicas"));
    sub->add_option("--config", s.config, "JSON file with default settings");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run one chain and estimate equilibrium load proportions");
  common(simulate);
  simulate->add_flag("--dump-state", s.dump_state, "write the final snapshot as JSON");

  CLI::App* couple = app.add_subcommand("couple", "coalescence times or one-step contraction of the coupling");
  common(couple);
  bindings["couple"].emplace_back("mode", bind_option(*couple, "--mode", s.mode, "coalescence or contraction"));

  CLI::App* fixedpoint = app.add_subcommand("fixedpoint", "solve the mean-field fixed point");
  common(fixedpoint);

  CLI::App* ode = app.add_subcommand("ode", "integrate the mean-field ODE");
  common(ode);
  bindings["ode"].emplace_back("t_end", bind_option(*ode, "--t-end", s.t_end, "final time"));
  bindings["ode"].emplace_back("dt", bind_option(*ode, "--dt", s.dt, "RK4 step"));
  bindings["ode"].emplace_back("xi0", bind_option(*ode, "--xi0", s.xi0, "initial point, comma separated"));
  bindings["ode"].emplace_back("record_every", bind_option(*ode, "--record-every", s.record_every, "steps between rows"));

  CLI::App* oracle = app.add_subcommand("oracle", "exact stationary distribution for tiny networks");
  common(oracle);
  oracle->add_flag("--compare-sim", s.compare_sim, "compare with simulated visit frequencies");
  oracle->add_flag("--dump-p", s.dump_p, "write the transition matrix as CSV triplets");

  CLI::App* concentration = app.add_subcommand("concentration", "spread of f_{v,j} across replicas");
  common(concentration);
  bindings["concentration"].emplace_back("node", bind_option(*concentration, "--node", s.node, "node label (1-based)"));
  bindings["concentration"].emplace_back("load", bind_option(*concentration, "--load", s.load, "load level j (default C)"));

  std::vector<std::string> argv_store{"bdar"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    s.command = sub->get_name();
    if (!s.config.empty()) {
      std::ifstream f(s.config);
      if (!f) throw UsageError("cannot read config file " + s.config);
      json cfg;
      try {
        f >> cfg;
      } catch (const json::exception& e) {
        throw UsageError("config file is not valid JSON: " + std::string(e.what()));
      }
      for (auto& [key, b] : bindings[s.command]) {
        if (b.option->count() == 0 && cfg.contains(key)) {
          try {
            b.assign(cfg.at(key));
          } catch (const json::exception& e) {
            throw UsageError("config key '" + key + "' has the wrong type");
          }
        }
      }
    }
    if (s.command == "simulate") return cmd_simulate(s, out);
    if (s.command == "couple") return cmd_couple(s, out);
    if (s.command == "fixedpoint") return cmd_fixedpoint(s, out);
    if (s.command == "ode") return cmd_ode(s, out);
    if (s.command == "oracle") return cmd_oracle(s, out);
    if (s.command == "concentration") return cmd_concentration(s, out);
    throw UsageError("unknown command");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const StateSpaceTooLarge& e) {
    err << "refused: " << e.what() << '\n';
    return kResourceGuard;
  } catch (const ExperimentFailure& e) {
    err << "failed: " << e.what() << '\n';
    return kExperimentFailure;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return kExperimentFailure;
  }
}

}  // namespace bdar::cli
