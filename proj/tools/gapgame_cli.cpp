// gapgame command-line front end. Every run writes manifest.json next to its
// outputs; `--replay manifest.json` re-runs the recorded invocation.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gapgame/gapgame.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace gapgame;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitValidationFailed = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 42;
  unsigned threads = default_thread_count();
  std::string out_dir = ".";
  std::optional<double> tol_eps;
  std::string lambda_mode = "resolve";
};

// Scenario input shared by the schedule-based subcommands. Values given as
// flags override the config file or preset.
struct ScenarioInput {
  std::string config;
  std::string scenario;
  std::optional<std::string> setting;
  std::optional<double> r;
  std::optional<double> fee_rate, base_reward, block_interval, opex_rate, capex_rate;

  void add_to(CLI::App* sub) {
    sub->add_option("--config", config, "scenario JSON file");
    sub->add_option("--scenario", scenario, "built-in scenario name");
    sub->add_option("--setting", setting, "expense preset: HighOpex | MidOC | LowOpex");
    sub->add_option("--r", r, "base-reward ratio R / (f T)");
    sub->add_option("--fee-rate", fee_rate);
    sub->add_option("--base-reward", base_reward);
    sub->add_option("--block-interval", block_interval);
    sub->add_option("--opex-rate", opex_rate);
    sub->add_option("--capex-rate", capex_rate);
  }

  Scenario resolve() const {
    if (config.empty() == scenario.empty())
      throw UsageError("exactly one of --config or --scenario is required");
    Scenario sc = config.empty() ? preset_scenario(scenario) : load_scenario_file(config);
    SystemParams& p = sc.params;
    const double old_T = p.block_interval;
    if (fee_rate) p.fee_rate = *fee_rate;
    if (block_interval) {
      // starts are kept in units of T
      p.block_interval = *block_interval;
      for (auto& pl : sc.schedule.players)
        for (auto& g : pl.groups) g.start *= p.block_interval / old_T;
    }
    if (setting) {
      ExpenseSetting s = ExpenseSetting::preset(ExpenseSetting::parse(*setting));
      p.opex_rate = s.opex_rate;
      p.capex_rate = s.capex_rate;
    }
    if (opex_rate) p.opex_rate = *opex_rate;
    if (capex_rate) p.capex_rate = *capex_rate;
    if (r && base_reward) throw UsageError("--r and --base-reward are mutually exclusive");
    if (r) p.base_reward = *r * p.fee_rate * p.block_interval;
    if (base_reward) p.base_reward = *base_reward;
    p.total_rigs = sc.schedule.total_rigs();
    p.validate();
    sc.schedule.validate();
    return sc;
  }
};

json params_json(const SystemParams& p) {
  return {{"fee_rate", p.fee_rate},       {"base_reward", p.base_reward},
          {"block_interval", p.block_interval}, {"opex_rate", p.opex_rate},
          {"capex_rate", p.capex_rate},   {"total_rigs", p.total_rigs},
          {"base_reward_ratio", p.base_reward_ratio()}};
}

EquilibriumOptions equilibrium_options(const Globals& g) {
  EquilibriumOptions o;
  o.seed = g.seed;
  o.lambda_mode = parse_lambda_mode(g.lambda_mode);
  if (g.tol_eps) o.eps_tolerance = *g.tol_eps;
  return o;
}

json options_json(const EquilibriumOptions& o) {
  return {{"eps_tolerance", o.eps_tolerance}, {"gain_threshold", o.gain_threshold},
          {"max_sweeps", o.max_sweeps},       {"seed", o.seed},
          {"lambda_mode", std::string(to_string(o.lambda_mode))},
          {"start_cap", o.start_cap},         {"grid_points", o.grid_points},
          {"refine_tolerance", o.refine_tolerance}, {"randomize_initial", o.randomize_initial}};
}

// Collects output files and resolved parameters for the manifest.
struct Run {
  Globals globals;
  std::vector<std::string> outputs;
  json parameters = json::object();

  std::ofstream open(const std::string& name) {
    fs::create_directories(globals.out_dir);
    fs::path path = fs::path(globals.out_dir) / name;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    outputs.push_back(path.string());
    return os;
  }
};

double norm_start(const RigGroup& g, const SystemParams& p) { return g.start / p.block_interval; }

void write_schedule_csv(std::ostream& os, const StartSchedule& s, const SystemParams& p,
                        const UtilityReport& rep) {
  os << "player,group,rigs,start_normalized,utility,normalized_utility\n";
  for (std::size_t i = 0; i < s.players.size(); ++i)
    for (std::size_t g = 0; g < s.players[i].groups.size(); ++g)
      os << i << ',' << g << ',' << s.players[i].groups[g].rigs << ','
         << format_number(norm_start(s.players[i].groups[g], p)) << ','
         << format_number(rep.players[i].utility) << ','
         << format_number(rep.players[i].normalized_utility) << '\n';
}

int cmd_solve_rate(Run& run, const ScenarioInput& in) {
  Scenario sc = in.resolve();
  DifficultySolution sol = solve_rate(sc.schedule, sc.params);
  const double mean = expected_block_time(sc.schedule, sol.rate);
  run.parameters["params"] = params_json(sc.params);
  run.parameters["scenario"] = scenario_to_json(sc);
  std::printf("rate = %.10g\nexpected_block_time = %.10g\n", sol.rate, mean);
  auto os = run.open("solve_rate.csv");
  os << "rate,expected_block_time,residual,iterations\n"
     << format_number(sol.rate) << ',' << format_number(mean) << ','
     << format_number(sol.residual) << ',' << sol.iterations << '\n';
  return kExitOk;
}

struct CurveArgs {
  std::optional<std::size_t> player;
  std::size_t group = 0;
  std::size_t points = 101;
  double max_start = 1.0;
};

int cmd_utility(Run& run, const ScenarioInput& in, const CurveArgs& curve) {
  Scenario sc = in.resolve();
  const double rate = solve_rate(sc.schedule, sc.params).rate;
  UtilityReport rep = utility_report(sc.schedule, sc.params, rate);
  run.parameters["params"] = params_json(sc.params);
  run.parameters["scenario"] = scenario_to_json(sc);
  {
    auto os = run.open("utility.csv");
    os << "player,rigs,power_share,expected_income,expected_expenses,utility,normalized_utility\n";
    for (std::size_t i = 0; i < rep.players.size(); ++i) {
      const auto& u = rep.players[i];
      os << i << ',' << u.rig_count << ',' << format_number(u.power_share) << ','
         << format_number(u.expected_income) << ',' << format_number(u.expected_expenses) << ','
         << format_number(u.utility) << ',' << format_number(u.normalized_utility) << '\n';
      std::printf("player %zu: utility %.6g (normalized %.6g)\n", i, u.utility,
                  u.normalized_utility);
    }
  }
  if (curve.player) {
    run.parameters["curve"] = {{"player", *curve.player}, {"group", curve.group},
                               {"points", curve.points}, {"max_start", curve.max_start}};
    auto pts = utility_curve(sc.schedule, sc.params, *curve.player, curve.group,
                             curve.max_start * sc.params.block_interval, curve.points,
                             parse_lambda_mode(run.globals.lambda_mode));
    auto os = run.open("utility_curve.csv");
    os << "start_normalized,utility,normalized_utility\n";
    for (const auto& p : pts)
      os << format_number(p.start / sc.params.block_interval) << ',' << format_number(p.utility)
         << ',' << format_number(p.normalized_utility) << '\n';
  }
  return kExitOk;
}

int cmd_best_response(Run& run, const ScenarioInput& in, std::size_t player, std::size_t group) {
  Scenario sc = in.resolve();
  EquilibriumOptions opt = equilibrium_options(run.globals);
  const double rate = solve_rate(sc.schedule, sc.params).rate;
  const double current = expected_utility(sc.schedule, sc.params, rate, player);
  BestResponse br = best_response_start(sc.schedule, sc.params, rate, player, group, opt);
  run.parameters["params"] = params_json(sc.params);
  run.parameters["scenario"] = scenario_to_json(sc);
  run.parameters["options"] = options_json(opt);
  const double T = sc.params.block_interval;
  std::printf("player %zu group %zu: best start %.6g T (utility %.6g, gain %.6g)\n", player, group,
              br.start / T, br.utility, br.utility - current);
  auto os = run.open("best_response.csv");
  os << "player,group,current_start_normalized,best_start_normalized,current_utility,best_utility,"
        "gain\n"
     << player << ',' << group << ','
     << format_number(sc.schedule.players.at(player).groups.at(group).start / T) << ','
     << format_number(br.start / T) << ',' << format_number(current) << ','
     << format_number(br.utility) << ',' << format_number(br.utility - current) << '\n';
  return kExitOk;
}

int cmd_equilibrium(Run& run, const ScenarioInput& in, bool random_init) {
  Scenario sc = in.resolve();
  EquilibriumOptions opt = equilibrium_options(run.globals);
  opt.randomize_initial = random_init;
  run.parameters["params"] = params_json(sc.params);
  run.parameters["scenario"] = scenario_to_json(sc);
  run.parameters["options"] = options_json(opt);
  EquilibriumResult eq = find_equilibrium(sc.schedule, sc.params, opt);
  const double T = sc.params.block_interval;
  {
    auto os = run.open("equilibrium.csv");
    write_schedule_csv(os, eq.schedule, sc.params, eq.report);
  }
  {
    auto os = run.open("trace.csv");
    os << "sweep,player,group,old_start_normalized,new_start_normalized,gain\n";
    for (const auto& t : eq.trace)
      os << t.sweep << ',' << t.player << ',' << t.group << ',' << format_number(t.old_start / T)
         << ',' << format_number(t.new_start / T) << ',' << format_number(t.gain) << '\n';
  }
  std::printf("%s after %d sweeps, epsilon %.3g, rate %.10g\n",
              eq.converged ? "converged" : "NOT converged", eq.sweeps, eq.epsilon, eq.rate);
  for (std::size_t i = 0; i < eq.schedule.players.size(); ++i) {
    std::printf("player %zu:", i);
    for (const auto& g : eq.schedule.players[i].groups)
      std::printf(" %d@%.4f", g.rigs, g.start / T);
    std::printf("\n");
  }
  return eq.converged ? kExitOk : kExitNoConvergence;
}

int cmd_simulate(Run& run, const ScenarioInput& in, std::uint64_t blocks, std::size_t reps,
                 double fee_noise) {
  Scenario sc = in.resolve();
  const double rate = solve_rate(sc.schedule, sc.params).rate;
  UtilityReport rep = utility_report(sc.schedule, sc.params, rate);
  SimulationOptions so;
  so.fee_noise = fee_noise;
  SimulationResult sim = simulate_replications(sc.schedule, sc.params, rate, blocks,
                                               run.globals.seed, reps, run.globals.threads, so);
  run.parameters["params"] = params_json(sc.params);
  run.parameters["scenario"] = scenario_to_json(sc);
  run.parameters["simulation"] = {{"blocks", blocks}, {"replications", reps},
                                  {"fee_noise", fee_noise}};
  auto os = run.open("simulate.csv");
  os << "player,blocks_won,win_rate,mean_profit,standard_error,analytic_utility,z\n";
  for (std::size_t i = 0; i < sim.players.size(); ++i) {
    const auto& p = sim.players[i];
    double z = p.standard_error > 0 ? (p.mean_profit - rep.players[i].utility) / p.standard_error : 0;
    os << i << ',' << p.blocks_won << ','
       << format_number(static_cast<double>(p.blocks_won) / sim.total_blocks) << ','
       << format_number(p.mean_profit) << ',' << format_number(p.standard_error) << ','
       << format_number(rep.players[i].utility) << ',' << format_number(z) << '\n';
    std::printf("player %zu: simulated %.6g +- %.3g, analytic %.6g\n", i, p.mean_profit,
                p.standard_error, rep.players[i].utility);
  }
  std::printf("mean block interval %.6g +- %.3g\n", sim.mean_block_interval,
              sim.interval_standard_error);
  return kExitOk;
}

std::vector<ExpenseSetting> parse_settings(const std::vector<std::string>& names) {
  std::vector<ExpenseSetting> out;
  for (const auto& n : names) out.push_back(ExpenseSetting::preset(ExpenseSetting::parse(n)));
  return out;
}

int cmd_sweep(Run& run, std::vector<int> players, std::vector<std::string> settings,
              std::vector<double> rs, bool coalitions) {
  SweepSpec spec;
  if (!players.empty()) spec.player_counts = players;
  if (!settings.empty()) spec.settings = parse_settings(settings);
  if (!rs.empty()) spec.r_values = rs;
  spec.seed = run.globals.seed;
  spec.threads = run.globals.threads;
  spec.coalitions = coalitions;
  spec.equilibrium = equilibrium_options(run.globals);
  json names = json::array();
  for (const auto& s : spec.settings) names.push_back(std::string(ExpenseSetting::to_string(s.kind)));
  run.parameters["sweep"] = {{"players", spec.player_counts}, {"settings", names},
                             {"r", spec.r_values},           {"coalitions", coalitions},
                             {"total_rigs", spec.total_rigs}};
  run.parameters["options"] = options_json(spec.equilibrium);
  SweepOutput out = run_sweep(spec);
  {
    auto os = run.open("sweep.csv");
    write_sweep_csv(os, out.rows);
  }
  if (coalitions) {
    auto os = run.open("coalition.csv");
    write_coalition_csv(os, out.coalitions);
  }
  int bad = 0;
  for (const auto& r : out.rows) bad += r.converged ? 0 : 1;
  std::printf("%zu grid points, %d not converged\n", out.rows.size(), bad);
  return bad == 0 ? kExitOk : kExitNoConvergence;
}

int cmd_min_brr(Run& run, std::vector<std::string> settings, std::vector<int> players,
                std::vector<double> xs) {
  if (settings.empty()) settings = {"LowOpex", "MidOC", "HighOpex"};
  if (players.empty()) players = {2, 4, 8, 16, 32, 64, 128};
  if (xs.empty()) xs = {0.01, 0.05, 0.1};
  MinBrrOptions opt;
  opt.equilibrium = equilibrium_options(run.globals);
  run.parameters["min_brr"] = {{"settings", settings}, {"players", players}, {"x", xs},
                               {"resolution", opt.resolution}};
  run.parameters["options"] = options_json(opt.equilibrium);
  struct Job {
    ExpenseSetting s;
    int players;
    double x;
  };
  std::vector<Job> jobs;
  for (const auto& s : parse_settings(settings))
    for (int p : players)
      for (double x : xs) jobs.push_back({s, p, x});
  std::vector<double> r(jobs.size());
  parallel_for(jobs.size(), run.globals.threads, [&](std::size_t i) {
    r[i] = min_brr_for_bounded_gap(jobs[i].s, jobs[i].players, jobs[i].x, opt).r_min;
  });
  auto os = run.open("min_brr.csv");
  os << "setting,players,x,r_min\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    os << ExpenseSetting::to_string(jobs[i].s.kind) << ',' << jobs[i].players << ','
       << format_number(jobs[i].x) << ',' << format_number(r[i]) << '\n';
    std::printf("%s players=%d x=%g: r_min %.4g\n",
                std::string(ExpenseSetting::to_string(jobs[i].s.kind)).c_str(), jobs[i].players,
                jobs[i].x, r[i]);
  }
  return kExitOk;
}

int cmd_bitcoin(Run& run, const MiningHardware& hw, int miners, double current_r, double x) {
  MinBrrOptions opt;
  opt.equilibrium = equilibrium_options(run.globals);
  run.parameters["hardware"] = {{"rig_price", hw.rig_price},
                                {"lifetime_years", hw.lifetime_years},
                                {"power_kw", hw.power_kw},
                                {"electricity_per_kwh", hw.electricity_per_kwh}};
  run.parameters["miners"] = miners;
  run.parameters["current_r"] = current_r;
  run.parameters["gap_bound"] = x;
  BitcoinReport rep = bitcoin_case_study(hw, miners, current_r, x, opt);
  const std::string setting(ExpenseSetting::to_string(rep.setting));
  auto os = run.open("bitcoin_case.csv");
  os << "capex_per_year,opex_per_year,opex_fraction,setting,miners,gap_bound,threshold_r,current_r,"
        "gaps_profitable\n"
     << format_number(rep.capex_per_year) << ',' << format_number(rep.opex_per_year) << ','
     << format_number(rep.opex_fraction) << ',' << setting << ',' << rep.miners << ','
     << format_number(rep.gap_bound) << ',' << format_number(rep.threshold_r) << ','
     << format_number(rep.current_r) << ',' << (rep.gaps_profitable ? "true" : "false") << '\n';
  std::printf("capex %.2f $/yr, opex %.2f $/yr -> %s\n", rep.capex_per_year, rep.opex_per_year,
              setting.c_str());
  std::printf("threshold r %.4g for %d miners (gap <= %g T); at r = %g gaps are %s\n",
              rep.threshold_r, miners, x, current_r,
              rep.gaps_profitable ? "profitable" : "not profitable");
  return kExitOk;
}

int cmd_fee_fit(Run& run, const std::string& input) {
  std::ifstream in(input);
  if (!in) throw UsageError("--input: cannot open " + input);
  run.parameters["input"] = input;
  FeeFitResult fit = fit_fee_accumulation(in);
  auto os = run.open("fee_fit.csv");
  os << "window,samples,slope,intercept,r_squared\n";
  for (std::size_t i = 0; i < fit.windows.size(); ++i) {
    const auto& w = fit.windows[i];
    os << i << ',' << w.samples << ',' << format_number(w.slope) << ','
       << format_number(w.intercept) << ',' << format_number(w.r_squared) << '\n';
  }
  std::printf("%zu windows: mean slope %.6g, mean intercept %.6g, mean R^2 %.4f\n",
              fit.windows.size(), fit.mean_slope, fit.mean_intercept, fit.mean_r_squared);
  return kExitOk;
}

int cmd_validate(Run& run, const std::vector<std::string>& only) {
  ValidationContext ctx;
  ctx.seed = run.globals.seed;
  ctx.threads = run.globals.threads;
  run.parameters["only"] = only;
  int failed = 0, ran = 0;
  auto os = run.open("validate.txt");
  for (const auto& c : acceptance_criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    ++ran;
    CriterionOutcome out;
    try {
      out = c.run(ctx);
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    std::string line = std::string(out.passed ? "PASS " : "FAIL ") + c.name + ": " + out.detail;
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    os << line << '\n';
    if (!out.passed) ++failed;
  }
  if (ran == 0) throw UsageError("--only: no criterion matched");
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? kExitOk : kExitValidationFailed;
}

std::vector<std::string> strip_out_dir(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out-dir") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out-dir=", 0) == 0) continue;
    out.push_back(args[i]);
  }
  return out;
}

int run_args(const std::vector<std::string>& args, const std::string& replayed_from);

int run_replay(const std::string& manifest_path, const std::optional<std::string>& out_dir) {
  std::ifstream in(manifest_path);
  if (!in) throw UsageError("--replay: cannot open " + manifest_path);
  json m;
  try {
    m = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("--replay: malformed manifest (" + std::string(e.what()) + ")");
  }
  if (!m.contains("argv") || !m["argv"].is_array()) throw UsageError("--replay: manifest has no argv");
  auto args = m["argv"].get<std::vector<std::string>>();
  args.push_back("--out-dir");
  args.push_back(out_dir ? *out_dir : m.value("out_dir", std::string(".")));
  return run_args(args, manifest_path);
}

int run_args(const std::vector<std::string>& args, const std::string& replayed_from) {
  CLI::App app{"Mining-gap game: difficulty, utilities, equilibria and experiments"};
  app.require_subcommand(0, 1);
  Globals g;
  std::optional<std::string> replay;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (default: hardware concurrency)");
  app.add_option("--out-dir", g.out_dir, "directory for outputs and manifest.json")
      ->capture_default_str();
  app.add_option("--tol-eps", g.tol_eps, "equilibrium tolerance, relative to fT + R");
  app.add_option("--lambda-mode", g.lambda_mode, "resolve | fixed")->capture_default_str();
  app.add_option("--replay", replay, "re-run the invocation recorded in a manifest");

  ScenarioInput in;
  auto with_scenario = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    in.add_to(sub);
    return sub;
  };
  auto* solve = with_scenario("solve-rate", "solve the per-rig rate for a schedule");
  CurveArgs curve;
  auto* util = with_scenario("utility", "expected utility of every player");
  util->add_option("--curve-player", curve.player, "also tabulate utility vs this player's start");
  util->add_option("--curve-group", curve.group);
  util->add_option("--curve-points", curve.points);
  util->add_option("--curve-max", curve.max_start, "largest start on the curve, units of T");
  std::size_t br_player = 0, br_group = 0;
  auto* br = with_scenario("best-response", "best start for one player's group");
  br->add_option("--player", br_player)->required();
  br->add_option("--group", br_group);
  bool random_init = false;
  auto* eq = with_scenario("equilibrium", "best-response dynamics to an epsilon-Nash equilibrium");
  eq->add_flag("--random-init", random_init, "draw initial starts uniformly in [0, 0.9 T)");
  std::uint64_t blocks = 10000;
  std::size_t reps = 10;
  double fee_noise = 0;
  auto* sim = with_scenario("simulate", "Monte Carlo block simulation");
  sim->add_option("--blocks", blocks)->capture_default_str();
  sim->add_option("--replications", reps)->capture_default_str();
  sim->add_option("--fee-noise", fee_noise, "relative Gaussian noise on fees");

  std::vector<int> sw_players;
  std::vector<std::string> sw_settings;
  std::vector<double> sw_r;
  bool no_coalitions = false;
  auto* sweep = app.add_subcommand("sweep", "equal-size equilibria over players x setting x r");
  sweep->fallthrough();
  sweep->add_option("--players", sw_players);
  sweep->add_option("--settings", sw_settings);
  sweep->add_option("--r", sw_r);
  sweep->add_flag("--no-coalitions", no_coalitions, "skip the merged-pair comparison");

  std::vector<std::string> mb_settings;
  std::vector<int> mb_players;
  std::vector<double> mb_x;
  auto* mb = app.add_subcommand("min-brr", "minimal base-reward ratio bounding the gap");
  mb->fallthrough();
  mb->add_option("--settings", mb_settings);
  mb->add_option("--players", mb_players);
  mb->add_option("--x", mb_x, "gap bounds, units of T");

  MiningHardware hw;
  int miners = 8;
  double current_r = 12.5, gap_bound = 0.05;
  auto* btc = app.add_subcommand("bitcoin-case", "hardware economics to expense setting and r threshold");
  btc->fallthrough();
  btc->add_option("--rig-price", hw.rig_price)->capture_default_str();
  btc->add_option("--lifetime", hw.lifetime_years, "years")->capture_default_str();
  btc->add_option("--power-kw", hw.power_kw)->capture_default_str();
  btc->add_option("--tariff", hw.electricity_per_kwh, "$ per kWh")->capture_default_str();
  btc->add_option("--miners", miners)->capture_default_str();
  btc->add_option("--current-r", current_r)->capture_default_str();
  btc->add_option("--gap-bound", gap_bound)->capture_default_str();

  std::string fee_input;
  auto* fee = app.add_subcommand("fee-fit", "linear fit of fee accumulation per block window");
  fee->fallthrough();
  fee->add_option("--input", fee_input, "CSV with header timestamp_seconds,fees_total")->required();

  std::vector<std::string> only;
  auto* val = app.add_subcommand("validate", "run the acceptance criteria");
  val->fallthrough();
  val->add_option("--only", only, "criterion names");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  }

  if (replay) {
    if (!replayed_from.empty()) throw UsageError("--replay: manifests cannot replay other manifests");
    auto* outdir = app.get_option("--out-dir");
    return run_replay(*replay, outdir->count() ? std::optional<std::string>(g.out_dir) : std::nullopt);
  }
  if (app.get_subcommands().empty()) {
    std::fprintf(stderr, "usage error: a subcommand is required\n%s", app.help().c_str());
    return kExitUsage;
  }
  if (g.threads == 0) g.threads = 1;

  CLI::App* sub = app.get_subcommands().front();
  Run run;
  run.globals = g;
  const auto t0 = std::chrono::steady_clock::now();
  int code = kExitOk;
  if (sub == solve) code = cmd_solve_rate(run, in);
  else if (sub == util) code = cmd_utility(run, in, curve);
  else if (sub == br) code = cmd_best_response(run, in, br_player, br_group);
  else if (sub == eq) code = cmd_equilibrium(run, in, random_init);
  else if (sub == sim) code = cmd_simulate(run, in, blocks, reps, fee_noise);
  else if (sub == sweep) code = cmd_sweep(run, sw_players, sw_settings, sw_r, !no_coalitions);
  else if (sub == mb) code = cmd_min_brr(run, mb_settings, mb_players, mb_x);
  else if (sub == btc) code = cmd_bitcoin(run, hw, miners, current_r, gap_bound);
  else if (sub == fee) code = cmd_fee_fit(run, fee_input);
  else if (sub == val) code = cmd_validate(run, only);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json manifest;
  manifest["tool"] = "gapgame";
  manifest["version"] = kVersion;
  manifest["subcommand"] = sub->get_name();
  manifest["argv"] = strip_out_dir(args);
  manifest["out_dir"] = g.out_dir;
  manifest["seed"] = g.seed;
  manifest["threads"] = g.threads;
  manifest["tol_eps"] = g.tol_eps ? json(*g.tol_eps) : json(nullptr);
  manifest["lambda_mode"] = g.lambda_mode;
  manifest["parameters"] = run.parameters;
  manifest["outputs"] = run.outputs;
  manifest["exit_code"] = code;
  manifest["wall_clock_seconds"] = secs;
  if (!replayed_from.empty()) manifest["replayed_from"] = replayed_from;
  fs::create_directories(g.out_dir);
  std::ofstream(fs::path(g.out_dir) / "manifest.json") << manifest.dump(2) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_args(args, "");
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const NoConvergence& e) {
    std::fprintf(stderr, "no convergence: %s\n", e.what());
    return kExitNoConvergence;
  } catch (const InfeasibleSchedule& e) {
    std::fprintf(stderr, "infeasible schedule: %s\n", e.what());
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}
