// Command-line workbench: demand sampling, simulation replay, baseline
// evaluation and tuning, PPO training, ablations and eta-bound tables.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "tsc/config.hpp"
#include "tsc/eta.hpp"
#include "tsc/harness.hpp"
#include "tsc/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kOutEnv = "TSC_OUTPUT_DIR";

struct Common {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> threads;
  std::optional<double> gamma;
  std::optional<double> eta;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app->add_option("--preset", c.preset, "desk or paper");
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--out", c.out_dir, std::string("Output directory (default from ") + kOutEnv + ", else ./runs)");
  app->add_option("--threads", c.threads, "Worker threads for rollouts");
  app->add_option("--gamma", c.gamma, "Discount factor");
  app->add_option("--eta", c.eta, "Equity exponent");
}

tsc::Settings resolve(const Common& c) {
  tsc::Settings s = c.config_path.empty() ? tsc::preset_settings(c.preset.empty() ? "desk" : c.preset)
                                          : tsc::load_settings_file(c.config_path, c.preset);
  if (c.seed) s.ppo.seed = *c.seed;
  if (c.threads) s.ppo.threads = *c.threads;
  if (c.gamma) s.ppo.gamma = *c.gamma;
  if (c.eta) s.ppo.eta = *c.eta;
  s.validate();
  return s;
}

fs::path output_dir(const Common& c, const std::string& sub) {
  fs::path base;
  if (!c.out_dir.empty()) base = c.out_dir;
  else if (const char* env = std::getenv(kOutEnv); env && *env) base = env;
  else base = fs::path("runs") / sub;
  fs::create_directories(base);
  return base;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void write_manifest(const fs::path& dir, const std::string& sub, const std::vector<std::string>& argv,
                    const tsc::Settings& s, std::uint64_t seed, const std::vector<std::string>& outputs,
                    const json& extra = json::object()) {
  const std::string ini = tsc::to_ini(s);
  json m{{"tool", "tsc"},
         {"version", kVersion},
         {"subcommand", sub},
         {"argv", argv},
         {"seed", seed},
         {"preset", s.preset},
         {"config_hash", "fnv1a64:" + hex64(tsc::fnv1a(ini))},
         {"config", ini},
         {"compiler", __VERSION__},
         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION)},
         {"created_unix", static_cast<std::int64_t>(std::time(nullptr))},
         {"outputs", outputs}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
  std::ofstream(dir / "config.ini") << ini;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << std::setprecision(10);
  return f;
}

tsc::Band band_from(const std::vector<double>& v) {
  if (v.size() != 2 || !(v[0] >= 0) || v[1] < v[0]) throw tsc::ConfigError("--band needs LO HI with 0 <= LO <= HI");
  return {v[0], v[1]};
}

std::vector<tsc::Band> bands_from(const std::vector<double>& v) {
  if (v.empty()) return tsc::evaluation_bands();
  return {band_from(v)};
}

struct ControllerFlags {
  std::string kind = "max-pressure";
  int green = 20;
  int g_min = 5;
  double history = 300;
  double cycle_min = 40;
  double cycle_max = 160;
  std::string checkpoint;
  bool tuned = false;
};

void add_controller(CLI::App* app, ControllerFlags& f, bool allow_policy) {
  app->add_option("--controller", f.kind,
                  std::string("uniform, webster, max-pressure") + (allow_policy ? ", random or policy" : ""));
  app->add_option("--green", f.green, "Uniform green duration (s)");
  app->add_option("--g-min", f.g_min, "Max-pressure minimum green (s)");
  app->add_option("--history", f.history, "Webster history window (s)");
  app->add_option("--cycle-min", f.cycle_min, "Webster minimum cycle (s)");
  app->add_option("--cycle-max", f.cycle_max, "Webster maximum cycle (s)");
  if (allow_policy) {
    app->add_option("--checkpoint", f.checkpoint, "Policy checkpoint (JSON) for --controller policy");
    app->add_flag("--tuned", f.tuned, "Grid-search the baseline per episode");
  }
}

tsc::Controller make_controller(const ControllerFlags& f, double saturation_flow) {
  switch (tsc::parse_controller_kind(f.kind)) {
    case tsc::ControllerKind::Uniform: return tsc::UniformController(f.green);
    case tsc::ControllerKind::Webster:
      return tsc::WebsterController({f.history, f.cycle_min, f.cycle_max, saturation_flow});
    case tsc::ControllerKind::MaxPressure: return tsc::MaxPressureController(f.g_min);
  }
  throw tsc::ConfigError("unknown controller");
}

tsc::ActorCritic<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tsc::ConfigError("cannot open checkpoint " + path);
  return tsc::checkpoint_from_json<float>(json::parse(in));
}

// ---------------------------------------------------------------------------

int cmd_sample_demand(const Common& c, const std::vector<double>& band_v, int n, std::int64_t duration,
                      bool training, const std::vector<std::string>& argv) {
  const auto s = resolve(c);
  const tsc::Band band = band_from(band_v);
  json eps = json::array();
  std::vector<tsc::DemandEpisode> list;
  for (int i = 0; i < n; ++i) {
    const auto seed = tsc::CounterRng::derive(s.ppo.seed, static_cast<std::uint64_t>(i));
    list.push_back(training ? tsc::sample_episode(band.lo, band.hi, duration, seed)
                            : tsc::sample_eval_episode(band.lo, band.hi, duration, seed));
    eps.push_back(tsc::to_json(list.back()));
  }
  std::cout << std::setprecision(17) << eps.dump(2) << '\n';
  if (!c.out_dir.empty()) {
    const auto dir = output_dir(c, "sample-demand");
    std::vector<std::string> outputs{"episodes.json"};
    std::ofstream(dir / "episodes.json") << eps.dump(2) << '\n';
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string name = "arrivals_" + std::to_string(i) + ".csv";
      auto f = open_out(dir / name);
      tsc::write_csv(f, tsc::realize(list[i]));
      outputs.push_back(name);
    }
    write_manifest(dir, "sample-demand", argv, s, s.ppo.seed, outputs);
  }
  return 0;
}

int cmd_simulate(const Common& c, const ControllerFlags& cf, const std::vector<double>& band_v,
                 std::int64_t duration, const std::string& demand_file, bool transitions,
                 const std::vector<std::string>& argv) {
  const auto s = resolve(c);
  tsc::DemandEpisode ep;
  if (!demand_file.empty()) {
    std::ifstream in(demand_file);
    if (!in) throw tsc::ConfigError("cannot open demand file " + demand_file);
    auto j = json::parse(in);
    ep = tsc::episode_from_json(j.is_array() ? j.at(0) : j);
  } else {
    const tsc::Band band = band_from(band_v);
    ep = tsc::sample_eval_episode(band.lo, band.hi, duration, s.ppo.seed);
  }
  const auto dir = output_dir(c, "simulate");
  auto trace = open_out(dir / "trace.jsonl");
  std::optional<std::ofstream> tr;
  std::vector<std::string> outputs{"trace.jsonl", "metrics.json"};
  if (transitions) {
    tr = open_out(dir / "transitions.jsonl");
    outputs.push_back("transitions.jsonl");
  }
  const tsc::RewardConfig reward{s.ppo.eta, s.ppo.gamma, tsc::EquityForm::Power, s.ppo.adaptive_discounting};
  tsc::DecisionFn agent;
  std::optional<tsc::ActorCritic<float>> model;
  if (cf.kind == "random") {
    agent = tsc::random_agent(s.ppo.seed)();
  } else if (cf.kind == "policy") {
    model = load_checkpoint(cf.checkpoint);
    agent = tsc::greedy_policy_agent(*model)();
  } else {
    agent = tsc::controller_agent(make_controller(cf, tsc::measure_saturation_flow(s.sim)))();
  }
  const auto m = tsc::run_episode(agent, tsc::realize(ep), ep.duration, s.sim, reward, &trace, tr ? &*tr : nullptr);
  const json mj{{"generated", m.generated},     {"released", m.released},   {"mean_travel_s", m.mean_travel},
                {"std_travel_s", m.std_travel}, {"mean_wait_s", m.mean_wait}, {"throughput_pct", m.throughput_pct},
                {"episode", tsc::to_json(ep)}};
  std::ofstream(dir / "metrics.json") << mj.dump(2) << '\n';
  std::cout << mj.dump(2) << '\n';
  write_manifest(dir, "simulate", argv, s, s.ppo.seed, outputs, {{"controller", cf.kind}});
  return 0;
}

int cmd_evaluate(const Common& c, const ControllerFlags& cf, const std::vector<double>& band_v, int episodes,
                 bool plot_data, bool as_json, const std::vector<std::string>& argv) {
  const auto s = resolve(c);
  const auto seed = c.seed ? *c.seed : s.eval.seed;
  const int n = episodes > 0 ? episodes : s.eval.episodes;
  const double fs_measured = tsc::measure_saturation_flow(s.sim);
  std::optional<tsc::ActorCritic<float>> model;
  std::vector<tsc::EvalReport> reports;
  for (const auto& band : bands_from(band_v)) {
    if (cf.kind == "random") {
      reports.push_back(tsc::evaluate("random", tsc::random_agent(seed), band, n, s.eval.duration, seed, s.sim));
    } else if (cf.kind == "policy") {
      if (!model) model = load_checkpoint(cf.checkpoint);
      reports.push_back(tsc::evaluate("policy", tsc::greedy_policy_agent(*model), band, n, s.eval.duration, seed, s.sim));
    } else if (cf.tuned) {
      reports.push_back(tsc::evaluate_tuned(tsc::parse_controller_kind(cf.kind), band, n, s.eval.duration, seed, s.sim,
                                            fs_measured));
    } else {
      reports.push_back(tsc::evaluate(cf.kind, tsc::controller_agent(make_controller(cf, fs_measured)), band, n,
                                      s.eval.duration, seed, s.sim));
    }
  }
  std::ostringstream csv;
  csv << std::setprecision(10);
  tsc::write_report_header(csv, seed);
  for (const auto& r : reports) tsc::write_report_rows(csv, r);
  if (as_json) {
    json j = json::array();
    for (const auto& r : reports)
      j.push_back({{"controller", r.controller},
                   {"band", r.band.label()},
                   {"seed", r.seed},
                   {"mean_travel_s", r.aggregate.mean_travel},
                   {"std_travel_s", r.aggregate.std_travel},
                   {"mean_wait_s", r.aggregate.mean_wait},
                   {"throughput_pct", r.aggregate.throughput_pct}});
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << csv.str();
  }
  const auto dir = output_dir(c, "evaluate");
  std::vector<std::string> outputs{"report.csv"};
  open_out(dir / "report.csv") << csv.str();
  if (plot_data) {
    auto f = open_out(dir / "plot_data.csv");
    tsc::write_plot_data(f, reports);
    outputs.push_back("plot_data.csv");
  }
  write_manifest(dir, "evaluate", argv, s, seed, outputs, {{"controller", cf.kind}, {"episodes", n}});
  return 0;
}

int cmd_tune(const Common& c, const std::string& kind, const std::vector<double>& band_v, int episodes,
             const std::vector<std::string>& argv) {
  const auto s = resolve(c);
  const auto seed = c.seed ? *c.seed : s.eval.seed;
  const int n = episodes > 0 ? episodes : s.eval.episodes;
  const auto k = tsc::parse_controller_kind(kind);
  const auto grid = tsc::default_grid(k, tsc::measure_saturation_flow(s.sim));
  std::ostringstream csv;
  csv << std::setprecision(10) << "# seed=" << seed << "\n"
      << "controller,band,episode,episode_seed,best,mean_travel_s,throughput_pct,mean_wait_s\n";
  for (const auto& band : bands_from(band_v)) {
    const auto eps = tsc::band_episodes(band, n, s.eval.duration, seed);
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const auto r = tsc::tune_baseline(grid, tsc::realize(eps[i]), s.eval.duration, s.sim);
      csv << kind << ',' << band.label() << ',' << i << ',' << eps[i].seed << ',' << r.label << ','
          << r.metrics.mean_travel << ',' << r.metrics.throughput_pct << ',' << r.metrics.mean_wait << '\n';
    }
  }
  std::cout << csv.str();
  const auto dir = output_dir(c, "tune");
  open_out(dir / "tuning.csv") << csv.str();
  write_manifest(dir, "tune", argv, s, seed, {"tuning.csv"}, {{"controller", kind}});
  return 0;
}

int cmd_train(const Common& c, std::optional<std::int64_t> budget, std::optional<int> eval_every, bool quiet,
              const std::vector<std::string>& argv) {
  auto s = resolve(c);
  if (budget) s.budget = *budget;
  if (eval_every) s.eval_every = *eval_every;
  s.validate();
  const auto dir = output_dir(c, "train");
  auto log = open_out(dir / "train_log.csv");
  log << "step,mean_reward,mean_episode_return,episodes,entropy,value_loss,approx_kl,clip_fraction";
  for (const auto& b : tsc::evaluation_bands()) log << ",wait_" << b.label();
  log << '\n';
  tsc::PpoTrainer trainer(s.ppo, s.sim);
  tsc::AblationOptions opt;
  opt.eval_episodes = s.eval.episodes;
  opt.eval_duration = s.eval.duration;
  opt.eval_seed = s.eval.seed;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::int64_t i = 0; i < s.budget; ++i) {
    const auto r = trainer.learn_step();
    log << r.step << ',' << r.mean_reward << ',' << r.mean_episode_return << ',' << r.episodes_finished << ','
        << r.update.mean_entropy << ',' << r.update.mean_value_loss << ',' << r.update.mean_approx_kl << ','
        << r.update.mean_clip_fraction;
    if (r.step % s.eval_every == 0 || r.step == s.budget) {
      for (const auto& p : tsc::evaluate_model(trainer.model(), "train", s.ppo.seed, r.step, opt, s.sim))
        log << ',' << p.mean_wait;
      if (!quiet) {
        const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << "step " << r.step << "/" << s.budget << "  reward/decision " << r.mean_reward << "  entropy "
                  << r.update.mean_entropy << "  " << std::fixed << std::setprecision(0) << el << " s\n"
                  << std::defaultfloat << std::setprecision(6);
      }
    } else {
      for (std::size_t b = 0; b < tsc::evaluation_bands().size(); ++b) log << ',';
    }
    log << '\n';
    log.flush();
  }
  std::ofstream(dir / "checkpoint.json") << tsc::checkpoint_json(trainer.model(), trainer.steps()).dump() << '\n';
  write_manifest(dir, "train", argv, s, s.ppo.seed, {"train_log.csv", "checkpoint.json"},
                 {{"learner_steps", trainer.steps()}});
  std::cout << (dir / "checkpoint.json").string() << '\n';
  return 0;
}

int cmd_ablate(const Common& c, std::optional<std::int64_t> budget, std::optional<int> eval_every,
               const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& labels,
               const std::vector<std::string>& argv) {
  auto s = resolve(c);
  if (budget) s.budget = *budget;
  if (eval_every) s.eval_every = *eval_every;
  s.validate();
  std::vector<tsc::AblationConfig> configs;
  // CLI11 treats bracketed values as lists, so labels compare without brackets.
  auto bare = [](std::string s) {
    std::erase_if(s, [](char ch) { return ch == '[' || ch == ']'; });
    return s;
  };
  std::vector<std::string> wanted;
  for (const auto& l : labels) wanted.push_back(bare(l));
  for (const auto& cfg : tsc::standard_ablation_configs())
    if (wanted.empty() || std::find(wanted.begin(), wanted.end(), bare(cfg.label)) != wanted.end())
      configs.push_back(cfg);
  if (configs.empty()) throw tsc::ConfigError("--configs selected nothing");
  tsc::AblationOptions opt;
  opt.budget = s.budget;
  opt.eval_every = s.eval_every;
  opt.eval_episodes = s.eval.episodes;
  opt.eval_duration = s.eval.duration;
  opt.eval_seed = s.eval.seed;
  opt.on_point = [](const tsc::CurvePoint& p) {
    std::cerr << p.config << " seed " << p.seed << " step " << p.step << " " << p.band << " wait " << p.mean_wait
              << '\n';
  };
  const auto runs = tsc::ablation_suite(configs, s.ppo, seeds.empty() ? std::vector<std::uint64_t>{1, 2} : seeds,
                                        opt, s.sim);
  const auto dir = output_dir(c, "ablate");
  auto f = open_out(dir / "curves.csv");
  tsc::write_curves_csv(f, runs);
  write_manifest(dir, "ablate", argv, s, s.ppo.seed, {"curves.csv"});
  std::cout << (dir / "curves.csv").string() << '\n';
  return 0;
}

int cmd_eta_bound(const Common& c, std::vector<double> gammas, std::vector<double> taus, double t_free, double fs,
                  double t_yr, bool as_json, const std::vector<std::string>& argv) {
  if (gammas.empty()) gammas = {c.gamma ? *c.gamma : 0.98};
  if (taus.empty()) taus = {10.0};
  json rows = json::array();
  std::ostringstream table;
  table << std::fixed << std::setprecision(5);
  table << "gamma\ttau\tscenario1_upper\tscenario2_lower\tfeasible\n";
  for (double g : gammas)
    for (double tau : taus) {
      if (!(g > 0 && g < 1) || !(tau > 0)) throw tsc::ConfigError("eta-bound: need 0 < gamma < 1 and tau > 0");
      const tsc::eta::BoundInputs in{g, t_free, fs, t_yr};
      const double upper = tsc::eta::scenario1_upper(g, tau);
      json row{{"gamma", g}, {"tau", tau}, {"scenario1_upper", upper}};
      table << g << '\t' << tau << '\t' << upper << '\t';
      if (tau > t_free) {
        const auto b = tsc::eta::solve_eta_range(in, tau);
        row["scenario2_lower"] = b.lower_scenario2;
        row["feasible"] = b.feasible;
        table << b.lower_scenario2 << '\t' << (b.feasible ? "yes" : "no") << '\n';
      } else {
        row["scenario2_lower"] = nullptr;
        row["feasible"] = nullptr;
        table << "n/a\tn/a\n";
      }
      rows.push_back(row);
    }
  std::cout << (as_json ? rows.dump(2) + "\n" : table.str());
  if (!c.out_dir.empty()) {
    const auto dir = output_dir(c, "eta-bound");
    std::ofstream(dir / "eta_bounds.json") << rows.dump(2) << '\n';
    write_manifest(dir, "eta-bound", argv, tsc::preset_settings("desk"), 0, {"eta_bounds.json"});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Traffic-signal control workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  ControllerFlags cf;
  std::vector<double> band;
  int n = 1;
  int episodes = 0;
  std::int64_t duration = 600;
  bool training = false, plot_data = false, as_json = false, transitions = false, quiet = false;
  std::string demand_file, tune_kind = "uniform";
  std::optional<std::int64_t> budget;
  std::optional<int> eval_every;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> labels;
  std::vector<double> gammas, taus;
  double t_free = tsc::SimParams{}.free_flow_time(), fs = 0.5, t_yr = 5.0;

  auto* sd = app.add_subcommand("sample-demand", "Sample demand episodes as JSON");
  add_common(sd, common);
  sd->add_option("--band", band, "Flow range LO HI (v/h)")->expected(2)->required();
  sd->add_option("--n", n, "Number of episodes")->check(CLI::PositiveNumber);
  sd->add_option("--duration", duration, "Episode duration (s)")->check(CLI::PositiveNumber);
  sd->add_flag("--training", training, "Training sampler (F_end within 1500 v/h of F_begin)");

  auto* sim = app.add_subcommand("simulate", "Replay one episode and dump a JSONL trace");
  add_common(sim, common);
  add_controller(sim, cf, true);
  sim->add_option("--band", band, "Flow range LO HI (v/h)")->expected(2);
  sim->add_option("--duration", duration, "Episode duration (s)")->check(CLI::PositiveNumber);
  sim->add_option("--demand", demand_file, "Episode JSON from sample-demand")->check(CLI::ExistingFile);
  sim->add_flag("--transitions", transitions, "Also dump RL transitions");

  auto* ev = app.add_subcommand("evaluate", "Evaluate a controller or policy over flow bands");
  add_common(ev, common);
  add_controller(ev, cf, true);
  ev->add_option("--band", band, "Single flow range LO HI (default: all five bands)")->expected(2);
  ev->add_option("--episodes", episodes, "Episodes per band")->check(CLI::PositiveNumber);
  ev->add_flag("--plot-data", plot_data, "Write mean/std travel table per band");
  ev->add_flag("--json", as_json, "Print aggregates as JSON");

  auto* tu = app.add_subcommand("tune", "Per-episode grid search of a baseline");
  add_common(tu, common);
  tu->add_option("--controller", tune_kind, "uniform, webster or max-pressure");
  tu->add_option("--band", band, "Single flow range LO HI (default: all five bands)")->expected(2);
  tu->add_option("--episodes", episodes, "Episodes per band")->check(CLI::PositiveNumber);

  auto* tr = app.add_subcommand("train", "Train a PPO policy");
  add_common(tr, common);
  tr->add_option("--budget", budget, "Learner steps");
  tr->add_option("--eval-every", eval_every, "Evaluate every N learner steps");
  tr->add_flag("--quiet", quiet, "No progress lines");

  auto* ab = app.add_subcommand("ablate", "Train ablation configurations and write waiting-time curves");
  add_common(ab, common);
  ab->add_option("--budget", budget, "Learner steps per run");
  ab->add_option("--eval-every", eval_every, "Evaluate every N learner steps");
  ab->add_option("--seeds", seeds, "Training seeds (default 1 2)");
  ab->add_option("--configs", labels, "Subset of configuration labels, e.g. ad+eta=0 or x+eta=0.25");

  auto* eb = app.add_subcommand("eta-bound", "Admissible equity-exponent range");
  add_common(eb, common);
  eb->add_option("--gammas", gammas, "Grid of discount factors");
  eb->add_option("--tau", taus, "Travel-time thresholds (s)");
  eb->add_option("--t-free", t_free, "Free-flow travel time (s)");
  eb->add_option("--fs", fs, "Saturation flow (veh/s)");
  eb->add_option("--t-yr", t_yr, "Transition time (s)");
  eb->add_flag("--json", as_json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*sd) return cmd_sample_demand(common, band, n, duration, training, args);
    if (*sim) {
      if (band.empty() && demand_file.empty()) band = {2500, 3500};
      return cmd_simulate(common, cf, band, duration, demand_file, transitions, args);
    }
    if (*ev) return cmd_evaluate(common, cf, band, episodes, plot_data, as_json, args);
    if (*tu) return cmd_tune(common, tune_kind, band, episodes, args);
    if (*tr) return cmd_train(common, budget, eval_every, quiet, args);
    if (*ab) return cmd_ablate(common, budget, eval_every, seeds, labels, args);
    if (*eb) return cmd_eta_bound(common, gammas, taus, t_free, fs, t_yr, as_json, args);
  } catch (const tsc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
