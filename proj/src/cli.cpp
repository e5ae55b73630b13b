#include "flowplan/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowplan/errors.hpp"
#include "flowplan/harness.hpp"
#include "flowplan/plan.hpp"
#include "flowplan/serialize.hpp"

namespace flowplan {

namespace fs = std::filesystem;

namespace {

// Converts a raw config-file string to the JSON type the schema expects at
// this key, using the default config's serialization as the template.
nlohmann::json typed_scalar(const nlohmann::json& tmpl, const std::string& key,
                            const std::string& raw) {
  if (tmpl.is_boolean()) {
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    throw ValidationError("config key '" + key + "' expects a boolean");
  }
  if (tmpl.is_number_unsigned()) {
    try {
      return nlohmann::json(std::stoull(raw));
    } catch (...) {
      throw ValidationError("config key '" + key + "' expects an integer");
    }
  }
  if (tmpl.is_number_integer()) {
    try {
      return nlohmann::json(std::stoll(raw));
    } catch (...) {
      throw ValidationError("config key '" + key + "' expects an integer");
    }
  }
  if (tmpl.is_number_float()) {
    try {
      return nlohmann::json(std::stod(raw));
    } catch (...) {
      throw ValidationError("config key '" + key + "' expects a number");
    }
  }
  return nlohmann::json(raw);
}

// flat TOML (one optional [cbf] table) to the JSON config schema
nlohmann::json toml_overrides(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  CLI::ConfigTOML reader;
  std::vector<CLI::ConfigItem> items;
  try {
    items = reader.from_config(in);
  } catch (const std::exception& e) {
    throw MalformedFileError("not valid TOML: " + path + " (" + e.what() + ")");
  }

  const nlohmann::json tmpl = RunConfig{};
  nlohmann::json out = nlohmann::json::object();
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // table markers
    if (item.inputs.size() != 1)
      throw MalformedFileError("config key '" + item.fullname() +
                               "' must have exactly one value");
    if (item.parents.empty()) {
      if (!tmpl.contains(item.name))
        throw ValidationError("unknown config key: " + item.name);
      out[item.name] = typed_scalar(tmpl.at(item.name), item.name,
                                    item.inputs[0]);
    } else if (item.parents.size() == 1 && item.parents[0] == "cbf") {
      if (!tmpl.at("cbf").contains(item.name))
        throw ValidationError("unknown cbf key: " + item.name);
      out["cbf"][item.name] = typed_scalar(tmpl.at("cbf").at(item.name),
                                           item.name, item.inputs[0]);
    } else {
      throw ValidationError("unknown config table: " + item.fullname());
    }
  }
  return out;
}

nlohmann::json config_file_overrides(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
    const nlohmann::json j = parse_json(read_file(path), path);
    if (j.is_object() && j.contains("schema_version")) require_schema(j, path);
    return j;
  }
  return toml_overrides(path);
}

// Shared config-building state for plan and sweep: defaults, then the
// config file, then any flag the user actually passed.
struct ConfigFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  int t_pred = 1;
  int t_corr = 256;
  double alpha = 2.0;
  std::string field = "gmm";
  std::string env_name = "corridor";
  bool no_safety = false;
  double epsilon = 10.0;
  double rho = 0.5;
  double delta = 0.01;
  double t_w = 0.5;
  double w0 = 1.0;
  double zeta = 0.0;

  void add_common(CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "config file (.json or TOML) applied before flags");
    sub->add_option("--seed", seed, "run seed");
    sub->add_option("--alpha", alpha, "correction damping scale, >= 1");
    sub->add_option("--t-pred", t_pred, "prediction steps");
    sub->add_option("--t-corr", t_corr, "correction steps");
    sub->add_option("--field", field, "gmm or mlp:<checkpoint>");
    sub->add_option("--env", env_name, "environment name");
    sub->add_option("--epsilon", epsilon, "barrier gain");
    sub->add_option("--rho", rho, "barrier power in (0,1)");
    sub->add_option("--delta", delta, "robust margin");
    sub->add_option("--t-w", t_w, "relaxation cutoff in [0,1)");
    sub->add_option("--w0", w0, "initial relaxation weight");
    sub->add_option("--zeta", zeta, "trap threshold (0 = environment default)");
  }

  RunConfig build(const CLI::App* sub) const {
    RunConfig cfg;
    bool horizon_pinned = false;
    if (!config_path.empty()) {
      const nlohmann::json overrides = config_file_overrides(config_path);
      cfg = merge_config(cfg, overrides);
      horizon_pinned = overrides.contains("horizon");
    }
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--alpha")) cfg.alpha = alpha;
    if (sub->count("--t-pred")) cfg.t_pred = t_pred;
    if (sub->count("--t-corr")) cfg.t_corr = t_corr;
    if (sub->count("--field")) cfg.field = field;
    if (sub->count("--env")) cfg.environment = env_name;
    // only the plan subcommand defines --no-safety
    const CLI::Option* ns = sub->get_option_no_throw("--no-safety");
    if (ns != nullptr && ns->count() > 0) cfg.safety = !no_safety;
    if (sub->count("--epsilon")) cfg.cbf.epsilon = epsilon;
    if (sub->count("--rho")) cfg.cbf.rho = rho;
    if (sub->count("--delta")) cfg.cbf.delta = delta;
    if (sub->count("--t-w")) cfg.cbf.t_w = t_w;
    if (sub->count("--w0")) cfg.cbf.w0 = w0;
    if (sub->count("--zeta")) cfg.cbf.zeta = zeta;
    if (!horizon_pinned) {
      const Environment env = resolve_environment(cfg.environment);
      cfg.horizon = env.waypoints - 1;
    }
    return cfg;
  }
};

void refuse_existing(const std::string& path, bool force) {
  if (!force && fs::exists(path))
    throw ValidationError("output exists, pass --force: " + path);
}

std::string parent_of(const std::string& path) {
  return fs::path(path).parent_path().string();
}

int cmd_generate(const std::string& env_name, int count, std::uint64_t seed,
                 double jitter, std::string out, bool force) {
  const Environment env = resolve_environment(env_name);
  if (out.empty()) out = "datasets/" + env.name + ".json";
  refuse_existing(out, force);
  const PathDataset dataset = generate_dataset(env, count, seed, jitter);
  const std::string parent = parent_of(out);
  if (!parent.empty()) make_dirs(parent);
  save_dataset(dataset, out);
  std::cout << "wrote " << out << " (" << dataset.paths.size() << " paths)\n";
  return 0;
}

int cmd_train(const std::string& dataset_path, const std::vector<int>& hidden,
              int steps, double lr, int batch, int components,
              std::uint64_t seed, std::string out, bool force) {
  if (steps < 0) throw ValidationError("steps must be >= 0");
  if (batch < 1) throw ValidationError("batch must be >= 1");
  const PathDataset dataset = load_dataset(dataset_path);
  const GmmTarget target = fit_gmm_target(dataset, components);
  const int d = dataset.paths[0].dim();
  const int wp = dataset.waypoints();

  if (out.empty()) out = "models/checkpoint.json";
  refuse_existing(out, force);

  Rng rng(seed, 0x73a1);
  MlpField model = MlpField::create(d, wp, hidden, rng);
  CfmTrainer trainer(std::move(model), target, lr, rng.derive(1));

  // fixed probe set: states along straight interpolants at assorted times
  const GmmMarginalField exact(target);
  ProbeSet probes;
  Rng probe_rng(seed, 0xd157);
  for (int i = 0; i < 64; ++i) {
    const double t = 0.99 * probe_rng.uniform();
    const Path tau1 = target.sample(probe_rng);
    const Path tau0 = sample_prior(d, wp - 1, probe_rng);
    probes.emplace_back(
        Path(((1.0 - t) * tau0.data() + t * tau1.data()).eval()), t);
  }
  const double initial_distance = field_distance(trainer.model(), exact, probes);

  double ema = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double loss = trainer.train_step(batch);
    ema = s == 0 ? loss : 0.99 * ema + 0.01 * loss;
    if (s % 100 == 0 || s == steps - 1)
      std::cout << "step " << s << " loss " << format_double(loss) << " ema "
                << format_double(ema) << "\n";
  }
  const double trained_distance = field_distance(trainer.model(), exact, probes);
  std::cout << "field_distance " << format_double(trained_distance)
            << " (initial " << format_double(initial_distance) << ")\n";

  MlpCheckpoint ckpt;
  ckpt.model = trainer.model();
  ckpt.rng_key = trainer.rng().key();
  ckpt.rng_counter = trainer.rng().counter();
  const std::string parent = parent_of(out);
  if (!parent.empty()) make_dirs(parent);
  save_checkpoint(ckpt, out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_plan(const RunConfig& cfg, const std::string& out_root, bool force,
             bool timing) {
  const Environment env = resolve_environment(cfg.environment);
  const std::unique_ptr<VectorField> field = build_field(cfg, env);
  const PlanResult result = plan(cfg, env, *field);

  const std::string dir = out_root + "/" + run_id(result.effective);
  refuse_existing(dir, force);
  make_dirs(dir);
  save_config(result.effective, dir + "/config.json");
  write_file_atomic(dir + "/trace.csv", trace_to_csv(result.trace));
  save_report(result.report, dir + "/report.json");
  write_file_atomic(dir + "/record.csv", records_to_csv({result.record}));
  if (timing)
    write_file_atomic(dir + "/timing.csv", timing_to_csv({result.record}));

  std::cout << "config " << nlohmann::json(result.effective).dump() << "\n";
  std::cout << "run " << dir << "\n";
  std::cout << "pass " << (result.report.pass ? 1 : 0) << "\n";
  for (std::size_t j = 0; j < result.record.min_barrier.size(); ++j)
    std::cout << "min_b" << j + 1 << " "
              << format_double(result.record.min_barrier[j]) << "\n";
  std::cout << "score " << format_double(result.record.score) << "\n";
  std::cout << "trap " << (result.record.trap ? 1 : 0) << "\n";

  if (cfg.safety && !result.report.pass) {
    std::cerr << "certificate violation: see " << dir << "/report.json\n";
    return 2;
  }
  return 0;
}

int cmd_sweep(const ExperimentPlan& plan, int jobs, const std::string& out_dir,
              bool force, bool timing) {
  refuse_existing(out_dir + "/sweep.csv", force);
  const SweepResult result = run_sweep(plan, jobs);
  const int barriers =
      result.cells.empty()
          ? 0
          : static_cast<int>(result.cells[0].record.min_barrier.size());
  make_dirs(out_dir);
  const std::string aggregate = aggregate_to_csv(result.rows, barriers, false);
  write_file_atomic(out_dir + "/sweep.csv", aggregate);
  write_file_atomic(out_dir + "/cells.csv",
                    cells_to_csv(result.cells, barriers));
  if (timing) {
    std::string t = "method,t_pred,alpha,seed,time_per_step_ms\n";
    for (const SweepCell& cell : result.cells) {
      t += method_name(cell.method);
      t += ',' + std::to_string(cell.t_pred);
      t += ',' + format_double(cell.alpha);
      t += ',' + std::to_string(cell.seed);
      t += ',' + format_double(cell.record.time_per_step_ms);
      t += '\n';
    }
    write_file_atomic(out_dir + "/timing.csv", t);
  }
  std::cout << aggregate;
  std::cout << "wrote " << out_dir << "/sweep.csv and cells.csv\n";
  return 0;
}

int cmd_verify(const std::string& run_dir) {
  const CorrectionTrace trace = trace_from_csv(read_file(run_dir + "/trace.csv"));
  const RunConfig cfg = load_config(run_dir + "/config.json");
  const Environment env = resolve_environment(cfg.environment);
  CbfParams params = cfg.cbf;
  if (params.zeta == 0.0) params.zeta = env.zeta;
  const CertificateReport report =
      verify_invariance(trace, params, env.barriers);
  std::cout << report_to_json(report).dump(2) << "\n";
  if (!report.pass) {
    std::cerr << "certificate violation in " << run_dir << "\n";
    return 2;
  }
  return 0;
}

int cmd_report(const std::string& dir) {
  const std::string report_path = dir + "/report.json";
  const std::string sweep_path = dir + "/sweep.csv";
  if (fs::exists(report_path)) {
    const CertificateReport report = load_report(report_path);
    std::cout << "pass " << (report.pass ? 1 : 0) << "\n";
    std::cout << "rows " << report.rows.size() << "\n";
    std::cout << "violations " << report.violations.size() << "\n";
    std::cout << "trap " << (report.trap.trapped ? 1 : 0) << "\n";
    std::cout << "max_reach_time " << format_double(report.max_reach_time)
              << "\n";
    const std::string record_path = dir + "/record.csv";
    if (fs::exists(record_path)) std::cout << read_file(record_path);
    return 0;
  }
  if (fs::exists(sweep_path)) {
    std::cout << read_file(sweep_path);
    return 0;
  }
  throw IoError("no report.json or sweep.csv under: " + dir);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"flow-matching path planner with a finite-time safety filter"};
  app.require_subcommand(1);

  // generate
  CLI::App* generate = app.add_subcommand(
      "generate", "draw a synthetic path dataset from an environment");
  std::string gen_env = "corridor";
  int gen_count = 1000;
  std::uint64_t gen_seed = 0;
  double gen_jitter = 0.25;
  std::string gen_out;
  bool gen_force = false;
  generate->add_option("env", gen_env, "environment name")->required();
  generate->add_option("count", gen_count, "number of paths")->required();
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->add_option("--jitter", gen_jitter,
                       "waypoint noise std as a fraction of spacing");
  generate->add_option("--out", gen_out, "output path (datasets/<env>.json)");
  generate->add_flag("--force", gen_force, "overwrite existing output");

  // train
  CLI::App* train = app.add_subcommand(
      "train", "fit a velocity-field model to a dataset surrogate");
  std::string train_dataset;
  std::vector<int> train_hidden{64, 64};
  int train_steps = 2000;
  double train_lr = 1e-3;
  int train_batch = 64;
  int train_components = 4;
  std::uint64_t train_seed = 0;
  std::string train_out;
  bool train_force = false;
  train->add_option("dataset", train_dataset, "dataset JSON path")->required();
  train->add_option("--widths", train_hidden, "hidden layer widths")
      ->delimiter(',');
  train->add_option("--steps", train_steps, "training steps");
  train->add_option("--lr", train_lr, "learning rate");
  train->add_option("--batch", train_batch, "batch size");
  train->add_option("--components", train_components, "mixture components");
  train->add_option("--seed", train_seed, "training seed");
  train->add_option("--out", train_out, "checkpoint path");
  train->add_flag("--force", train_force, "overwrite existing output");

  // plan
  CLI::App* plan_cmd = app.add_subcommand(
      "plan", "run the two-phase planner and write run artifacts");
  ConfigFlags plan_flags;
  plan_flags.add_common(plan_cmd);
  std::string plan_out = "runs";
  bool plan_force = false;
  bool plan_timing = false;
  plan_cmd->add_flag("--no-safety", plan_flags.no_safety,
                     "disable the filter (diagnostics only)");
  plan_cmd->add_option("--out", plan_out, "runs directory");
  plan_cmd->add_flag("--force", plan_force, "overwrite an existing run");
  plan_cmd->add_flag("--timing", plan_timing, "also write measured timing.csv");

  // sweep
  CLI::App* sweep = app.add_subcommand(
      "sweep", "run a method/parameter/seed cross product and aggregate");
  ConfigFlags sweep_flags;
  sweep_flags.add_common(sweep);
  std::vector<std::string> sweep_methods{"safeflowmatcher"};
  std::vector<int> sweep_t_pred;
  std::vector<double> sweep_alpha;
  std::vector<std::uint64_t> sweep_seeds;
  int sweep_seed_count = 10;
  int sweep_jobs = 1;
  std::string sweep_out = "sweeps";
  bool sweep_force = false;
  bool sweep_timing = false;
  sweep->add_option("--methods", sweep_methods, "methods to compare")
      ->delimiter(',');
  sweep->add_option("--t-pred-list", sweep_t_pred, "prediction step counts")
      ->delimiter(',');
  sweep->add_option("--alpha-list", sweep_alpha, "damping scales")
      ->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "explicit seed list")
      ->delimiter(',');
  sweep->add_option("--seed-count", sweep_seed_count,
                    "number of consecutive seeds when --seeds is absent");
  sweep->add_option("--jobs", sweep_jobs, "worker threads");
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_flag("--force", sweep_force, "overwrite existing output");
  sweep->add_flag("--timing", sweep_timing, "also write measured timing.csv");

  // verify
  CLI::App* verify = app.add_subcommand(
      "verify", "re-check the certificates of a stored run");
  std::string verify_dir;
  verify->add_option("run_dir", verify_dir, "run directory")->required();

  // report
  CLI::App* report = app.add_subcommand(
      "report", "print a stored run or sweep summary");
  std::string report_dir;
  report->add_option("dir", report_dir, "run or sweep directory")->required();

  try {
    app.parse(argc, argv);

    if (generate->parsed())
      return cmd_generate(gen_env, gen_count, gen_seed, gen_jitter, gen_out,
                          gen_force);
    if (train->parsed())
      return cmd_train(train_dataset, train_hidden, train_steps, train_lr,
                       train_batch, train_components, train_seed, train_out,
                       train_force);
    if (plan_cmd->parsed()) {
      RunConfig cfg = plan_flags.build(plan_cmd);
      cfg.validate();
      return cmd_plan(cfg, plan_out, plan_force, plan_timing);
    }
    if (sweep->parsed()) {
      ExperimentPlan exp;
      exp.base = sweep_flags.build(sweep);
      exp.methods.clear();
      for (const std::string& m : sweep_methods)
        exp.methods.push_back(method_from_name(m));
      if (!sweep_t_pred.empty()) exp.t_pred_list = sweep_t_pred;
      else exp.t_pred_list = {exp.base.t_pred};
      if (!sweep_alpha.empty()) exp.alpha_list = sweep_alpha;
      else exp.alpha_list = {exp.base.alpha};
      if (!sweep_seeds.empty()) {
        exp.seeds = sweep_seeds;
      } else {
        if (sweep_seed_count < 1)
          throw ValidationError("seed count must be >= 1");
        for (int i = 0; i < sweep_seed_count; ++i)
          exp.seeds.push_back(exp.base.seed + static_cast<std::uint64_t>(i));
      }
      return cmd_sweep(exp, sweep_jobs, sweep_out, sweep_force, sweep_timing);
    }
    if (verify->parsed()) return cmd_verify(verify_dir);
    if (report->parsed()) return cmd_report(report_dir);
    throw ValidationError("no command given");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const CertificateError& e) {
    std::cerr << "certificate error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace flowplan
