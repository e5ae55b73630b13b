#include "flowplan/plan.hpp"

#include <chrono>
#include <filesystem>

#include "flowplan/errors.hpp"
#include "flowplan/metrics.hpp"
#include "flowplan/serialize.hpp"

namespace flowplan {

namespace {
// pinned so the surrogate is part of the environment definition, not a knob
constexpr std::uint64_t kSurrogateSeed = 0x5afe;
constexpr int kSurrogatePaths = 1000;
}  // namespace

Environment resolve_environment(const std::string& name) {
  if (name == "corridor") return corridor_environment();
  const std::string direct = name;
  const std::string indirect = "environments/" + name + ".json";
  if (std::filesystem::exists(direct) && name.size() > 5 &&
      name.substr(name.size() - 5) == ".json")
    return load_environment(direct);
  if (std::filesystem::exists(indirect)) return load_environment(indirect);
  throw ValidationError("unknown environment: " + name);
}

GmmTarget surrogate_target(const Environment& env) {
  return fit_gmm_target(generate_dataset(env, kSurrogatePaths, kSurrogateSeed));
}

std::unique_ptr<VectorField> build_field(const RunConfig& cfg,
                                         const Environment& env) {
  std::unique_ptr<VectorField> field;
  if (cfg.field == "gmm") {
    field = std::make_unique<GmmMarginalField>(surrogate_target(env));
  } else if (cfg.field.rfind("mlp:", 0) == 0) {
    const std::string path = cfg.field.substr(4);
    if (path.empty()) throw ValidationError("mlp field needs a path");
    MlpCheckpoint ckpt = load_checkpoint(path);
    field = std::make_unique<MlpField>(std::move(ckpt.model));
  } else {
    throw ValidationError("unknown field: " + cfg.field);
  }
  if (field->dim() != cfg.dim || field->waypoints() != cfg.horizon + 1)
    throw ValidationError("field shape does not match the config");
  return field;
}

PlanResult plan(const RunConfig& cfg, const Environment& env,
                const VectorField& field) {
  cfg.validate();
  if (cfg.dim != 2 || cfg.horizon + 1 != env.waypoints)
    throw ValidationError("config shape does not match the environment");
  if (field.dim() != cfg.dim || field.waypoints() != cfg.horizon + 1)
    throw ValidationError("field shape does not match the config");

  PlanResult result;
  result.effective = cfg;
  if (result.effective.cbf.zeta == 0.0) result.effective.cbf.zeta = env.zeta;
  const CbfParams& params = result.effective.cbf;
  params.validate(true);
  env.validate(params.delta);

  const auto started = std::chrono::steady_clock::now();

  Rng rng(cfg.seed);
  result.prediction = predict(field, cfg.t_pred, rng);

  SafetyFilter filter{env.barriers, params};
  result.trace = run_correction(field, cfg.alpha, cfg.t_corr,
                                result.prediction.path,
                                cfg.safety ? &filter : nullptr, &env.barriers);

  const auto finished = std::chrono::steady_clock::now();

  result.report = verify_invariance(result.trace, params, env.barriers);

  const Path& final_path = result.trace.final_path();
  RunRecord& rec = result.record;
  rec.seed = cfg.seed;
  rec.config_hash = config_hash(cfg);
  for (const BarrierSpec& spec : env.barriers)
    rec.min_barrier.push_back(barrier_safety({final_path}, spec));
  Environment scored = env;  // score with the zeta the run actually used
  scored.zeta = params.zeta;
  rec.score = score_proxy(final_path, scored);
  rec.trap = result.report.trap.trapped;
  rec.curvature = curvature(final_path);
  rec.acceleration = acceleration(final_path);
  rec.convergence_time = result.report.max_reach_time;
  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(finished - started).count();
  rec.time_per_step_ms =
      time_per_step(std::max(elapsed_ms, 1e-6), cfg.t_pred, cfg.t_corr);
  return result;
}

}  // namespace flowplan
