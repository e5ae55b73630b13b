#include "flowplan/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "flowplan/errors.hpp"
#include "flowplan/serialize.hpp"

namespace flowplan {

std::string method_name(Method method) {
  switch (method) {
    case Method::fm_unsafe: return "fm_unsafe";
    case Method::safe_fm_naive: return "safe_fm_naive";
    case Method::safeflowmatcher: return "safeflowmatcher";
  }
  throw ValidationError("unreachable method value");
}

Method method_from_name(const std::string& name) {
  if (name == "fm_unsafe") return Method::fm_unsafe;
  if (name == "safe_fm_naive") return Method::safe_fm_naive;
  if (name == "safeflowmatcher") return Method::safeflowmatcher;
  throw ValidationError("unknown method: " + name);
}

namespace {

MethodRun run_single_flow(Method method, const RunConfig& cfg,
                          const Environment& env, const VectorField& field,
                          const CbfParams& params) {
  MethodRun run;
  run.method = method;

  const auto started = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  const Path prior = sample_prior(cfg.dim, cfg.horizon, rng);
  const TimeGrid grid = TimeGrid::uniform(cfg.t_pred + cfg.t_corr);
  SafetyFilter filter{env.barriers, params};
  const bool filtered = method == Method::safe_fm_naive;
  run.trace = run_filtered_flow(field, grid, prior,
                                filtered ? &filter : nullptr, &env.barriers);
  const auto finished = std::chrono::steady_clock::now();

  run.report = verify_invariance(run.trace, params, env.barriers);

  const Path& final_path = run.trace.final_path();
  RunRecord& rec = run.record;
  rec.seed = cfg.seed;
  rec.config_hash = config_hash(cfg);
  for (const BarrierSpec& spec : env.barriers)
    rec.min_barrier.push_back(barrier_safety({final_path}, spec));
  Environment scored = env;
  scored.zeta = params.zeta;
  rec.score = score_proxy(final_path, scored);
  rec.trap = run.report.trap.trapped;
  rec.curvature = curvature(final_path);
  rec.acceleration = acceleration(final_path);
  rec.convergence_time = run.report.max_reach_time;
  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(finished - started).count();
  rec.time_per_step_ms =
      time_per_step(std::max(elapsed_ms, 1e-6), cfg.t_pred, cfg.t_corr);
  return run;
}

}  // namespace

MethodRun run_method(Method method, const RunConfig& cfg,
                     const Environment& env, const VectorField& field) {
  cfg.validate();
  CbfParams params = cfg.cbf;
  if (params.zeta == 0.0) params.zeta = env.zeta;
  params.validate(true);

  if (method == Method::safeflowmatcher) {
    PlanResult result = plan(cfg, env, field);
    MethodRun run;
    run.method = method;
    run.trace = std::move(result.trace);
    run.report = std::move(result.report);
    run.record = std::move(result.record);
    return run;
  }
  return run_single_flow(method, cfg, env, field, params);
}

void ExperimentPlan::validate() const {
  base.validate();
  if (methods.empty()) throw ValidationError("sweep needs >= 1 method");
  if (t_pred_list.empty()) throw ValidationError("sweep needs >= 1 t_pred");
  if (alpha_list.empty()) throw ValidationError("sweep needs >= 1 alpha");
  if (seeds.empty()) throw ValidationError("sweep needs a non-empty seed list");
  for (int tp : t_pred_list)
    if (tp < 1) throw ValidationError("t_pred entries must be >= 1");
  for (double a : alpha_list)
    if (!(a >= 1.0)) throw ValidationError("alpha entries must be >= 1");
}

SweepResult run_sweep(const ExperimentPlan& plan, int jobs) {
  plan.validate();
  if (jobs < 1) throw ValidationError("jobs must be >= 1");

  const Environment env = resolve_environment(plan.base.environment);
  const std::unique_ptr<VectorField> field = build_field(plan.base, env);

  SweepResult result;
  for (Method m : plan.methods)
    for (int tp : plan.t_pred_list)
      for (double a : plan.alpha_list)
        for (std::uint64_t seed : plan.seeds) {
          SweepCell cell;
          cell.method = m;
          cell.t_pred = tp;
          cell.alpha = a;
          cell.seed = seed;
          result.cells.push_back(cell);
        }

  // keep the total step budget fixed while t_pred varies
  const int total_steps = plan.base.t_pred + plan.base.t_corr;

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= result.cells.size() || failed.load()) return;
      SweepCell& cell = result.cells[i];
      try {
        RunConfig cfg = plan.base;
        cfg.seed = cell.seed;
        cfg.t_pred = cell.t_pred;
        cfg.t_corr = total_steps - cell.t_pred;
        if (cfg.t_corr < 1)
          throw ValidationError("t_pred exhausts the step budget");
        cfg.alpha = cell.alpha;
        cell.record = run_method(cell.method, cfg, env, *field).record;
      } catch (const std::exception& e) {
        if (!failed.exchange(true)) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          failure = e.what();
        }
        return;
      }
    }
  };

  const std::size_t n_workers =
      std::min(static_cast<std::size_t>(jobs), result.cells.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  if (failed.load()) throw ValidationError("sweep cell failed: " + failure);

  // fixed-order reduce over the same cross product
  for (Method m : plan.methods)
    for (int tp : plan.t_pred_list)
      for (double a : plan.alpha_list) {
        AggregateRow row;
        row.method = m;
        row.t_pred = tp;
        row.alpha = a;
        std::vector<double> scores;
        for (const SweepCell& cell : result.cells) {
          if (cell.method != m || cell.t_pred != tp || cell.alpha != a)
            continue;
          const RunRecord& rec = cell.record;
          ++row.runs;
          if (row.min_barrier.empty())
            row.min_barrier = rec.min_barrier;
          else
            for (std::size_t j = 0; j < row.min_barrier.size(); ++j)
              row.min_barrier[j] = std::min(row.min_barrier[j],
                                            rec.min_barrier[j]);
          scores.push_back(rec.score);
          row.trap_rate += rec.trap ? 1.0 : 0.0;
          row.curvature_mean += rec.curvature;
          row.acceleration_mean += rec.acceleration;
          row.time_ms_mean += rec.time_per_step_ms;
        }
        row.score_mean = 0.0;
        for (double s : scores) row.score_mean += s;
        row.score_mean /= row.runs;
        double var = 0.0;
        for (double s : scores)
          var += (s - row.score_mean) * (s - row.score_mean);
        row.score_std = std::sqrt(var / row.runs);
        row.trap_rate /= row.runs;
        row.curvature_mean /= row.runs;
        row.acceleration_mean /= row.runs;
        row.time_ms_mean /= row.runs;
        result.rows.push_back(std::move(row));
      }
  return result;
}

std::string cells_to_csv(const std::vector<SweepCell>& cells, int barriers) {
  std::string out = "method,t_pred,alpha,seed,config_hash";
  for (int j = 1; j <= barriers; ++j) out += ",min_b" + std::to_string(j);
  out += ",score,trap,curvature,acceleration,convergence_time\n";
  for (const SweepCell& cell : cells) {
    const RunRecord& r = cell.record;
    if (static_cast<int>(r.min_barrier.size()) != barriers)
      throw ValidationError("cell barrier count mismatch");
    out += method_name(cell.method);
    out += ',' + std::to_string(cell.t_pred);
    out += ',' + format_double(cell.alpha);
    out += ',' + std::to_string(cell.seed);
    out += ',' + r.config_hash;
    for (double b : r.min_barrier) out += ',' + format_double(b);
    out += ',' + format_double(r.score);
    out += r.trap ? ",1" : ",0";
    out += ',' + format_double(r.curvature);
    out += ',' + format_double(r.acceleration);
    out += ',' + format_double(r.convergence_time);
    out += '\n';
  }
  return out;
}

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows,
                             int barriers, bool with_timing) {
  std::string out = "method,t_pred,alpha,runs";
  for (int j = 1; j <= barriers; ++j) out += ",bs" + std::to_string(j);
  out += ",score_mean,score_std,time_ms,trap_rate,curvature,acceleration\n";
  for (const AggregateRow& row : rows) {
    if (static_cast<int>(row.min_barrier.size()) != barriers)
      throw ValidationError("aggregate barrier count mismatch");
    out += method_name(row.method);
    out += ',' + std::to_string(row.t_pred);
    out += ',' + format_double(row.alpha);
    out += ',' + std::to_string(row.runs);
    for (double b : row.min_barrier) out += ',' + format_double(b);
    out += ',' + format_double(row.score_mean);
    out += ',' + format_double(row.score_std);
    out += ',';
    if (with_timing) out += format_double(row.time_ms_mean);
    out += ',' + format_double(row.trap_rate);
    out += ',' + format_double(row.curvature_mean);
    out += ',' + format_double(row.acceleration_mean);
    out += '\n';
  }
  return out;
}

}  // namespace flowplan
