#ifndef FLOWPLAN_HARNESS_HPP
#define FLOWPLAN_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "flowplan/plan.hpp"

namespace flowplan {

// fm_unsafe:       raw field, no filter, one flow from noise to target
// safe_fm_naive:   raw field with the filter active from t = 0 on that flow
// safeflowmatcher: unconstrained prediction, then damped filtered correction
// All three spend t_pred + t_corr Euler steps and share the prior draw at
// equal seeds, so comparisons are paired.
enum class Method { fm_unsafe, safe_fm_naive, safeflowmatcher };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

struct MethodRun {
  Method method = Method::safeflowmatcher;
  CorrectionTrace trace;
  CertificateReport report;
  RunRecord record;
};

MethodRun run_method(Method method, const RunConfig& cfg,
                     const Environment& env, const VectorField& field);

// Cross product of methods, prediction budgets, damping scales and seeds.
struct ExperimentPlan {
  std::vector<Method> methods{Method::safeflowmatcher};
  std::vector<int> t_pred_list{1};
  std::vector<double> alpha_list{2.0};
  std::vector<std::uint64_t> seeds;
  RunConfig base;

  void validate() const;
};

struct SweepCell {
  Method method = Method::safeflowmatcher;
  int t_pred = 1;
  double alpha = 2.0;
  std::uint64_t seed = 0;
  RunRecord record;
};

// one row per (method, t_pred, alpha), aggregated over seeds
struct AggregateRow {
  Method method = Method::safeflowmatcher;
  int t_pred = 1;
  double alpha = 2.0;
  int runs = 0;
  std::vector<double> min_barrier;  // min over runs, per constraint
  double score_mean = 0.0;
  double score_std = 0.0;
  double trap_rate = 0.0;
  double curvature_mean = 0.0;
  double acceleration_mean = 0.0;
  double time_ms_mean = 0.0;  // measured; excluded from deterministic output
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<AggregateRow> rows;
};

// Cells run on `jobs` workers; every cell is deterministic and aggregation
// is a fixed-order reduce, so the worker count never changes the output.
SweepResult run_sweep(const ExperimentPlan& plan, int jobs);

// per-cell table; deterministic
std::string cells_to_csv(const std::vector<SweepCell>& cells, int barriers);

// aggregate table; the time column is left empty unless with_timing is set,
// keeping default outputs byte-identical across runs
std::string aggregate_to_csv(const std::vector<AggregateRow>& rows,
                             int barriers, bool with_timing);

}  // namespace flowplan

#endif  // FLOWPLAN_HARNESS_HPP
