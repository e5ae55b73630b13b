#ifndef FLOWPLAN_PLAN_HPP
#define FLOWPLAN_PLAN_HPP

#include <memory>
#include <string>

#include "flowplan/certificates.hpp"
#include "flowplan/config.hpp"
#include "flowplan/environment.hpp"
#include "flowplan/fields.hpp"
#include "flowplan/integrate.hpp"
#include "flowplan/metrics.hpp"

namespace flowplan {

// "corridor" is built in; other names resolve to environments/<name>.json
Environment resolve_environment(const std::string& name);

// The mixture every experiment runs against: fitted to a fixed-seed dataset
// drawn from the environment, so the exact marginal field is available as
// ground truth for certificates.
GmmTarget surrogate_target(const Environment& env);

// "gmm" or "mlp:<checkpoint path>"; shape-checked against the config
std::unique_ptr<VectorField> build_field(const RunConfig& cfg,
                                         const Environment& env);

struct PlanResult {
  RunConfig effective;  // zeta resolved to the environment default
  PredictionResult prediction;
  CorrectionTrace trace;
  CertificateReport report;
  RunRecord record;
};

// Two-phase pipeline: unconstrained prediction from a Gaussian prior, then
// damped filtered correction restarted from the predicted path. The record
// is a pure function of (config, environment, field); only its timing field
// varies between runs.
PlanResult plan(const RunConfig& cfg, const Environment& env,
                const VectorField& field);

}  // namespace flowplan

#endif  // FLOWPLAN_PLAN_HPP
