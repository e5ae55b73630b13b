// Acceptance gate: one line per criterion, PASS or FAIL, nonzero exit when
// anything fails. Criterion 10 drives the installed CLI binary, whose path
// comes in as argv[1]; everything else runs in process against the library.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "flowplan/certificates.hpp"
#include "flowplan/harness.hpp"
#include "flowplan/serialize.hpp"
#include "oracles.hpp"

using namespace flowplan;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Gate {
  int number = 0;
  bool ok = true;
  std::string label;
  std::ostringstream detail;

  Gate(int n, std::string name) : number(n), label(std::move(name)) {}

  void require(bool cond, const std::string& why) {
    if (!cond) {
      ok = false;
      detail << "  [" << why << "]";
    }
  }

  bool finish() {
    std::printf("%s %2d %s%s\n", ok ? "PASS" : "FAIL", number, label.c_str(),
                detail.str().c_str());
    std::fflush(stdout);
    return ok;
  }
};

// ---------------------------------------------------------------- shared

const Environment& corridor() {
  static const Environment env = corridor_environment();
  return env;
}

const GmmTarget& corridor_target() {
  static const GmmTarget target = surrogate_target(corridor());
  return target;
}

const GmmMarginalField& corridor_field() {
  static const GmmMarginalField field(corridor_target());
  return field;
}

// ---------------------------------------------------------------- criteria

bool barrier_floor_on_plans() {
  Gate gate(1, "final-path barrier floor over 100 default plans");
  try {
    const auto start = Clock::now();
    const Environment& env = corridor();
    const GmmMarginalField& field = corridor_field();

    std::vector<Path> finals;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      RunConfig cfg;
      cfg.seed = seed;
      finals.push_back(plan(cfg, env, field).trace.final_path());
    }
    const double elapsed = seconds_since(start);

    const double floor = 0.01 - 1e-6;
    for (std::size_t j = 0; j < env.barriers.size(); ++j) {
      const double min_b = barrier_safety(finals, env.barriers[j]);
      gate.detail << " min_b" << j + 1 << "=" << min_b;
      gate.require(min_b >= floor, "barrier below floor");
    }
    gate.detail << " elapsed=" << elapsed << "s";
    gate.require(elapsed < 60.0, "over the 60 s budget");
  } catch (const std::exception& e) {
    gate.require(false, std::string("exception: ") + e.what());
  }
  return gate.finish();
}

bool finite_time_reach() {
  Gate gate(2, "finite reach time and scalar majorant on seeded violations");
  try {
    CbfParams params;
    params.t_w = 0.0;
    params.w0 = 0.0;
    params.zeta = 1.0;  // irrelevant here, but must be positive

    BarrierSpec circle;
    circle.kind = BarrierSpec::Kind::ellipse;
    circle.center << 0.0, 0.0;
    circle.ax = circle.ay = 1.0;
    const SafetyFilter filter{{circle}, params};

    const FunctionField still(2, 2, [](const Eigen::MatrixXd& tau, double) {
      return Eigen::MatrixXd::Zero(tau.rows(), tau.cols());
    });

    const int steps = 200;
    const double dt = 1.0 / steps;
    const TimeGrid grid = TimeGrid::uniform(steps);

    double worst_reach_slack = 1e300;  // bound + dt - observed reach
    double worst_majorant_slack = 1e300;
    for (int i = 0; i < 50; ++i) {
      const double depth = static_cast<double>(i + 1) / 50.0;  // (0, 1]
      const double radius = std::sqrt(1.0 + params.delta - depth);
      const double angle = 2.399963229728653 * i;
      Path start(2, 1);
      start.data().col(0) << radius * std::cos(angle), radius * std::sin(angle);
      start.data().col(1) << radius * std::cos(angle + 2.0),
          radius * std::sin(angle + 2.0);

      const CorrectionTrace trace =
          run_filtered_flow(still, grid, start, &filter);

      for (int k = 0; k < 2; ++k) {
        const double b0 = trace.snapshots.front().barriers(0, k);
        const double v0 = std::max(params.delta - b0, 0.0);
        const double bound =
            params.t_w + std::pow(v0, 1.0 - params.rho) /
                             (params.epsilon * (1.0 - params.rho));
        const double lips = params.epsilon * std::pow(v0, params.rho);

        double reached_at = 2.0;
        for (const CorrectionSnapshot& snap : trace.snapshots) {
          const double b = snap.barriers(0, k);
          if (reached_at > 1.5 && b >= params.delta) reached_at = snap.t;
          const double value = std::max(params.delta - b, 0.0);
          const double majorant =
              std::pow(std::max(std::pow(v0, 1.0 - params.rho) -
                                    (1.0 - params.rho) * params.epsilon *
                                        (snap.t - params.t_w),
                                0.0),
                       1.0 / (1.0 - params.rho)) +
              lips * dt;
          worst_majorant_slack = std::min(worst_majorant_slack,
                                          majorant - value);
        }
        worst_reach_slack = std::min(worst_reach_slack,
                                     bound + dt - reached_at);
      }
    }
    gate.detail << " reach_slack=" << worst_reach_slack
                << " majorant_slack=" << worst_majorant_slack;
    gate.require(worst_reach_slack >= 0.0, "reach later than the bound");
    gate.require(worst_majorant_slack >= 0.0, "value above the majorant");
  } catch (const std::exception& e) {
    gate.require(false, std::string("exception: ") + e.what());
  }
  return gate.finish();
}

bool qp_matches_oracle() {
  Gate gate(3, "closed-form projection vs dual-ascent oracle on 10^4 QPs");
  try {
    Rng rng(2024);
    int checked = 0, skipped = 0, degenerate = 0;
    double max_kkt = 0.0, max_du = 0.0, max_dobj = 0.0;

    for (int attempt = 0; attempt < 12000 && checked < 10000; ++attempt) {
      const int dim = 2 + static_cast<int>(rng.below(4));
      const int rows = 1 + static_cast<int>(rng.below(2));
      const bool weighted = rng.below(2) == 0;
      const oracles::QpInstance inst =
          oracles::random_qp_instance(rng, dim, rows, weighted);

      std::vector<CbfRow> cbf_rows;
      for (int j = 0; j < rows; ++j) {
        CbfRow row;
        row.grad = inst.grads[static_cast<std::size_t>(j)];
        row.offset = inst.offsets[static_cast<std::size_t>(j)];
        row.weight = inst.weight;
        cbf_rows.push_back(std::move(row));
      }
      const QpSolution sol = qp_project(cbf_rows, inst.v_ref);
      if (sol.degenerate) {
        ++degenerate;
        continue;
      }
      std::vector<double> lambdas;
      for (int j = 0; j < rows; ++j) lambdas.push_back(sol.multipliers[j]);
      max_kkt = std::max(max_kkt,
                         oracles::kkt_residual(inst, sol.u, sol.slack, lambdas));

      const oracles::QpOracleResult ref =
          oracles::solve_qp_dual(inst, 500000, 1e-13);
      if (!ref.converged) {
        ++skipped;
        continue;
      }
      ++checked;
      max_du = std::max(max_du, (sol.u - ref.u).norm() / (1.0 + ref.u.norm()));
      const double obj = (sol.u - inst.v_ref).squaredNorm() +
                         sol.slack * sol.slack;
      max_dobj = std::max(max_dobj, std::abs(obj - ref.objective) /
                                        (1.0 + ref.objective));
    }
    gate.detail << " checked=" << checked << " skipped=" << skipped
                << " degenerate=" << degenerate << " max_du=" << max_du
                << " max_dobj=" << max_dobj << " max_kkt=" << max_kkt;
    gate.require(checked == 10000, "ran out of attempts before 10^4 checks");
    gate.require(max_du < 1e-6, "u mismatch");
    gate.require(max_dobj < 1e-6, "objective mismatch");
    gate.require(max_kkt < 1e-8, "KKT residual too large");
  } catch (const std::exception& e) {
    gate.require(false, std::string("exception: ") + e.what());
  }
  return gate.finish();
}

bool exact_euler_landing() {
  Gate gate(4, "Euler lands exactly on point-mass targets");
  try {
    Rng rng(7);
    double worst = 0.0;
    for (int steps : {1, 2, 7, 64, 256}) {
      const Path target = sample_prior(2, 31, rng);
      const Path start = sample_prior(2, 31, rng);
      const OtConditionalField field(target);
      const Path end = euler_integrate(field, TimeGrid::uniform(steps), start);
      worst = std::max(worst, (end.data() - target.data()).norm());
    }
    gate.detail << " worst=" << worst;
    gate.require(worst <= 1e-12, "missed the target");
  } catch (const std::exception& e) {
    gate.require(false, std::string("exception: ") + e.what());
  }
  return gate.finish();
}

bool damped_correction_decay() {
  Gate gate(5, "damped correction contracts the start error at the rate");
  try {
    Rng rng(11);
    const Path target = sample_prior(2, 31, rng);
    const Path start = sample_prior(2, 31, rng);
    const OtConditionalField field(target);
    const double alpha = 2.0;
    const int steps = 256;

    const CorrectionTrace trace =
        run_correction(field, alpha, steps, start, nullptr);

    const double e0 = (start.data() - target.data()).norm();
    const double e1 =
        (trace.final_path().data() - target.data()).norm();
    const double ratio = e1 / e0;

    std::vector<double> ts, logs;
    for (const CorrectionSnapshot& snap : trace.snapshots) {
      if (snap.t > 0.8) break;
      ts.push_back(snap.t);
      logs.push_back(std::log(
          (snap.path.data() - target.data()).norm()));
    }
    const double slope = oracles::linear_fit(ts, logs).first;

    gate.detail << " ratio=" << ratio << " slope=" << slope;
    gate.require(ratio >= std::exp(-alpha) / 1.1, "over-contracted");
    gate.require(ratio <= std::exp(-alpha), "under-contracted");
    gate.require(slope <= -alpha * 0.9, "decay slope too shallow");
  } catch (const std::exception& e) {
    gate.require(false, std::string("exception: ") + e.what());
  }
  return gate.finish();
}

bool posterior_mean_contraction() {
  Gate gate(6, "mixture posterior mean contracts onto the endpoint");
  try {
    GmmTarget target;
    target.weights = {0.5, 0.5};
    Path low(2, 2), high(2, 2);
    low.data().setConstant(1.0);
    high.data().setConstant(4.0);
    target.means = {low, high};
    target.stds = {0.5, 0.5};
    const GmmMarginalField field(target);

    Rng rng(3);
    Path endpoint = low;
    for (int i = 0; i < endpoint.data().size(); ++i)
      endpoint.data()(i) += 0.3 * rng.normal();
    const Path noise = sample_prior(2, 2, rng);

    std::vector<double> log_u, log_err;
    for (int j = 0; j < 12; ++j) {
      const double u = std::pow(10.0, -1.0 - 2.0 * j / 11.0);  // (1 - t)
      const double t = 1.0 - u;
      const Eigen::MatrixXd tau =
          (1.0 - t) * noise.data() + t * endpoint.data();
      const Eigen::MatrixXd mean = field.posterior_mean(tau, t);
      log_u.push_back(std::log(u));
      log_err.push_back(std::log((mean - endpoint.data()).norm()));
    }
    const double slope = oracles::linear_fit(log_u, log_err).first;
    gate.detail << " slope=" << slope;
    gate.require(slope >= 0.9, "contraction slower than linear");
  } catch (const std::exception& e) {
    gate.require(false, std::string("exception: ") + e.what());
  }
  return gate.finish();
}

bool trap_rate_ordering() {
  Gate gate(7, "two-phase planner traps no more than the always-on filter");
  try {
    const Environment& env = corridor();
    const GmmMarginalField& field = corridor_field();

    int traps_pc = 0, traps_naive = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      RunConfig cfg;
      cfg.seed = seed;
      traps_pc +=
          run_method(Method::safeflowmatcher, cfg, env, field).record.trap;
      traps_naive +=
          run_method(Method::safe_fm_naive, cfg, env, field).record.trap;
    }
    gate.detail << " traps_pc=" << traps_pc << " traps_naive=" << traps_naive;
    gate.require(traps_pc <= traps_naive, "ordering violated");
    gate.require(traps_pc == 0, "two-phase planner trapped");
  } catch (const std::exception& e) {
    gate.require(false, std::string("exception: ") + e.what());
  }
  return gate.finish();
}

bool cfm_training() {
  Gate gate(8, "training gradient check and field-error reduction");
  try {
    // analytic gradient against central differences on a small network
    Rng grad_rng(21);
    MlpField small = MlpField::create(2, 2, {5}, grad_rng);
    CfmBatch batch;
    const int b = 6;
    batch.tau0.resize(4, b);
    batch.tau1.resize(4, b);
    for (int j = 0; j < b; ++j) {
      batch.ts.push_back(grad_rng.uniform());
      for (int i = 0; i < 4; ++i) {
        batch.tau0(i, j) = grad_rng.normal();
        batch.tau1(i, j) = grad_rng.normal();
      }
    }
    CfmGradients grads;
    cfm_loss(small, batch, &grads);

    double diff_sq = 0.0, norm_sq = 0.0;
    const double h = 1e-5;
    auto probe = [&](double* slot, double analytic) {
      const double saved = *slot;
      *slot = saved + h;
      const double up = cfm_loss(small, batch);
      *slot = saved - h;
      const double down = cfm_loss(small, batch);
      *slot = saved;
      const double fd = (up - down) / (2.0 * h);
      diff_sq += (analytic - fd) * (analytic - fd);
      norm_sq += analytic * analytic;
    };
    for (std::size_t l = 0; l < small.weights.size(); ++l) {
      for (int i = 0; i < small.weights[l].size(); ++i)
        probe(small.weights[l].data() + i, grads.weights[l](i));
      for (int i = 0; i < small.biases[l].size(); ++i)
        probe(small.biases[l].data() + i, grads.biases[l](i));
    }
    const double rel = std::sqrt(diff_sq / norm_sq);
    gate.detail << " grad_rel_err=" << rel;
    gate.require(rel < 1e-4, "gradient check failed");

    // full training run against the corridor surrogate
    const auto start = Clock::now();
    const GmmTarget& target = corridor_target();
    const GmmMarginalField& exact = corridor_field();

    Rng rng(0, 0x73a1);
    MlpField model = MlpField::create(2, 32, {64, 64}, rng);
    CfmTrainer trainer(std::move(model), target, 1e-3, rng.derive(1));

    ProbeSet probes;
    Rng probe_rng(0, 0xd157);
    for (int i = 0; i < 64; ++i) {
      const double t = 0.99 * probe_rng.uniform();
      const Path tau1 = target.sample(probe_rng);
      const Path tau0 = sample_prior(2, 31, probe_rng);
      probes.emplace_back(
          Path(((1.0 - t) * tau0.data() + t * tau1.data()).eval()), t);
    }
    const double initial = field_distance(trainer.model(), exact, probes);
    for (int s = 0; s < 5000; ++s) trainer.train_step(64);
    const double trained = field_distance(trainer.model(), exact, probes);
    const double elapsed = seconds_since(start);

    gate.detail << " initial=" << initial << " trained=" << trained
                << " elapsed=" << elapsed << "s";
    gate.require(trained < 0.25 * initial, "insufficient error reduction");
    gate.require(elapsed < 300.0, "over the 5 min budget");
  } catch (const std::exception& e) {
    gate.require(false, std::string("exception: ") + e.what());
  }
  return gate.finish();
}

bool metric_identities() {
  Gate gate(9, "metric identities");
  try {
    Path line(2, 4);
    line.data() << 0.0, 0.3, 1.1, 2.0, 5.0, 0.0, 0.15, 0.55, 1.0, 2.5;
    gate.require(curvature(line) <= 1e-9, "collinear curvature not zero");

    for (int n : {5, 8}) {
      Path gon(2, n + 1);
      for (int k = 0; k <= n + 1; ++k) {
        const double a = 2.0 * 3.14159265358979323846 * (k % n) / n;
        gon.data().col(k) << 2.0 * std::cos(a), 2.0 * std::sin(a);
      }
      const double expect = 2.0 * 3.14159265358979323846 / n;
      gate.require(std::abs(curvature(gon) - expect) <= 1e-9,
                   "polygon turn angle off");
    }

    Path steady(2, 5);
    for (int k = 0; k <= 5; ++k) steady.data().col(k) << 0.5 * k, -1.5 * k;
    gate.require(acceleration(steady) == 0.0,
                 "constant velocity has acceleration");

    gate.require(time_per_step(514.0, 1, 256) == 2.0,
                 "total not divided by 257");
    gate.require(time_per_step(100.0, 1, 256) == 100.0 / 257.0,
                 "per-step average off");
  } catch (const std::exception& e) {
    gate.require(false, std::string("exception: ") + e.what());
  }
  return gate.finish();
}

// runs the CLI and returns its exit code, discarding output
int run_tool(const std::string& bin, const std::string& args) {
  const std::string cmd = "\"" + bin + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -2;
}

// every regular file under dir, as sorted relative-path/content pairs
std::vector<std::pair<std::string, std::string>> dir_bytes(
    const std::string& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file())
      out.emplace_back(fs::relative(entry.path(), dir).string(),
                       read_file(entry.path().string()));
  std::sort(out.begin(), out.end());
  return out;
}

bool deterministic_replays(const std::string& bin) {
  Gate gate(10, "byte-identical artifacts on command replay");
  try {
    if (bin.empty()) {
      gate.require(false, "no CLI binary path given");
      return gate.finish();
    }
    const fs::path root = fs::temp_directory_path() /
                          ("flowplan-acc-" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string base = root.string();

    int code = run_tool(bin, "generate corridor 16 --seed 5 --out " + base +
                                 "/g1.json");
    gate.require(code == 0, "generate failed");
    code = run_tool(bin, "generate corridor 16 --seed 5 --out " + base +
                             "/g2.json");
    gate.require(code == 0, "generate replay failed");
    gate.require(read_file(base + "/g1.json") == read_file(base + "/g2.json"),
                 "datasets differ");

    const std::string plan_args = "plan --seed 7 --t-corr 48";
    const int plan_a =
        run_tool(bin, plan_args + " --out " + base + "/runsA");
    gate.require(plan_a == 0 || plan_a == 2, "plan failed outright");
    const int plan_b =
        run_tool(bin, plan_args + " --out " + base + "/runsB");
    gate.require(plan_b == plan_a, "plan exit codes differ");
    gate.require(dir_bytes(base + "/runsA") == dir_bytes(base + "/runsB"),
                 "plan artifacts differ");

    // in-place replay with --force must reproduce the same bytes too
    const auto before = dir_bytes(base + "/runsA");
    const int plan_c =
        run_tool(bin, plan_args + " --out " + base + "/runsA --force");
    gate.require(plan_c == plan_a, "forced replay exit code differs");
    gate.require(dir_bytes(base + "/runsA") == before,
                 "forced replay changed bytes");

    const std::string sweep_args =
        "sweep --methods fm_unsafe,safeflowmatcher --seeds 1,2 --t-corr 8";
    gate.require(run_tool(bin, sweep_args + " --out " + base + "/s1") == 0,
                 "sweep failed");
    gate.require(run_tool(bin, sweep_args + " --out " + base +
                                   "/s2 --jobs 4") == 0,
                 "sweep replay failed");
    gate.require(read_file(base + "/s1/sweep.csv") ==
                     read_file(base + "/s2/sweep.csv"),
                 "sweep aggregates differ");
    gate.require(read_file(base + "/s1/cells.csv") ==
                     read_file(base + "/s2/cells.csv"),
                 "sweep cells differ");
  } catch (const std::exception& e) {
    gate.require(false, std::string("exception: ") + e.what());
  }
  return gate.finish();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string bin = argc > 1 ? argv[1] : "";
  bool all = true;
  all &= barrier_floor_on_plans();
  all &= finite_time_reach();
  all &= qp_matches_oracle();
  all &= exact_euler_landing();
  all &= damped_correction_decay();
  all &= posterior_mean_contraction();
  all &= trap_rate_ordering();
  all &= cfm_training();
  all &= metric_identities();
  all &= deterministic_replays(bin);
  std::printf("%s\n", all ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL");
  return all ? 0 : 1;
}
