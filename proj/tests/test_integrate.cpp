#include <cmath>
#include <limits>

#include "doctest.h"
#include "flowplan/errors.hpp"
#include "flowplan/integrate.hpp"
#include "oracles.hpp"

using namespace flowplan;

namespace {

Path constant_path(int dim, int waypoints, double value) {
  Path p(dim, waypoints - 1);
  p.data().setConstant(value);
  return p;
}

Path ramp_target() {
  Path target(2, 2);
  target.data() << 1.0, 2.0, 3.0, -1.0, 0.5, 2.0;
  return target;
}

}  // namespace

TEST_CASE("euler transport sums dt times the field") {
  // field value t at every coordinate: the end state integrates t dt stepwise
  FunctionField field(1, 2, [](const Eigen::MatrixXd& tau, double t) {
    return Eigen::MatrixXd::Constant(tau.rows(), tau.cols(), t);
  });
  const TimeGrid grid({0.0, 0.5, 0.75, 1.0});
  std::vector<double> norms;
  const Path end = euler_integrate(field, grid, constant_path(1, 2, 0.0), &norms);
  const double expect = 0.5 * 0.0 + 0.25 * 0.5 + 0.25 * 0.75;
  CHECK(end.data()(0, 0) == doctest::Approx(expect).epsilon(1e-15));
  CHECK(end.data()(0, 1) == doctest::Approx(expect).epsilon(1e-15));
  REQUIRE(norms.size() == 3);
  CHECK(norms[1] == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-15));

  CHECK_THROWS_AS(
      euler_integrate(field, grid, constant_path(2, 2, 0.0), nullptr),
      ValidationError);
}

TEST_CASE("non-finite states carry the failing step") {
  FunctionField field(1, 2, [](const Eigen::MatrixXd& tau, double t) {
    if (t >= 0.5)
      return Eigen::MatrixXd::Constant(tau.rows(), tau.cols(),
                                       std::nan(""));
    return Eigen::MatrixXd::Zero(tau.rows(), tau.cols());
  });
  const TimeGrid grid = TimeGrid::uniform(4);
  try {
    euler_integrate(field, grid, constant_path(1, 2, 0.0), nullptr);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.step() == 2);  // t = 0.5 is the third evaluation
  }
}

TEST_CASE("straight-line transport lands exactly on a point target") {
  const Path target = ramp_target();
  const OtConditionalField field(target);
  Path start(2, 2);
  start.data() << -3.0, 0.7, 11.0, 2.0, -0.5, 4.0;

  for (int steps : {1, 2, 7, 64, 256}) {
    const Path end =
        euler_integrate(field, TimeGrid::uniform(steps), start, nullptr);
    CHECK((end.data() - target.data()).norm() < 1e-12);
  }
}

TEST_CASE("prediction draws the prior and runs the requested steps") {
  const Path target = ramp_target();
  const OtConditionalField field(target);

  Rng a(77), b(77), c(78);
  const PredictionResult ra = predict(field, 8, a);
  const PredictionResult rb = predict(field, 8, b);
  const PredictionResult rc = predict(field, 8, c);
  CHECK(ra.steps == 8);
  REQUIRE(ra.field_norms.size() == 8);
  CHECK((ra.path.data() - rb.path.data()).norm() == 0.0);
  CHECK(ra.field_norms == rb.field_norms);
  // both seeds land on the point target, but the priors differ, so the
  // first-step field magnitude (distance to the target) must differ
  CHECK(ra.field_norms[0] != rc.field_norms[0]);

  // a single step from any prior lands on the target
  Rng d(99);
  const PredictionResult one = predict(field, 1, d);
  CHECK((one.path.data() - target.data()).norm() < 1e-12);

  Rng e(1);
  CHECK_THROWS_AS(predict(field, 0, e), ValidationError);
}

TEST_CASE("damped field identities") {
  const Path target = ramp_target();
  const OtConditionalField base(target);
  const VtfdField damped(base, 2.0);
  CHECK(damped.alpha() == 2.0);
  CHECK(damped.dim() == 2);

  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(2, 3);
  for (double t : {0.0, 0.3, 0.9}) {
    const Eigen::MatrixXd expect = 2.0 * (1.0 - t) * base.eval(tau, t);
    CHECK((damped.eval(tau, t) - expect).norm() < 1e-12);
    CHECK((damped.scaled_eval(tau, t) - (1.0 - t) * damped.eval(tau, t)).norm() ==
          0.0);
  }
  // the (1 - t) factor cancels algebraically, so t = 1 stays regular
  const Eigen::MatrixXd at_one = damped.eval(tau, 1.0);
  CHECK((at_one - 2.0 * target.data()).norm() < 1e-12);

  CHECK_THROWS_AS(VtfdField(base, 0.99), ValidationError);
  CHECK_NOTHROW(VtfdField(base, 1.0));
}

TEST_CASE("filtered flow records snapshots over the whole clock") {
  // the target sits further from the obstacle than the start, so the
  // reference always moves away from it and the filter stays idle
  Path target(2, 2);
  target.data() << 6.0, 7.0, 8.0, 6.5, 7.5, 9.0;
  const OtConditionalField field(target);
  const Path start = constant_path(2, 3, 4.0);

  BarrierSpec spec;
  spec.kind = BarrierSpec::Kind::ellipse;
  spec.center << -50.0, -50.0;
  spec.ax = spec.ay = 1.0;
  std::vector<BarrierSpec> barriers{spec};

  SUBCASE("without a filter the qp blocks stay empty") {
    const CorrectionTrace trace = run_filtered_flow(
        field, TimeGrid::uniform(4), start, nullptr, &barriers);
    REQUIRE(trace.snapshots.size() == 5);
    CHECK(trace.snapshots.front().t == 0.0);
    CHECK(trace.snapshots.back().t == 1.0);
    CHECK(trace.barrier_count() == 1);
    for (const CorrectionSnapshot& s : trace.snapshots) {
      CHECK(s.qp.empty());
      CHECK(s.barriers.rows() == 1);
      CHECK(s.barriers.cols() == 3);
    }
    CHECK((trace.snapshots.front().path.data() - start.data()).norm() == 0.0);
    CHECK_NOTHROW(trace.check());
  }

  SUBCASE("with a filter every step logs per-waypoint results") {
    SafetyFilter filter;
    filter.barriers = barriers;
    const CorrectionTrace trace =
        run_filtered_flow(field, TimeGrid::uniform(4), start, &filter);
    REQUIRE(trace.snapshots.size() == 5);
    for (std::size_t i = 0; i + 1 < trace.snapshots.size(); ++i)
      CHECK(trace.snapshots[i].qp.size() == 3);
    CHECK(trace.snapshots.back().qp.empty());
    // inactive filter: transport matches the unfiltered run
    const CorrectionTrace plain = run_filtered_flow(
        field, TimeGrid::uniform(4), start, nullptr, &barriers);
    CHECK((trace.final_path().data() - plain.final_path().data()).norm() ==
          0.0);
  }

  SUBCASE("without filter or log barriers the trace has no rows") {
    const CorrectionTrace trace =
        run_filtered_flow(field, TimeGrid::uniform(4), start, nullptr);
    CHECK(trace.barrier_count() == 0);
  }
}

TEST_CASE("non-finite reference fails with the step index") {
  FunctionField bad(1, 2, [](const Eigen::MatrixXd& tau, double t) {
    if (t >= 0.75)
      return Eigen::MatrixXd::Constant(tau.rows(), tau.cols(),
                                       std::numeric_limits<double>::infinity());
    return Eigen::MatrixXd::Zero(tau.rows(), tau.cols());
  });
  try {
    run_filtered_flow(bad, TimeGrid::uniform(4), constant_path(1, 2, 0.0),
                      nullptr);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.step() == 3);
  }
}

TEST_CASE("correction restarts the clock at zero") {
  const Path target = ramp_target();
  const OtConditionalField field(target);
  const Path start = constant_path(2, 3, 2.0);

  const CorrectionTrace trace = run_correction(field, 2.0, 8, start, nullptr);
  REQUIRE(trace.snapshots.size() == 9);
  CHECK(trace.snapshots.front().t == 0.0);
  CHECK((trace.snapshots.front().path.data() - start.data()).norm() == 0.0);
  CHECK(trace.snapshots.back().t == 1.0);
}

TEST_CASE("damped correction contracts toward the target") {
  const Path target = ramp_target();
  const OtConditionalField field(target);
  Path start(2, 2);
  start.data() << 5.0, -4.0, 8.0, 3.0, 6.0, -2.0;
  const double d0 = (start.data() - target.data()).norm();

  for (double alpha : {1.0, 2.0, 4.0}) {
    const CorrectionTrace trace =
        run_correction(field, alpha, 256, start, nullptr);
    const double d1 = (trace.final_path().data() - target.data()).norm();
    const double expect = std::exp(-alpha);
    // Euler slightly overshoots the continuous rate but stays within 10%
    CHECK(d1 / d0 <= expect);
    CHECK(d1 / d0 >= expect / 1.1);
  }

  // distances decrease monotonically along the trace
  const CorrectionTrace trace = run_correction(field, 2.0, 64, start, nullptr);
  double prev = std::numeric_limits<double>::infinity();
  for (const CorrectionSnapshot& s : trace.snapshots) {
    const double d = (s.path.data() - target.data()).norm();
    CHECK(d <= prev + 1e-12);
    prev = d;
  }
}
