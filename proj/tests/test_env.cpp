#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "flowplan/environment.hpp"
#include "flowplan/errors.hpp"
#include "oracles.hpp"

using namespace flowplan;

namespace {

PathDataset manual_dataset(std::vector<Path> paths, std::uint64_t seed) {
  PathDataset ds;
  ds.environment = "manual";
  ds.generator_seed = seed;
  ds.paths = std::move(paths);
  return ds;
}

Path constant_path2(int waypoints, double value) {
  Path p(2, waypoints - 1);
  p.data().setConstant(value);
  return p;
}

}  // namespace

TEST_CASE("corridor workspace is self-consistent") {
  const Environment env = corridor_environment();
  CHECK(env.name == "corridor");
  REQUIRE(env.barriers.size() == 2);
  CHECK(env.barriers[0].kind == BarrierSpec::Kind::ellipse);
  CHECK(env.barriers[1].kind == BarrierSpec::Kind::quartic);
  CHECK(env.waypoints == 32);
  CHECK(env.zeta > 0.0);
  CHECK_NOTHROW(env.validate(0.01));

  // the advertised trap threshold is 4x the median probe spacing
  const PathDataset probe = generate_dataset(env, 64, 0x5eedf00d);
  CHECK(env.zeta == doctest::Approx(4.0 * median_spacing(probe)).epsilon(1e-12));
  CHECK(env.zeta == doctest::Approx(default_zeta(env)).epsilon(1e-15));
}

TEST_CASE("workspace validation rejects bad geometry") {
  Environment env = corridor_environment();
  env.start.center = env.barriers[0].center;  // start disc inside the obstacle
  CHECK_THROWS_AS(env.validate(0.01), ValidationError);

  env = corridor_environment();
  env.goal.center = {7.9, 7.9};  // disc crosses the outer bounds
  CHECK_THROWS_AS(env.validate(0.01), ValidationError);

  env = corridor_environment();
  env.barriers.push_back(env.barriers[0]);
  CHECK_THROWS_AS(env.validate(0.01), ValidationError);

  env = corridor_environment();
  env.waypoints = 1;
  CHECK_THROWS_AS(env.validate(0.01), ValidationError);

  env = corridor_environment();
  env.control_spread = 0.0;
  CHECK_THROWS_AS(env.validate(0.01), ValidationError);

  env = corridor_environment();
  env.name.clear();
  CHECK_THROWS_AS(env.validate(0.01), ValidationError);
}

TEST_CASE("dataset generation is deterministic and well-shaped") {
  const Environment env = corridor_environment();
  const PathDataset a = generate_dataset(env, 16, 7);
  const PathDataset b = generate_dataset(env, 16, 7);
  const PathDataset c = generate_dataset(env, 16, 8);

  REQUIRE(a.paths.size() == 16);
  CHECK(a.waypoints() == 32);
  CHECK(a.generator_seed == 7);
  CHECK_NOTHROW(a.check());

  double max_diff = 0.0, cross_diff = 0.0;
  for (std::size_t i = 0; i < a.paths.size(); ++i) {
    max_diff = std::max(max_diff,
                        (a.paths[i].data() - b.paths[i].data()).norm());
    cross_diff = std::max(cross_diff,
                          (a.paths[i].data() - c.paths[i].data()).norm());
  }
  CHECK(max_diff == 0.0);
  CHECK(cross_diff > 0.0);

  // endpoints stay inside their discs; paths stay inside the bounds
  for (const Path& p : a.paths) {
    CHECK(env.start.contains(p.data().col(0)));
    CHECK(env.goal.contains(p.data().col(p.waypoints() - 1)));
  }

  CHECK_THROWS_AS(generate_dataset(env, 0, 1), ValidationError);
  CHECK_THROWS_AS(generate_dataset(env, 4, 1, -0.1), ValidationError);
}

TEST_CASE("without jitter the waypoints lie on a piecewise cubic") {
  const Environment env = corridor_environment();
  const PathDataset ds = generate_dataset(env, 8, 42, 0.0);

  // five knots give four spans; with H = 31 each span covers 8 samples.
  // Interpolate a cubic through four samples of a span and the other four
  // must follow, coordinate by coordinate.
  for (const Path& p : ds.paths) {
    for (int span = 0; span < 4; ++span) {
      const int k0 = span * 8;
      const std::array<int, 4> anchor{k0, k0 + 2, k0 + 4, k0 + 7};
      for (int coord = 0; coord < 2; ++coord) {
        Eigen::Matrix4d vand;
        Eigen::Vector4d rhs;
        for (int r = 0; r < 4; ++r) {
          const double u = (anchor[static_cast<std::size_t>(r)] - k0) / 7.0;
          vand.row(r) << 1.0, u, u * u, u * u * u;
          rhs[r] = p.data()(coord, anchor[static_cast<std::size_t>(r)]);
        }
        const Eigen::Vector4d coef = vand.fullPivLu().solve(rhs);
        for (int k = k0; k < k0 + 8; ++k) {
          const double u = (k - k0) / 7.0;
          const double fit =
              coef[0] + coef[1] * u + coef[2] * u * u + coef[3] * u * u * u;
          CHECK(std::abs(fit - p.data()(coord, k)) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("mean spacing tracks the start-goal chord") {
  const Environment env = corridor_environment();
  const PathDataset ds = generate_dataset(env, 1000, 3);
  const double chord = (env.goal.center - env.start.center).norm();
  const double nominal = chord / (env.waypoints - 1);

  double total = 0.0;
  long count = 0;
  for (const Path& p : ds.paths)
    for (int k = 1; k < p.waypoints(); ++k) {
      total += (p.data().col(k) - p.data().col(k - 1)).norm();
      ++count;
    }
  const double mean = total / static_cast<double>(count);
  CHECK(mean > 0.8 * nominal);
  CHECK(mean < 1.2 * nominal);
}

TEST_CASE("median spacing picks the middle segment") {
  Path p(2, 3);
  p.data() << 0.0, 1.0, 3.0, 6.0,
              0.0, 0.0, 0.0, 0.0;  // segments 1, 2, 3
  PathDataset one = manual_dataset({p}, 0);
  CHECK(median_spacing(one) == 2.0);

  Path q(2, 3);
  q.data() << 0.0, 10.0, 20.0, 30.0,
              0.0, 0.0, 0.0, 0.0;  // segments 10, 10, 10
  PathDataset two = manual_dataset({p, q}, 0);
  CHECK(median_spacing(two) == 10.0);  // upper middle of 6 entries
}

TEST_CASE("dataset validation") {
  PathDataset empty = manual_dataset({}, 0);
  CHECK_THROWS_AS(empty.check(), ValidationError);
  PathDataset mixed =
      manual_dataset({constant_path2(4, 1.0), constant_path2(5, 1.0)}, 0);
  CHECK_THROWS_AS(mixed.check(), ValidationError);
}

TEST_CASE("mixture fit recovers separated clusters") {
  Rng noise(91);
  std::vector<Path> paths;
  for (int i = 0; i < 30; ++i) {
    Path p = constant_path2(4, 1.0);
    for (int j = 0; j < p.data().size(); ++j)
      p.data().data()[j] += 0.01 * noise.normal();
    paths.push_back(std::move(p));
  }
  for (int i = 0; i < 30; ++i) {
    Path p = constant_path2(4, 5.0);
    for (int j = 0; j < p.data().size(); ++j)
      p.data().data()[j] += 0.01 * noise.normal();
    paths.push_back(std::move(p));
  }
  const PathDataset ds = manual_dataset(std::move(paths), 17);

  const GmmTarget gmm = fit_gmm_target(ds, 2);
  REQUIRE(gmm.components() == 2);
  CHECK(gmm.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gmm.weights[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gmm.stds[0] == gmm.stds[1]);
  CHECK(gmm.stds[0] < 0.05);
  CHECK(gmm.stds[0] > 0.0);

  double lo = 10.0, hi = 0.0;
  for (const Path& mean : gmm.means) {
    const double level = mean.data().mean();
    lo = std::min(lo, level);
    hi = std::max(hi, level);
  }
  CHECK(lo == doctest::Approx(1.0).epsilon(0.05));
  CHECK(hi == doctest::Approx(5.0).epsilon(0.05));

  // identical call, identical fit
  const GmmTarget again = fit_gmm_target(ds, 2);
  for (int c = 0; c < 2; ++c)
    CHECK((gmm.means[static_cast<std::size_t>(c)].data() -
           again.means[static_cast<std::size_t>(c)].data()).norm() == 0.0);
}

TEST_CASE("a collapsed dataset fits a point mass") {
  std::vector<Path> paths(12, constant_path2(4, 2.5));
  const PathDataset ds = manual_dataset(std::move(paths), 5);
  const GmmTarget gmm = fit_gmm_target(ds, 1);
  REQUIRE(gmm.components() == 1);
  CHECK(gmm.weights[0] == 1.0);
  CHECK((gmm.means[0].data().array() - 2.5).abs().maxCoeff() == 0.0);
  // the shared std collapses to the safety floor
  CHECK(gmm.stds[0] <= 1e-9 + 1e-15);
  CHECK(gmm.stds[0] > 0.0);

  CHECK_THROWS_AS(fit_gmm_target(ds, 13), ValidationError);
  CHECK_THROWS_AS(fit_gmm_target(ds, 0), ValidationError);
}
