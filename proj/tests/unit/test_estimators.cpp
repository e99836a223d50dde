#include <doctest.h>

#include <cmath>
#include <memory>

#include <json.hpp>

#include "flowbm/estimators.hpp"
#include "flowbm/family_factory.hpp"

using namespace flowbm;

namespace {

ChartPoint pt(double a, double b) {
  Vec x(2);
  x << a, b;
  return ChartPoint(0, x);
}

SimConfig make(FamilyPtr f, double T, int steps, TimeDirection dir) {
  SimConfig c;
  c.family = std::move(f);
  c.T = T;
  c.n_steps = steps;
  c.direction = dir;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("checkpoints") {
  CHECK(checkpoint_steps(100, 5) == std::vector<int>{0, 20, 40, 60, 80, 100});
  CHECK(checkpoint_steps(10, 3) == std::vector<int>{0, 3, 7, 10});
}

TEST_CASE("Bismut gradient of a constant vanishes within noise") {
  const auto flat = std::make_shared<TorusNrfFamily>(static_torus_solution(Field2D(16)));
  const SimConfig c = make(flat, 0.5, 100, TimeDirection::kReversed);
  Vec v(2);
  v << 1.0, 0.0;
  const EstimatorReport r = bismut_gradient(c, [](const ChartPoint&) { return 1.0; }, pt(1.0, 2.0), v, {4000, 1});
  CHECK(std::abs(r.estimate[0]) <= 3.0 * r.std_error[0]);
  CHECK_THROWS(bismut_gradient(make(flat, 0.5, 100, TimeDirection::kForward),
                               [](const ChartPoint&) { return 1.0; }, pt(1.0, 2.0), v, {10, 1}));
}

TEST_CASE("gradient bound on a constant") {
  const auto sph = std::make_shared<SphereFamily>(2, 1.0, std::sqrt(2.0));
  const EstimatorReport r = gradient_bound_check(make(sph, 0.5, 100, TimeDirection::kReversed),
                                                 [](const ChartPoint&) { return 1.0; }, 1.0, {pt(0.2, 0.1)},
                                                 {0.25, 0.5}, {500, 1});
  CHECK(r.passed());
}

TEST_CASE("drift test on constant processes") {
  const std::vector<std::vector<double>> samples(50, std::vector<double>{2.0, 2.0, 2.0});
  const EstimatorReport r = martingale_drift_test(samples, {0.0, 0.5, 1.0});
  CHECK(r.passed());
  CHECK(r.diagnostics.at("max_normalized_residual") == 0.0);
  CHECK(r.tables.at("drift").rows.size() == 2);
}

TEST_CASE("closed-form clocks") {
  CHECK(closed_form_tau(SphereFamily(2, 2.0), 0.2) == doctest::Approx(std::log(1.0 - 0.4) / -2.0));
  CHECK(closed_form_tau(HyperbolicFamily(2, 2.0), 0.5) == doctest::Approx(std::log(2.0) / 2.0));
}

TEST_CASE("weak convergence table has one row per dt") {
  const auto e = std::make_shared<EuclideanFamily>(2);
  const EstimatorReport r = weak_convergence(make(e, 1.0, 10, TimeDirection::kForward), pt(0.0, 0.0),
                                             [](const ChartPoint& p) { return p.coords.squaredNorm(); }, 2.0,
                                             {0.1, 0.05, 0.025}, {200, 1});
  CHECK(r.tables.at("convergence").rows.size() == 3);
}

TEST_CASE("intrinsic martingale: Ricci-flat torus and the QV curve schema") {
  const auto flat = std::make_shared<TorusNrfFamily>(static_torus_solution(Field2D(16)));
  const EstimatorReport f = intrinsic_martingale_check(make(flat, 0.5, 100, TimeDirection::kReversed), pt(1.0, 2.0),
                                                       {20, 1});
  CHECK(f.diagnostics.at("max_abs_L") == 0.0);
  CHECK(f.estimate[0] == 0.0);
  const auto sph = std::make_shared<SphereFamily>(2, 1.0);
  const EstimatorReport s = intrinsic_martingale_check(make(sph, 0.5, 500, TimeDirection::kReversed), pt(0.3, 0.2),
                                                       {50, 1}, 0.05, 10);
  const Table& qv = s.tables.at("qv_curve");
  CHECK(qv.columns == std::vector<std::string>{"t", "realized_qv", "predicted_qv"});
  CHECK(qv.rows.size() == 11);
  // predicted QV on the shrinking sphere: 2 (1 / (1 - T) - 1)
  CHECK(qv.rows.back()[2] == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("exact binomial sampling floor") {
  // N = 4, p = 0.5: E|K/4 - 1/2| = (2 * 1/16 * 0.5 + 2 * 4/16 * 0.25) = 0.1875
  CHECK(expected_sampling_l1({0.5}, 4) == doctest::Approx(0.1875));
  // Brute force for N = 7, p = 0.3.
  const int N = 7;
  const double p = 0.3;
  double exact = 0.0;
  for (int k = 0; k <= N; ++k)
    exact += std::exp(std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0)) * std::pow(p, k) *
             std::pow(1.0 - p, N - k) * std::abs(static_cast<double>(k) / N - p);
  CHECK(expected_sampling_l1({p}, N) == doctest::Approx(exact).epsilon(1e-12));
  CHECK(expected_sampling_l1({0.0, 1.0}, 10) == 0.0);
}

TEST_CASE("scalar gradient estimate on the flat torus") {
  const auto flat = std::make_shared<TorusNrfFamily>(static_torus_solution(Field2D(16)));
  SimConfig c = make(flat, 0.5, 100, TimeDirection::kReversed);
  c.sigma = 2.0;
  const EstimatorReport r = scalar_gradient_estimate_check(c, *flat, {pt(1.0, 1.0)}, {50, 1});
  CHECK(r.passed());
  CHECK(r.diagnostics.at("min_slack") == 0.0);
}

TEST_CASE("report JSON layout") {
  EstimatorReport r;
  r.estimator = "demo";
  r.estimate = {1.5};
  r.std_error = {0.1};
  r.n_paths = 10;
  r.checks["a"] = true;
  r.diagnostics["x"] = 2.0;
  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j["estimator"] == "demo");
  CHECK(j["estimate"][0] == 1.5);
  CHECK(j["passed"] == true);
  CHECK(j.contains("config_echo"));
  CHECK(j.contains("warnings"));
  r.checks["b"] = false;
  CHECK_FALSE(r.passed());
}
