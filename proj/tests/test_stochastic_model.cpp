#include <doctest.h>

#include <random>

#include "mgare/sample_pool.hpp"
#include "support/test_scenarios.hpp"

using namespace mgare;
using mgare::testing::random_matrix;
using mgare::testing::random_pd;
using mgare::testing::two_state_exact;

namespace {

Scenario tiny_identity_scenario(ChannelModel controller, ChannelModel attacker,
                                Eigen::Index s = 2) {
  Scenario sc;
  sc.dims.state = s;
  sc.dims.rx_antennas = s;
  sc.dims.tx_controller = controller.cols();
  sc.dims.tx_attacker = attacker.cols();
  sc.dims.num_controllers = 1;
  sc.dims.num_attackers = 1;
  sc.A = Matrix::Identity(s, s);
  sc.B = {Matrix::Identity(s, s)};
  sc.Q = Matrix::Identity(s, s);
  sc.Rc = Matrix::Identity(sc.dims.control_width(), sc.dims.control_width());
  sc.Ra = Matrix::Identity(sc.dims.attack_width(), sc.dims.attack_width());
  sc.W = Matrix::Zero(s, s);
  sc.V = Matrix::Zero(s, s);
  sc.x0 = Vector::Zero(s);
  sc.controller_channels.models = {{std::move(controller)}};
  sc.attacker_channels.models = {{std::move(attacker)}};
  sc.validate();
  return sc;
}

}  // namespace

TEST_CASE("aggregated gains match the naive double sum") {
  // Single player with identity gain and identity channel.
  Scenario sc = tiny_identity_scenario(deterministic_channel(Matrix::Identity(2, 2)),
                                       deterministic_channel(Matrix::Identity(2, 2)));
  auto grid = std::vector<std::vector<Matrix>>{{Matrix::Identity(2, 2)}};
  CHECK((assemble_control_gain(sc, grid) - Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK((assemble_attack_gain(sc, grid) - Matrix::Identity(2, 2)).norm() == 0.0);

  auto zero = std::vector<std::vector<Matrix>>{{Matrix::Zero(2, 2)}};
  CHECK(assemble_attack_gain(sc, zero).norm() == 0.0);

  // Two controllers, random entries, against an entry-level double sum.
  std::mt19937_64 rng(21);
  Scenario multi;
  multi.dims.state = 3;
  multi.dims.rx_antennas = 2;
  multi.dims.tx_controller = 2;
  multi.dims.tx_attacker = 1;
  multi.dims.num_controllers = 2;
  multi.dims.num_attackers = 1;
  multi.A = Matrix::Identity(3, 3);
  multi.B = {random_matrix(rng, 3, 2), random_matrix(rng, 3, 2)};
  multi.Q = Matrix::Identity(3, 3);
  multi.Rc = Matrix::Identity(4, 4);
  multi.Ra = Matrix::Identity(1, 1);
  multi.W = Matrix::Zero(3, 3);
  multi.V = Matrix::Zero(2, 2);
  multi.x0 = Vector::Zero(3);
  multi.controller_channels.models = {
      {deterministic_channel(Matrix::Zero(2, 2)), deterministic_channel(Matrix::Zero(2, 2))},
      {deterministic_channel(Matrix::Zero(2, 2)), deterministic_channel(Matrix::Zero(2, 2))}};
  multi.attacker_channels.models = {
      {deterministic_channel(Matrix::Zero(2, 1)), deterministic_channel(Matrix::Zero(2, 1))}};
  multi.validate();

  std::vector<std::vector<Matrix>> h(2);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) h[j].push_back(random_matrix(rng, 2, 2));
  Matrix got = assemble_control_gain(multi, h);
  Matrix want = Matrix::Zero(3, 4);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i)
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c)
          for (int m = 0; m < 2; ++m) want(r, 2 * j + c) += multi.B[i](r, m) * h[j][i](m, c);
  }
  CHECK((got - want).norm() < 1e-12);
}

TEST_CASE("build_pool enumerates gated deterministic channels exactly") {
  Scenario sc = tiny_identity_scenario(
      gated_channel(0.3, deterministic_channel(Matrix::Identity(2, 2))),
      deterministic_channel(Matrix::Zero(2, 2)));
  SamplePool pool = build_pool(sc, 1, 100);
  REQUIRE(pool.bc.exact);
  REQUIRE(pool.bc.atoms.size() == 2);
  // Weight of the zero atom is 1 - delta.
  double zero_w = 0.0, on_w = 0.0;
  for (std::size_t i = 0; i < pool.bc.atoms.size(); ++i) {
    if (pool.bc.atoms[i].norm() == 0.0) zero_w += pool.bc.weights[i];
    else on_w += pool.bc.weights[i];
  }
  CHECK(zero_w == doctest::Approx(0.7));
  CHECK(on_w == doctest::Approx(0.3));
}

TEST_CASE("build_pool sampled pools are reproducible") {
  Scenario sc = tiny_identity_scenario(gaussian_channel(Matrix::Zero(2, 2), 1.0),
                                       gaussian_channel(Matrix::Zero(2, 2), 1.0));
  SamplePool a = build_pool(sc, 42, 50);
  SamplePool b = build_pool(sc, 42, 50);
  REQUIRE(!a.bc.exact);
  REQUIRE(a.bc.atoms.size() == 50);
  for (std::size_t i = 0; i < a.bc.atoms.size(); ++i) {
    CHECK((a.bc.atoms[i] - b.bc.atoms[i]).norm() == 0.0);
    CHECK((a.ba.atoms[i] - b.ba.atoms[i]).norm() == 0.0);
  }
  SamplePool c = build_pool(sc, 43, 50);
  CHECK((a.bc.atoms[0] - c.bc.atoms[0]).norm() > 0.0);
}

TEST_CASE("build_pool respects the exact cap") {
  // 2^12 gate patterns exceed a cap of 16.
  Scenario sc = tiny_identity_scenario(gaussian_channel(Matrix::Zero(2, 2), 1.0),
                                       deterministic_channel(Matrix::Zero(2, 2)));
  CHECK_THROWS_AS(build_pool(sc, 1, 10, /*force_exact=*/true), std::length_error);

  Scenario fin = tiny_identity_scenario(
      gated_channel(0.5, deterministic_channel(Matrix::Identity(2, 2))),
      deterministic_channel(Matrix::Zero(2, 2)));
  SamplePool pool = build_pool(fin, 1, 10, false, /*exact_cap=*/1);
  CHECK(!pool.bc.exact);  // support 2 > cap 1 falls back to sampling
  CHECK(pool.bc.atoms.size() == 10);
}

TEST_CASE("attacker moments") {
  SUBCASE("deterministic attacker gain has zero covariance term") {
    Scenario sc = tiny_identity_scenario(deterministic_channel(Matrix::Identity(2, 2)),
                                         deterministic_channel(Matrix::Identity(2, 2)));
    SamplePool pool = build_pool(sc, 1, 10);
    AttackerMoments m = attacker_moments(pool, Matrix::Identity(2, 2));
    CHECK(m.cov_term.norm() < 1e-14);
    CHECK((m.mean - Matrix::Identity(2, 2)).norm() < 1e-14);
  }

  SUBCASE("two equiprobable atoms +/- B give zero mean and cov B^T B") {
    Matrix b(2, 2);
    b << 0.7, -0.1, 0.4, 1.2;
    Scenario sc = tiny_identity_scenario(deterministic_channel(Matrix::Identity(2, 2)),
                                         finite_channel({b, Matrix(-b)}, {0.5, 0.5}));
    SamplePool pool = build_pool(sc, 1, 10);
    AttackerMoments m = attacker_moments(pool, Matrix::Identity(2, 2));
    CHECK(m.mean.norm() < 1e-14);
    CHECK((m.cov_term - b.transpose() * b).norm() < 1e-12);
  }

  SUBCASE("symmetric two-point scalar law matches the enumerated moment") {
    Scenario sc = tiny_identity_scenario(
        deterministic_channel(Matrix::Identity(1, 1)),
        finite_channel({Matrix::Ones(1, 1), Matrix(-Matrix::Ones(1, 1))}, {0.5, 0.5}), 1);
    SamplePool pool = build_pool(sc, 1, 10);
    AttackerMoments m = attacker_moments(pool, Matrix::Identity(1, 1));
    CHECK(m.second_moment(0, 0) == doctest::Approx(1.0));
    CHECK(sigma2_ba(pool) == doctest::Approx(1.0));
  }
}

TEST_CASE("sigma2_ba") {
  SUBCASE("deterministic pool has zero variance") {
    Scenario sc = tiny_identity_scenario(deterministic_channel(Matrix::Identity(2, 2)),
                                         deterministic_channel(Matrix::Identity(2, 2)));
    CHECK(sigma2_ba(build_pool(sc, 1, 4)) == 0.0);
  }
  SUBCASE("bernoulli scalar entry has variance p(1-p)v^2") {
    const double p = 0.3, v = 2.5;
    Scenario sc = tiny_identity_scenario(
        deterministic_channel(Matrix::Identity(1, 1)),
        gated_channel(p, deterministic_channel(Matrix::Constant(1, 1, v))), 1);
    SamplePool pool = build_pool(sc, 1, 4);
    CHECK(sigma2_ba(pool) == doctest::Approx(p * (1 - p) * v * v));
  }
}

TEST_CASE("expect_over_bc") {
  Scenario sc = two_state_exact();
  SamplePool pool = build_pool(sc, 1, 4);
  REQUIRE(pool.exact());

  SUBCASE("constant function returns the constant") {
    Matrix c = (Matrix(2, 2) << 1, 2, 3, 4).finished();
    CHECK((expect_over_bc(pool, [&](const Matrix&) { return c; }) - c).norm() == 0.0);
  }
  SUBCASE("identity map returns the weighted mean") {
    Matrix mean = Matrix::Zero(2, 1);
    for (std::size_t i = 0; i < pool.bc.atoms.size(); ++i)
      mean += pool.bc.weights[i] * pool.bc.atoms[i];
    CHECK((expect_over_bc(pool, [](const Matrix& b) { return b; }) - mean).norm() < 1e-15);
  }
  SUBCASE("expectations on exact pools are independent of the sample count") {
    SamplePool small = build_pool(sc, 9, 2);
    SamplePool large = build_pool(sc, 5, 5000);
    auto f = [](const Matrix& b) { return Matrix(b * b.transpose()); };
    CHECK((expect_over_bc(small, f) - expect_over_bc(large, f)).norm() == 0.0);
  }
}

TEST_CASE("sampled gaussian second moment approaches the analytic value") {
  // B^c = H with entries N(0,1) entries: E[B B^T] = cols * I.
  Scenario sc = tiny_identity_scenario(gaussian_channel(Matrix::Zero(2, 2), 1.0),
                                       deterministic_channel(Matrix::Zero(2, 2)));
  const int m = 100000;
  SamplePool pool = build_pool(sc, 3, m);
  Matrix got = expect_over_bc(pool, [](const Matrix& b) { return Matrix(b * b.transpose()); });
  Matrix want = 2.0 * Matrix::Identity(2, 2);
  // Entry std error ~ sqrt(var/m), var of chi-square-ish entries ~ 2*2.
  CHECK((got - want).cwiseAbs().maxCoeff() < 3.0 * std::sqrt(8.0 / m));
}

TEST_CASE("enumerated weights match the sampling path") {
  // The exact enumeration and the per-draw sampler are independent code
  // paths over the same law; their second moments must agree.
  Scenario sc;
  sc.dims.state = 2;
  sc.dims.rx_antennas = 2;
  sc.dims.tx_controller = 1;
  sc.dims.tx_attacker = 1;
  sc.dims.num_controllers = 2;
  sc.dims.num_attackers = 1;
  sc.A = Matrix::Identity(2, 2);
  std::mt19937_64 rng(24);
  sc.B = {mgare::testing::random_matrix(rng, 2, 2), mgare::testing::random_matrix(rng, 2, 2)};
  sc.Q = Matrix::Identity(2, 2);
  sc.Rc = Matrix::Identity(2, 2);
  sc.Ra = Matrix::Identity(1, 1);
  sc.W = Matrix::Zero(2, 2);
  sc.V = Matrix::Zero(2, 2);
  sc.x0 = Vector::Zero(2);
  sc.controller_channels.coupling = GateCoupling::PerTransmitter;
  for (int j = 0; j < 2; ++j) {
    std::vector<ChannelModel> row;
    for (int i = 0; i < 2; ++i) {
      Matrix h1 = mgare::testing::random_matrix(rng, 2, 1);
      Matrix h2 = mgare::testing::random_matrix(rng, 2, 1);
      row.push_back(gated_channel(0.3 + 0.3 * j, finite_channel({h1, h2}, {0.7, 0.3})));
    }
    sc.controller_channels.models.push_back(std::move(row));
  }
  sc.attacker_channels.models = {
      {deterministic_channel(Matrix::Zero(2, 1)), deterministic_channel(Matrix::Zero(2, 1))}};
  sc.validate();

  SamplePool exact = build_pool(sc, 1, 4);
  REQUIRE(exact.bc.exact);
  const int m = 200000;
  SamplePool sampled = build_pool(sc, 2, m, false, /*exact_cap=*/1);
  auto gram = [](const Matrix& b) { return Matrix(b * b.transpose()); };
  Matrix want = expect_over_bc(exact, gram);
  Matrix got = expect_over_bc(sampled, gram);
  CHECK((got - want).cwiseAbs().maxCoeff() < 3.0 * std::sqrt(4.0 / m) * want.norm());
}

TEST_CASE("coupled gates must share one probability") {
  Scenario sc = two_state_exact();
  sc.controller_channels.coupling = GateCoupling::Shared;
  sc.controller_channels.models = {
      {gated_channel(0.5, deterministic_channel(Matrix::Ones(2, 1)))}};
  sc.validate();  // a single link trivially agrees

  Scenario bad;
  bad.dims = sc.dims;
  bad.dims.num_controllers = 2;
  bad.dims.num_attackers = 1;
  bad.A = sc.A;
  bad.B = {sc.B[0], sc.B[0]};
  bad.Q = sc.Q;
  bad.Rc = Matrix::Identity(2, 2);
  bad.Ra = sc.Ra;
  bad.W = sc.W;
  bad.V = sc.V;
  bad.x0 = sc.x0;
  bad.controller_channels.coupling = GateCoupling::Shared;
  bad.controller_channels.models = {
      {gated_channel(0.5, deterministic_channel(Matrix::Ones(2, 1))),
       gated_channel(0.6, deterministic_channel(Matrix::Ones(2, 1)))},
      {gated_channel(0.5, deterministic_channel(Matrix::Ones(2, 1))),
       gated_channel(0.5, deterministic_channel(Matrix::Ones(2, 1)))}};
  bad.attacker_channels.models = {
      {deterministic_channel(Matrix::Zero(2, 1)), deterministic_channel(Matrix::Zero(2, 1))}};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("share one probability"),
                       std::invalid_argument);
}

TEST_CASE("cov_term is PSD for PD weights") {
  std::mt19937_64 rng(22);
  Scenario sc = two_state_exact();
  SamplePool pool = build_pool(sc, 1, 4);
  for (int t = 0; t < 20; ++t) {
    Matrix p = random_pd(rng, 2);
    CHECK(is_psd(attacker_moments(pool, p).cov_term));
  }
}

TEST_CASE("stacked quadratic matches R(P) + B(k)^T P B(k) blockwise") {
  // The covariance-term definition is exactly the one that makes the
  // attacker margin equal Ra - E[(B^a)^T P B^a].
  std::mt19937_64 rng(23);
  Scenario sc = two_state_exact();
  SamplePool pool = build_pool(sc, 1, 4);
  for (int t = 0; t < 10; ++t) {
    Matrix p = random_pd(rng, 2);
    AttackerMoments m = attacker_moments(pool, p);
    Matrix margin_direct = sc.Ra - m.second_moment;
    Matrix margin_via_cov = (sc.Ra - m.cov_term) - m.mean.transpose() * p * m.mean;
    CHECK((margin_direct - margin_via_cov).norm() < 1e-12 * std::max(1.0, sc.Ra.norm()));
  }
}

TEST_CASE("scenario validation reports bad fields") {
  Scenario sc = two_state_exact();
  sc.Q = -Matrix::Identity(2, 2);
  CHECK_THROWS_WITH_AS(sc.validate(), doctest::Contains("Q must be positive definite"),
                       std::invalid_argument);
}
