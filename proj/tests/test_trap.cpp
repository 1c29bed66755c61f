#include <catch2/catch.hpp>

#include "ionpa/ionpa.hpp"
#include "support.hpp"

using namespace ionpa;

TEST_CASE("single ion sits at the origin with zero energy") {
  auto cfg = support::paul_chain(1);
  const auto eq = solve_equilibrium(cfg, 3, 2);
  REQUIRE(eq.positions.norm() < 1e-12 * cfg.length_scale());
  REQUIRE(std::abs(eq.potential_energy) < 1e-15);
  REQUIRE(eq.frame == Frame::lab);
}

TEST_CASE("analytic gradient matches central finite differences") {
  auto check = [](const TrapConfig& cfg, std::uint64_t seed) {
    const auto pot = build_effective_potential(cfg);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd x(3 * cfg.n_ions);
    for (int i = 0; i < x.size(); ++i) x[i] = 2.0 * uni(rng);
    // keep ions apart so the Coulomb terms stay well-conditioned
    for (int j = 0; j < cfg.n_ions; ++j) x[3 * j] += 3.0 * j;
    Eigen::VectorXd g;
    pot.gradient(x, g);
    const Eigen::VectorXd g_fd = support::fd_gradient(pot, x);
    REQUIRE((g - g_fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
  };
  check(support::paul_chain(4), 11);
  auto pen = support::penning_3d(5);
  pen.anharmonic_c4 = 0.1;
  check(pen, 12);
}

TEST_CASE("hessian matches finite differences of the gradient") {
  auto cfg = support::paul_chain(3);
  const auto pot = build_effective_potential(cfg);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-0.4, 0.4);
  Eigen::VectorXd x(9);
  for (int i = 0; i < 9; ++i) x[i] = uni(rng);
  x[2] -= 2.0;
  x[8] += 2.0;
  Eigen::MatrixXd h;
  pot.hessian(x, h);
  const double eps = 1e-6;
  for (int i = 0; i < 9; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += eps;
    xm[i] -= eps;
    Eigen::VectorXd gp, gm;
    pot.gradient(xp, gp);
    pot.gradient(xm, gm);
    const Eigen::VectorXd col = (gp - gm) / (2.0 * eps);
    REQUIRE((h.col(i) - col).norm() < 1e-5 * std::max(1.0, h.col(i).norm()));
  }
}

TEST_CASE("two-ion paul chain lands on the closed-form spacing") {
  auto cfg = support::paul_chain(2);
  const auto eq = solve_equilibrium(cfg, 1, 3);
  // force balance q^2/(4 pi eps0 d^2) = m wz^2 d / 2  =>  d = 2^(1/3) l0
  const double d_expected = std::cbrt(2.0) * cfg.length_scale();
  REQUIRE(std::abs(eq.x(0)) < 1e-9 * d_expected);
  REQUIRE(std::abs(eq.y(0)) < 1e-9 * d_expected);
  const double d = std::abs(eq.z(0) - eq.z(1));
  REQUIRE(d == Approx(d_expected).epsilon(1e-9));
  REQUIRE(std::abs(eq.z(0) + eq.z(1)) < 1e-9 * d_expected);
}

TEST_CASE("fig-2b penning parameters are accepted and confining") {
  auto cfg = support::penning_3d(120);
  REQUIRE_NOTHROW(cfg.validate());
  REQUIRE(cfg.planar_beta() > 0.0);
  const auto pot = build_effective_potential(cfg);
  REQUIRE(pot.kx() > 0.0);
  REQUIRE(pot.ky() > 0.0);
}

TEST_CASE("penning config with too slow rotation is rejected") {
  auto cfg = support::penning_base(10, 150.0e3);  // beta < 0
  REQUIRE_THROWS_AS(build_effective_potential(cfg), UnstableConfinementError);
  // wall stronger than the planar confinement is rejected too
  auto cfg2 = support::penning_base(10, 180.0e3, 0.05);
  REQUIRE_THROWS_AS(build_effective_potential(cfg2), UnstableConfinementError);
}

TEST_CASE("equilibrium is deterministic and invariant under ion relabeling") {
  auto cfg = support::penning_planar(12);
  const auto eq1 = solve_equilibrium(cfg, 42, 3);
  const auto eq2 = solve_equilibrium(cfg, 42, 3);
  REQUIRE((eq1.positions - eq2.positions).norm() == 0.0);

  // a different seed permutes/reshuffles the initial guess; the converged
  // energy must agree to tolerance even if the labeling differs
  const auto eq3 = solve_equilibrium(cfg, 1042, 3);
  REQUIRE(eq3.potential_energy ==
          Approx(eq1.potential_energy).epsilon(1e-9));
}

TEST_CASE("energy decreases monotonically across accepted minimizer steps") {
  auto cfg = support::penning_planar(10);
  const auto pot = build_effective_potential(cfg);
  std::mt19937_64 rng(17);
  Eigen::VectorXd x = detail::random_seed_positions(pot, rng);
  std::vector<double> trace;
  double e = 0.0;
  detail::lbfgs_minimize(pot, x, 1e-6, 4000, &e, &trace);
  detail::newton_polish(pot, x, 1e-10, 200, &e, &trace);
  REQUIRE(trace.size() > 5);
  for (std::size_t i = 1; i < trace.size(); ++i)
    REQUIRE(trace[i] <= trace[i - 1] + 1e-12 * std::abs(trace[i - 1]));
}

TEST_CASE("converged gradients satisfy the solver tolerance") {
  auto cfg = support::penning_3d(15);
  const auto eq = solve_equilibrium(cfg, 9, 3);
  const double scale = cfg.energy_scale() / cfg.length_scale();
  REQUIRE(eq.gradient_norm / scale <= 1e-10);

  // center of charge vanishes for the symmetric trap
  double cx = 0.0, cy = 0.0;
  for (int j = 0; j < eq.n_ions; ++j) {
    cx += eq.x(j);
    cy += eq.y(j);
  }
  REQUIRE(std::abs(cx) < 1e-8 * eq.n_ions * cfg.length_scale());
  REQUIRE(std::abs(cy) < 1e-8 * eq.n_ions * cfg.length_scale());
}

TEST_CASE("csv round trip reproduces the energy to 1e-12") {
  const auto& c = support::get_crystal(support::penning_planar(12));
  const std::string csv = io::positions_csv(c.eq);
  const auto eq2 = io::read_positions_csv(csv, Frame::rotating);
  const auto pot = build_effective_potential(c.cfg);
  const double e1 = pot.energy(internal_coordinates(c.cfg, c.eq));
  const double e2 = pot.energy(internal_coordinates(c.cfg, eq2));
  REQUIRE(e2 == Approx(e1).epsilon(1e-12));
}

TEST_CASE("planar config yields a planar crystal") {
  const auto& c = support::get_crystal(support::penning_planar(19));
  double zmax = 0.0;
  for (int j = 0; j < c.eq.n_ions; ++j)
    zmax = std::max(zmax, std::abs(c.eq.z(j)));
  REQUIRE(zmax < 1e-8 * c.cfg.length_scale());
}

TEST_CASE("3d config yields extent in all three dimensions") {
  const auto& c = support::get_crystal(support::penning_3d(40));
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e300), hi = -lo;
  for (int j = 0; j < c.eq.n_ions; ++j)
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c.eq.positions[3 * j + a]);
      hi[a] = std::max(hi[a], c.eq.positions[3 * j + a]);
    }
  const double l0 = c.cfg.length_scale();
  REQUIRE((hi - lo).minCoeff() > 0.5 * l0);
}
