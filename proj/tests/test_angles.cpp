#include <doctest.h>

#include <cmath>

#include "hypflow/angles.hpp"
#include "hypflow/errors.hpp"
#include "hypflow/random.hpp"
#include "hypflow/simplex.hpp"
#include "oracles.hpp"

using namespace hypflow;
using oracle::kPi;

namespace {

const Triangulation& census() {
  static const Triangulation tri = Triangulation::build(census_two_tet());
  return tri;
}

}  // namespace

TEST_SUITE("simplex") {
  TEST_CASE("textbook maximization") {
    // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
    lp::LinearProgram p;
    p.c = Eigen::Vector2d(3, 5);
    p.A_le = Eigen::MatrixXd(3, 2);
    p.A_le << 1, 0, 0, 2, 3, 2;
    p.b_le = Eigen::Vector3d(4, 12, 18);
    p.A_eq = Eigen::MatrixXd(0, 2);
    p.b_eq = Eigen::VectorXd(0);
    auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::optimal);
    CHECK(s.objective == doctest::Approx(36));
    CHECK(s.x[0] == doctest::Approx(2));
    CHECK(s.x[1] == doctest::Approx(6));
  }

  TEST_CASE("infeasible and unbounded programs") {
    lp::LinearProgram p;
    p.c = Eigen::Vector2d(1, 1);
    p.A_eq = Eigen::MatrixXd(1, 2);
    p.A_eq << 1, 1;
    p.b_eq = Eigen::VectorXd::Constant(1, -1);
    p.A_le = Eigen::MatrixXd(0, 2);
    p.b_le = Eigen::VectorXd(0);
    CHECK(lp::solve(p).status == lp::Status::infeasible);

    p.b_eq[0] = 1;
    p.A_eq << 1, -1;
    CHECK(lp::solve(p).status == lp::Status::unbounded);
  }

  TEST_CASE("redundant equalities and degenerate vertices") {
    lp::LinearProgram p;
    p.c = Eigen::Vector3d(1, 0, 0);
    p.A_eq = Eigen::MatrixXd(2, 3);
    p.A_eq << 1, 1, 1, 2, 2, 2;
    p.b_eq = Eigen::Vector2d(1, 2);
    p.A_le = Eigen::MatrixXd(1, 3);
    p.A_le << 1, -1, 0;
    p.b_le = Eigen::VectorXd::Zero(1);
    auto s = lp::solve(p);
    REQUIRE(s.status == lp::Status::optimal);
    CHECK(s.objective == doctest::Approx(0.5));
  }

  TEST_CASE("random programs agree with the exact rational solver") {
    Rng rng(77);
    for (int k = 0; k < 40; ++k) {
      const int m = 3, n = 5;
      lp::LinearProgram p;
      oracle::ExactLP ex;
      p.A_eq = Eigen::MatrixXd(0, n);
      p.b_eq = Eigen::VectorXd(0);
      p.A_le = Eigen::MatrixXd(m, n);
      p.b_le = Eigen::VectorXd(m);
      p.c = Eigen::VectorXd(n);
      ex.A.assign(m, std::vector<oracle::Rational>(n + m, 0));
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
          int v = static_cast<int>(rng.next() % 9) - 2;
          p.A_le(i, j) = v;
          ex.A[i][j] = v;
        }
        ex.A[i][n + i] = 1;
        int b = static_cast<int>(rng.next() % 10);
        p.b_le[i] = b;
        ex.b.push_back(b);
      }
      ex.c.assign(n + m, 0);
      for (int j = 0; j < n; ++j) {
        int v = static_cast<int>(rng.next() % 7) - 3;
        p.c[j] = v;
        ex.c[j] = v;
      }
      auto s = lp::solve(p);
      auto e = oracle::solve_exact(ex);
      REQUIRE(e.feasible);
      CHECK((s.status == lp::Status::unbounded) == !e.bounded);
      if (e.bounded && s.status == lp::Status::optimal)
        CHECK(s.objective == doctest::Approx(e.objective.convert_to<double>()).epsilon(1e-10));
    }
  }
}

TEST_SUITE("angles") {
  TEST_CASE("uniform assignment on the census is the pi/6 structure") {
    auto u = uniform_assignment(census());
    for (const auto& a : u.angles)
      for (int e = 0; e < 6; ++e) CHECK(a[e] == doctest::Approx(kPi / 6));
    auto chk = check_assignment(census(), u);
    CHECK(chk.valid());
    CHECK(chk.max_edge_residual < 1e-14);
    CHECK(chk.min_vertex_slack == doctest::Approx(kPi / 2));
  }

  TEST_CASE("census LP is feasible with the optimal slack pi/6") {
    auto r = lp_feasibility(census());
    REQUIRE(r.feasible);
    CHECK(r.epsilon == doctest::Approx(kPi / 6).epsilon(1e-12));
    auto chk = check_assignment(census(), r.witness);
    CHECK(chk.valid(1e-12));
    CHECK(chk.min_angle >= r.epsilon - 1e-12);
    auto again = lp_feasibility(census());
    CHECK(again.pivots == r.pivots);
    for (int t = 0; t < 2; ++t) CHECK(again.witness.angles[t] == r.witness.angles[t]);
  }

  TEST_CASE("LP slack matches an exact rational solve on every two-tetrahedron gluing") {
    int feasible = 0, infeasible = 0;
    for (const auto& s : search_gluings(2, [](const Triangulation&) { return true; })) {
      Triangulation tri = Triangulation::analyze(s);
      auto lib = lp_feasibility(tri);
      auto exact = oracle::angle_structure_slack(tri);
      bool exact_feasible = exact && *exact > 0;
      CHECK(lib.feasible == exact_feasible);
      if (exact_feasible) {
        ++feasible;
        CHECK(lib.epsilon == doctest::Approx(kPi * exact->convert_to<double>()).epsilon(1e-10));
        CHECK(check_assignment(tri, lib.witness).valid(1e-10));
      } else {
        ++infeasible;
      }
    }
    CHECK(feasible > 0);
    CHECK(infeasible > 0);
  }

  TEST_CASE("realization of the symmetric structure") {
    auto real = realize_structure(census(), uniform_assignment(census()));
    CHECK(real.max_spread < 1e-12);
    CHECK(std::abs(real.mean_lengths[0] - oracle::equilibrium_length()) < 1e-10);
  }

  TEST_CASE("realization rejects broken assignments") {
    auto u = uniform_assignment(census());
    u.angles[0][0] += 0.1;
    CHECK_THROWS_AS(realize_structure(census(), u), InadmissibleError);
    auto big = uniform_assignment(census());
    big.angles.pop_back();
    CHECK_THROWS_AS(realize_structure(census(), big), std::invalid_argument);
  }

  TEST_CASE("volume maximization from random structures finds the symmetric point") {
    Rng rng(21);
    auto base = uniform_assignment(census());
    for (int k = 0; k < 5; ++k) {
      auto start = random_structure(census(), base, rng, 0.3);
      CHECK(check_assignment(census(), start).valid(1e-12));
      auto res = maximize_volume(census(), start, 1e-10);
      REQUIRE(res.report.converged);
      CHECK(res.report.realization.max_spread < 1e-6);
      CHECK(std::abs(res.report.realization.mean_lengths[0] - oracle::equilibrium_length()) < 1e-6);
      for (size_t i = 1; i < res.report.objective_history.size(); ++i)
        CHECK(res.report.objective_history[i] >= res.report.objective_history[i - 1]);
      CHECK(res.report.volume >= total_volume(start) - 1e-12);
    }
  }

  TEST_CASE("volume is concave along segments") {
    auto rep = concavity_probe(census(), uniform_assignment(census()), 60, 4);
    CHECK(rep.violations == 0);
    CHECK(rep.max_second_difference < 1e-8);
    auto rep2 = concavity_probe(census(), uniform_assignment(census()), 60, 4);
    CHECK(rep2.max_second_difference == rep.max_second_difference);
  }

  TEST_CASE("random structures stay tangent to the edge equalities") {
    Rng rng(3);
    auto base = uniform_assignment(census());
    for (int k = 0; k < 50; ++k) {
      auto s = random_structure(census(), base, rng, 0.4);
      auto chk = check_assignment(census(), s);
      CHECK(chk.max_edge_residual < 1e-12);
      CHECK(chk.min_vertex_slack > 0);
      CHECK(chk.min_angle > 0);
    }
  }
}
