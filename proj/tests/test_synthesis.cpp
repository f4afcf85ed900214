#include <cmath>
#include <limits>

#include "cwd/synthesis.hpp"
#include "doctest.h"

using namespace cwd;

namespace {

FiniteMetricSpace grid_half(int n) {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < n; ++i) {
    ids.push_back("p" + std::to_string(i));
    pts.push_back({0.5 * i / (n - 1)});
  }
  return FiniteMetricSpace::from_points(ids, pts);
}

FillingGraph grid_filling(int n, double a, double lambda, int levels) {
  auto s = grid_half(n);
  return build_filling(s, build_net_hierarchy(s, a, levels), lambda);
}

}  // namespace

TEST_CASE("discrete gradient sigma: vacuous annulus, boundary conditions, S1 telescoping") {
  // a=9: level-1 balls have nontrivial exterior near the interval edges
  auto g = grid_filling(129, 9.0, 3.0, 2);
  auto gentle = gentle_capacity_function(g, counting_ball_masses(g), 2.0);
  auto form = level_form(g, 2, gentle);

  std::vector<SigmaFunction> locals;
  const auto [b1, e1] = g.level_range(1);
  for (int B = b1; B < e1; ++B) locals.push_back(discrete_gradient_sigma(g, form, gentle, B));

  bool any_active = false, any_vacuous = false;
  for (const auto& loc : locals) {
    if (loc.vacuous) {
      any_vacuous = true;
      CHECK(loc.max_value() == 0.0);
      continue;
    }
    any_active = true;
    CHECK(loc.energy_ratio >= 0);
    // support stays inside V_B = {B' : B' meets 3B}
    for (int v : loc.support) {
      CHECK(g.vertex(v).level == 2);
      CHECK(g.center_dist(v, loc.parent) < g.radius(v) + 3 * g.radius(loc.parent));
    }
  }
  CHECK(any_active);
  (void)any_vacuous;

  // crossing-path sums of each local sigma reach 1 (telescoping property)
  for (const auto& loc : locals) {
    if (loc.vacuous) continue;
    const double mins = crossing_min_cost(
        g, loc.parent, [](int, int) { return 0.0; },
        [&](int v) { return loc.value[v]; });
    if (std::isfinite(mins)) CHECK(mins >= 1.0 - 1e-9);
  }
}

TEST_CASE("patch_sigma is the pointwise max and keeps S1") {
  auto g = grid_filling(129, 9.0, 3.0, 2);
  auto gentle = gentle_capacity_function(g, counting_ball_masses(g), 2.0);
  auto form = level_form(g, 2, gentle);

  std::vector<SigmaFunction> locals;
  const auto [b1, e1] = g.level_range(1);
  for (int B = b1; B < e1; ++B) locals.push_back(discrete_gradient_sigma(g, form, gentle, B));
  const auto patched = patch_sigma(g, locals);

  for (int id = 0; id < g.size(); ++id) {
    double expect = 0;
    if (g.vertex(id).level >= 2)
      for (const auto& loc : locals) expect = std::max(expect, loc.value[id]);
    CHECK(patched.value[id] == doctest::Approx(expect).epsilon(1e-15));
  }

  const auto s1 = check_S1(g, patched);
  CHECK_FALSE(s1.vacuous);
  CHECK(s1.min_sum >= 1.0 - 1e-9);

  // disjoint locals: the union of supports survives patching
  if (locals.size() >= 2) {
    SigmaFunction a = locals.front(), b = locals.back();
    const auto united = patch_sigma(g, std::vector<SigmaFunction>{a, b});
    for (int id : a.support)
      CHECK(united.value[id] >= a.value[id] - 1e-15);
    for (int id : b.support)
      CHECK(united.value[id] >= b.value[id] - 1e-15);
  }
}

TEST_CASE("synthesize_weight on a vacuous-crossing filling: full pipeline green") {
  // a=6 on the half-interval: every 2B covers the space, so sigma = 0
  // satisfies (S1) vacuously and the normalization machinery runs alone
  auto g = grid_filling(65, 6.0, 3.0, 2);
  auto gentle = gentle_capacity_function(g, counting_ball_masses(g), 2.0);
  REQUIRE(gentle.E_holds);

  SigmaFunction zero;
  zero.value.assign(g.size(), 0.0);

  const auto res = synthesize_weight(g, gentle, zero, 2.5);
  CHECK(res.sf4_residual <= 1e-10);

  const auto h1 = check_H1(res.weight);
  CHECK(h1.pass);
  CHECK(h1.eta_minus >= res.eta_minus - 1e-15);

  const double K0 = check_H2(g, res.weight);
  CHECK(K0 <= std::pow(res.eta_minus, -3.0) * (1 + 1e-9));

  CHECK(check_H3prime(g, res.weight).pass());

  const double K2 = compatibility_check(g, res.weight, gentle, 2.5);
  CHECK(K2 <= 1 + 1e-8);

  // e:sf4 verified by direct summation per parent
  for (int k = 0; k < g.max_level(); ++k) {
    const auto [b, e] = g.level_range(k);
    for (int B = b; B < e; ++B) {
      double s = 0;
      for (int c : g.children(B)) s += std::pow(res.weight.rho[c], 2.5) * gentle.C[c];
      CHECK(s == doctest::Approx(gentle.C[B]).epsilon(1e-9));
    }
  }

  // the induced measure conserves level mass and stays positive
  const auto meas = measure_from_weights(g, res.weight, gentle, 2.5);
  CHECK(meas.worst_level_drift <= 1e-8);
  for (const auto& lm : meas.levels)
    for (double m : lm.masses) CHECK(m > 0);
}

TEST_CASE("synthesize_weight rejects sigma out of range and S1 violations") {
  auto g = grid_filling(129, 9.0, 3.0, 2);
  auto gentle = gentle_capacity_function(g, counting_ball_masses(g), 2.0);

  SigmaFunction big;
  big.value.assign(g.size(), 0.0);
  big.value[g.level_range(2).first] = 0.3;
  CHECK_THROWS_AS(synthesize_weight(g, gentle, big, 2.5), error);
  try {
    synthesize_weight(g, gentle, big, 2.5);
  } catch (const error& e) {
    CHECK(e.code() == errc::sigma_out_of_range);
  }

  // zero sigma on a filling with real crossings violates (S1)
  SigmaFunction zero;
  zero.value.assign(g.size(), 0.0);
  try {
    synthesize_weight(g, gentle, zero, 2.5);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::s1_violated);
  }
}

TEST_CASE("compatibility check: balance breaks under a single perturbation") {
  auto g = grid_filling(65, 6.0, 3.0, 2);
  auto gentle = gentle_capacity_function(g, counting_ball_masses(g), 2.0);
  SigmaFunction zero;
  zero.value.assign(g.size(), 0.0);
  auto res = synthesize_weight(g, gentle, zero, 2.0);
  CHECK(compatibility_check(g, res.weight, gentle, 2.0) <= 1 + 1e-8);

  auto rho = res.weight.rho;
  rho[g.level_range(1).first] *= 0.9;
  const double K2 = compatibility_check(g, make_weight(g, rho), gentle, 2.0);
  CHECK(K2 > 1 + 1e-6);

  // and the measure drift detector fires
  CHECK_THROWS_AS(measure_from_weights(g, make_weight(g, rho), gentle, 2.0), error);
}

TEST_CASE("ball_mass sums the deepest-level atoms") {
  auto g = grid_filling(65, 6.0, 3.0, 2);
  auto gentle = gentle_capacity_function(g, counting_ball_masses(g), 2.0);
  SigmaFunction zero;
  zero.value.assign(g.size(), 0.0);
  auto res = synthesize_weight(g, gentle, zero, 2.0);
  const auto meas = measure_from_weights(g, res.weight, gentle, 2.0);
  const double whole = ball_mass(g, meas, 0, 10.0);
  CHECK(whole == doctest::Approx(meas.levels.back().total).epsilon(1e-12));
  CHECK(ball_mass(g, meas, 0, 1e-9) < whole);
}
