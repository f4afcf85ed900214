#include <cmath>

#include "cwd/graph_form.hpp"
#include "doctest.h"

using namespace cwd;

namespace {

// path graph on n+1 vertices, every edge with the given conductance
GraphForm path_graph(int n, double c) {
  std::vector<GraphForm::Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, i + 1, c});
  return GraphForm(n + 1, std::move(edges), {});
}

}  // namespace

TEST_CASE("unit path: n series edges of conductance n give capacity 1") {
  const int n = 17;
  auto g = path_graph(n, static_cast<double>(n));
  auto cap = capacity(g, {0}, {n});
  CHECK(cap.value == doctest::Approx(1.0).epsilon(1e-10));
  // equilibrium potential is affine and obeys the maximum principle
  for (int i = 0; i <= n; ++i) {
    CHECK(cap.potential[i] >= -1e-12);
    CHECK(cap.potential[i] <= 1 + 1e-12);
    CHECK(cap.potential[i] == doctest::Approx(1.0 - static_cast<double>(i) / n).epsilon(1e-9));
  }
}

TEST_CASE("single bridging edge dominates the capacity") {
  // A -- c -- B plus a long detour of tiny conductance
  std::vector<GraphForm::Edge> edges = {{0, 1, 2.5}};
  for (int i = 1; i < 6; ++i) edges.push_back({i, i + 1, 1e-9});
  edges.push_back({0, 6, 1e-9});
  GraphForm g(7, std::move(edges), {});
  auto cap = capacity(g, {0}, {1});
  CHECK(cap.value == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("capacity of overlapping sets raises, disconnected returns 0 with flag") {
  auto g = path_graph(3, 1.0);
  CHECK_THROWS_AS(capacity(g, {0, 1}, {1, 3}), error);

  GraphForm split(4, {{0, 1, 1.0}, {2, 3, 1.0}}, {});
  auto cap = capacity(split, {0}, {3});
  CHECK(cap.disconnected);
  CHECK(cap.value == 0.0);
}

TEST_CASE("capacity monotone in both arguments") {
  auto g = path_graph(10, 1.0);
  const double base = capacity(g, {3}, {7}).value;
  CHECK(capacity(g, {3}, {7, 8}).value >= base - 1e-12);
  CHECK(capacity(g, {2, 3}, {7}).value >= base - 1e-12);
}

TEST_CASE("series and parallel resistance oracles") {
  // series: resistances add
  auto g = path_graph(4, 2.0);  // each edge resistance 1/2
  CHECK(effective_resistance(g, 0, 4) == doctest::Approx(2.0).epsilon(1e-10));

  // parallel: two disjoint 2-edge chains between the ends
  GraphForm p(6, {{0, 2, 1.0}, {2, 1, 1.0}, {0, 3, 1.0}, {3, 1, 1.0}, {4, 5, 1.0}, {4, 0, 1.0}},
              {});
  // chains 0-2-1 and 0-3-1, each resistance 2, in parallel -> 1
  CHECK(effective_resistance(p, 0, 1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("resistance matrix agrees with pairwise solves") {
  GraphForm g(5, {{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 1.0}, {3, 4, 0.5}, {0, 4, 1.0}, {1, 3, 1.0}},
              {});
  const auto R = resistance_matrix(g);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      CHECK(R(i, j) == doctest::Approx(effective_resistance(g, i, j)).epsilon(1e-9));
}

TEST_CASE("bad graphs are rejected") {
  CHECK_THROWS_AS(GraphForm(2, {{0, 0, 1.0}}, {}), error);
  CHECK_THROWS_AS(GraphForm(2, {{0, 1, -1.0}}, {}), error);
  CHECK_THROWS_AS(GraphForm(2, {{0, 1, 1.0}}, {1.0, 0.0}), error);
}
