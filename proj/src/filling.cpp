#include "cwd/filling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace cwd {

bool FillingGraph::non_peripheral(int id) const {
  const int p = parent_[id];
  for (int nb : hnbrs_[id])
    if (parent_[nb] != p) return false;
  return true;
}

int FillingGraph::measured_Dh() const {
  std::size_t best = 0;
  for (const auto& nbrs : hnbrs_) best = std::max(best, nbrs.size() + 1);
  return static_cast<int>(best);
}

int FillingGraph::measured_Dv() const {
  std::size_t best = 1;
  for (const auto& ch : children_) best = std::max(best, ch.size());
  return static_cast<int>(best);
}

FillingGraph build_filling(const FiniteMetricSpace& space, const NetHierarchy& nets, double lambda,
                           bool strict) {
  if (!(lambda >= 3)) raise(errc::param_error, "horizontal parameter must be >= 3");
  if (nets.levels.empty()) raise(errc::param_error, "empty net hierarchy");
  if (nets.levels[0].size() != 1)
    raise(errc::param_error,
          "level-0 net is not a singleton; rescale the space to diameter 1/2 first");

  FillingGraph g;
  g.space_ = std::make_shared<FiniteMetricSpace>(space);
  g.params_.a = nets.base_scale;
  g.params_.lambda = lambda;
  g.params_.strict = strict;
  g.params_.K_P = std::numeric_limits<double>::quiet_NaN();
  if (strict) {
    g.params_.K_P = uniform_perfectness_estimate(space);
    if (!(lambda >= 32 && nets.base_scale >= 24 * std::max(lambda, g.params_.K_P)))
      raise(errc::param_error, "strict mode requires lambda >= 32 and a >= 24 (lambda v K_P)");
  }

  const int L = nets.max_level();
  g.offsets_.assign(1, 0);
  for (int k = 0; k <= L; ++k) {
    for (int p : nets.levels[k]) {
      g.verts_.push_back({k, p});
      g.radii_.push_back(2.0 * std::pow(nets.base_scale, -k));
    }
    g.offsets_.push_back(static_cast<int>(g.verts_.size()));
  }

  const int n = g.size();
  g.hnbrs_.resize(n);
  g.parent_.assign(n, -1);
  g.children_.resize(n);

  // horizontal edges: d(x_B, x_B') < lambda (r_B + r_B')
  for (int k = 0; k <= L; ++k) {
    const auto [b, e] = g.level_range(k);
    const double thresh = lambda * 4.0 * std::pow(nets.base_scale, -k);
    for (int i = b; i < e; ++i)
      for (int j = i + 1; j < e; ++j)
        if (g.center_dist(i, j) < thresh) {
          g.hnbrs_[i].push_back(j);
          g.hnbrs_[j].push_back(i);
        }
  }

  // vertical edges from the predecessor map; levels keep the net scan order,
  // so point -> id lookups stay within one level
  for (int k = 1; k <= L; ++k) {
    const auto [bk, ek] = g.level_range(k);
    const auto [bp, ep] = g.level_range(k - 1);
    std::vector<int> point_to_id;
    point_to_id.assign(space.size(), -1);
    for (int j = bp; j < ep; ++j) point_to_id[g.verts_[j].point] = j;
    for (int i = bk; i < ek; ++i) {
      const int pid = point_to_id[nets.predecessor[k][i - bk]];
      if (pid < 0) raise(errc::invariant_error, "predecessor missing from coarser level");
      g.parent_[i] = pid;
      g.children_[pid].push_back(i);
    }
  }
  return g;
}

WeightFunction make_weight(const FillingGraph& g, std::vector<double> rho) {
  if (static_cast<int>(rho.size()) != g.size())
    raise(errc::param_error, "weight size != vertex count");
  for (double v : rho)
    if (!(v > 0 && v < 1)) raise(errc::param_error, "weights must lie in (0,1)");
  WeightFunction w;
  w.rho = std::move(rho);
  w.log_pi.resize(w.rho.size());
  for (int id = 0; id < g.size(); ++id) {
    const int p = g.parent(id);
    w.log_pi[id] = (p < 0 ? 0.0 : w.log_pi[p]) + std::log(w.rho[id]);
  }
  return w;
}

H1Result check_H1(const WeightFunction& w) {
  H1Result r;
  r.eta_minus = *std::min_element(w.rho.begin(), w.rho.end());
  r.eta_plus = *std::max_element(w.rho.begin(), w.rho.end());
  r.pass = r.eta_minus > 0 && r.eta_plus < 1;
  return r;
}

double check_H2(const FillingGraph& g, const WeightFunction& w) {
  double worst = 0;  // in log space
  for (int id = 0; id < g.size(); ++id)
    for (int nb : g.horizontal_neighbors(id))
      worst = std::max(worst, std::abs(w.log_pi[id] - w.log_pi[nb]));
  return std::exp(worst);
}

double crossing_min_cost(const FillingGraph& g, int B,
                         const std::function<double(int, int)>& edge_cost,
                         const std::function<double(int)>& node_cost) {
  const int k = g.vertex(B).level;
  if (k + 1 > g.max_level()) return std::numeric_limits<double>::infinity();
  const double rB = g.radius(B);
  const auto [b, e] = g.level_range(k + 1);

  std::vector<double> dist(e - b, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (int v = b; v < e; ++v)
    if (g.center_dist(v, B) < rB) {
      const double d0 = node_cost(v);
      if (d0 < dist[v - b]) {
        dist[v - b] = d0;
        heap.push({d0, v});
      }
    }
  double best = std::numeric_limits<double>::infinity();
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v - b]) continue;
    if (g.center_dist(v, B) >= 2 * rB) {  // crossed out of 2B: a valid endpoint
      best = std::min(best, d);
      continue;
    }
    for (int u : g.horizontal_neighbors(v)) {
      const double nd = d + edge_cost(v, u) + node_cost(u);
      if (nd < dist[u - b]) {
        dist[u - b] = nd;
        heap.push({nd, u});
      }
    }
  }
  return best;
}

H3Result check_H3prime(const FillingGraph& g, const WeightFunction& w) {
  // rho*(B) = min over the horizontal neighborhood (incl. B) of rho
  std::vector<double> rho_star(g.size());
  for (int id = 0; id < g.size(); ++id) {
    double m = w.rho[id];
    for (int nb : g.horizontal_neighbors(id)) m = std::min(m, w.rho[nb]);
    rho_star[id] = m;
  }

  H3Result out;
  out.min_cost = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int k = 1; k < g.max_level(); ++k) {
    const auto [b, e] = g.level_range(k);
    for (int B = b; B < e; ++B) {
      const double c = crossing_min_cost(
          g, B, [&](int u, int v) { return std::min(rho_star[u], rho_star[v]); },
          [](int) { return 0.0; });
      if (std::isfinite(c)) {
        any = true;
        if (c < out.min_cost) {
          out.min_cost = c;
          out.worst_parent = B;
        }
      }
    }
  }
  out.vacuous = !any;
  return out;
}

std::vector<ThetaEstimate> boundary_metric_estimate(
    const FillingGraph& g, const WeightFunction& w, double alpha,
    const std::vector<std::pair<int, int>>& pairs) {
  if (!(alpha >= 2 && alpha <= g.params().lambda / 4))
    raise(errc::param_error, "alpha must lie in [2, lambda/4]");
  std::vector<ThetaEstimate> out;
  out.reserve(pairs.size());
  const auto& space = g.space();
  for (const auto& [x, y] : pairs) {
    ThetaEstimate est;
    // deepest level where some alpha-inflated ball holds both points
    for (int k = g.max_level(); k >= 0 && est.level < 0; --k) {
      const auto [b, e] = g.level_range(k);
      double best = -std::numeric_limits<double>::infinity();
      bool found = false;
      for (int v = b; v < e; ++v) {
        const double ar = alpha * g.radius(v);
        const int c = g.vertex(v).point;
        if (space.dist(c, x) < ar && space.dist(c, y) < ar) {
          best = std::max(best, w.log_pi[v]);
          found = true;
        }
      }
      if (found) {
        est.level = k;
        est.value = std::exp(best);
      }
    }
    if (est.level < 0) raise(errc::invariant_error, "no common vertex even at the root level");
    est.unseparated = (est.level == g.max_level());
    out.push_back(est);
  }
  return out;
}

double filling_metric_Drho(const FillingGraph& g, const WeightFunction& w, int v1, int v2) {
  const auto h1 = check_H1(w);
  const double K0 = check_H2(g, w);
  const double hlen =
      2.0 * std::max({-std::log(h1.eta_plus), -std::log(h1.eta_minus), std::log(K0)});

  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[v1] = 0;
  heap.push({0.0, v1});
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    if (v == v2) return d;
    auto relax = [&](int u, double len) {
      if (d + len < dist[u]) {
        dist[u] = d + len;
        heap.push({d + len, u});
      }
    };
    for (int u : g.horizontal_neighbors(v)) relax(u, hlen);
    if (g.parent(v) >= 0) relax(g.parent(v), std::abs(w.log_pi[v] - w.log_pi[g.parent(v)]));
    for (int u : g.children(v)) relax(u, std::abs(w.log_pi[v] - w.log_pi[u]));
  }
  raise(errc::disconnected, "no path between the vertices");
}

GentleFunction gentle_capacity_function(const FillingGraph& g,
                                        const std::vector<double>& ball_masses, double gamma) {
  if (static_cast<int>(ball_masses.size()) != g.size())
    raise(errc::param_error, "mass vector size != vertex count");
  GentleFunction out;
  out.C.resize(g.size());
  for (int id = 0; id < g.size(); ++id) {
    if (!(ball_masses[id] > 0)) raise(errc::mass_error, "ball mass must be positive");
    out.C[id] = ball_masses[id] / std::pow(g.radius(id), gamma);
  }
  for (int id = 0; id < g.size(); ++id) {
    for (int nb : g.horizontal_neighbors(id))
      out.K_h = std::max(out.K_h, out.C[id] / out.C[nb]);
    if (g.parent(id) >= 0) {
      const double r = out.C[id] / out.C[g.parent(id)];
      out.K_v = std::max({out.K_v, r, 1.0 / r});
    }
  }
  // enhanced subadditivity margin over parents with children
  double worst = 0;
  bool applicable = false;
  for (int id = 0; id < g.size(); ++id) {
    if (g.children(id).empty()) continue;
    applicable = true;
    double s = 0;
    for (int c : g.children(id))
      if (g.non_peripheral(c)) s += out.C[c];
    worst = std::max(worst, s > 0 ? out.C[id] / s : std::numeric_limits<double>::infinity());
  }
  out.E_holds = applicable && worst < 1;
  out.E_delta = out.E_holds ? 1 - worst : 0;
  return out;
}

std::vector<double> counting_ball_masses(const FillingGraph& g) {
  const auto& space = g.space();
  std::vector<double> m(g.size(), 0.0);
  for (int id = 0; id < g.size(); ++id) {
    const int c = g.vertex(id).point;
    int cnt = 0;
    for (int p = 0; p < space.size(); ++p)
      if (space.dist(c, p) < g.radius(id)) ++cnt;
    m[id] = static_cast<double>(cnt) / space.size();
  }
  return m;
}

}  // namespace cwd
