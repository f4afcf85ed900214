#include "cwd/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cwd {

double SigmaFunction::max_value() const {
  double m = 0;
  for (double v : value) m = std::max(m, v);
  return m;
}

GraphForm level_form(const FillingGraph& g, int level, const GentleFunction& gentle) {
  const auto [b, e] = g.level_range(level);
  std::vector<GraphForm::Edge> edges;
  std::vector<double> measure(e - b);
  for (int v = b; v < e; ++v) {
    measure[v - b] = gentle.C[v];
    for (int u : g.horizontal_neighbors(v))
      if (u > v) edges.push_back({v - b, u - b, std::min(gentle.C[v], gentle.C[u])});
  }
  return GraphForm(e - b, std::move(edges), std::move(measure));
}

SigmaFunction discrete_gradient_sigma(const FillingGraph& g, const GraphForm& form,
                                      const GentleFunction& gentle, int B) {
  const int k = g.vertex(B).level;
  if (k + 1 > g.max_level()) raise(errc::param_error, "parent at the deepest level");
  const auto [b, e] = g.level_range(k + 1);
  if (form.size() != e - b) raise(errc::param_error, "form does not match level k+1");
  const double rB = g.radius(B);

  SigmaFunction sig;
  sig.parent = B;
  sig.value.assign(g.size(), 0.0);

  std::vector<int> boundary;
  std::vector<double> bvals;
  bool exterior = false;
  for (int v = b; v < e; ++v) {
    const double d = g.center_dist(v, B);
    if (d < 1.1 * rB) {
      boundary.push_back(v - b);
      bvals.push_back(1.0);
    } else if (d >= 1.9 * rB) {
      boundary.push_back(v - b);
      bvals.push_back(0.0);
      exterior = true;
    }
  }
  if (!exterior) {
    sig.vacuous = true;  // Gamma_{k+1}(B) is empty, nothing to cut
    return sig;
  }

  const Eigen::VectorXd u = form.dirichlet_solve(boundary, bvals);

  // discrete gradient, then restrict to the locality set V_B = {B' : B' meets 3B}
  for (int v = b; v < e; ++v) {
    if (!(g.center_dist(v, B) < g.radius(v) + 3 * rB)) continue;
    double s = 0;
    for (int nb : g.horizontal_neighbors(v)) s += std::abs(u[nb - b] - u[v - b]);
    sig.value[v] = s;
    if (s > 0) sig.support.push_back(v);
  }

  double energy = 0;
  for (int v = b; v < e; ++v) energy += sig.value[v] * sig.value[v] * gentle.C[v];
  sig.energy_ratio = energy / gentle.C[B];
  return sig;
}

SigmaFunction patch_sigma(const FillingGraph& g, std::span<const SigmaFunction> locals) {
  SigmaFunction out;
  out.value.assign(g.size(), 0.0);
  for (const auto& loc : locals) {
    if (static_cast<int>(loc.value.size()) != g.size())
      raise(errc::param_error, "local sigma has wrong size");
    if (loc.parent >= 0 && g.vertex(loc.parent).level < 1) continue;  // sigma = 0 on S_0, S_1
    for (int id = 0; id < g.size(); ++id) out.value[id] = std::max(out.value[id], loc.value[id]);
  }
  // levels 0 and 1 carry no sigma by construction
  const int zero_end = g.level_range(std::min(1, g.max_level())).second;
  for (int id = 0; id < zero_end; ++id) out.value[id] = 0;
  for (int id = 0; id < g.size(); ++id)
    if (out.value[id] > 0) out.support.push_back(id);
  return out;
}

S1Result check_S1(const FillingGraph& g, const SigmaFunction& sigma) {
  S1Result out;
  out.min_sum = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int k = 1; k < g.max_level(); ++k) {
    const auto [b, e] = g.level_range(k);
    for (int B = b; B < e; ++B) {
      const double c = crossing_min_cost(
          g, B, [](int, int) { return 0.0; }, [&](int v) { return sigma.value[v]; });
      if (std::isfinite(c)) {
        any = true;
        if (c < out.min_sum) {
          out.min_sum = c;
          out.worst_parent = B;
        }
      }
    }
  }
  out.vacuous = !any;
  return out;
}

SynthesisResult synthesize_weight(const FillingGraph& g, const GentleFunction& gentle,
                                  const SigmaFunction& sigma, double beta) {
  if (!(beta > 0)) raise(errc::param_error, "beta must be positive");
  if (!sigma.in_range())
    raise(errc::sigma_out_of_range,
          "sigma must map into [0, 1/4); max value " + std::to_string(sigma.max_value()));
  if (!gentle.E_holds)
    raise(errc::e_violated, "capacity function violates enhanced subadditivity (E)");

  const auto s1 = check_S1(g, sigma);
  if (!s1.pass())
    raise(errc::s1_violated,
          "crossing-path sums fall below 1 (min " + std::to_string(s1.min_sum) + ")");

  SynthesisResult res;
  res.K_h = gentle.K_h;
  res.K_v = gentle.K_v;
  res.D_h = g.measured_Dh();
  res.D_v = g.measured_Dv();
  // 2^{beta+1} K_h^3 D_h^3 eta0 = 1/2
  res.eta0 = 0.5 / (std::pow(2.0, beta + 1) * std::pow(res.K_h, 3) *
                    std::pow(static_cast<double>(res.D_h), 3));

  // (S2) with this eta0
  for (int id = 0; id < g.size(); ++id) {
    if (g.children(id).empty()) continue;
    double s = 0;
    for (int c : g.children(id)) s += std::pow(sigma.value[c], beta) * gentle.C[c];
    res.s2_worst = std::max(res.s2_worst, s / gentle.C[id]);
  }
  if (res.s2_worst > res.eta0)
    raise(errc::s2_violated, "sum sigma^beta C exceeds eta0 C(B): worst " +
                                 std::to_string(res.s2_worst) + " vs eta0 " +
                                 std::to_string(res.eta0));

  res.eta_minus =
      std::min(std::pow(res.eta0 / (res.K_v * res.D_v), 1.0 / beta), 0.25);

  // tau = sigma v eta-, then tilde tau = 2 max over the radius-2 horizontal
  // neighborhood
  std::vector<double> tau(g.size());
  for (int id = 0; id < g.size(); ++id) tau[id] = std::max(sigma.value[id], res.eta_minus);
  std::vector<double> tt(g.size());
  for (int id = 0; id < g.size(); ++id) {
    double m = tau[id];
    for (int nb : g.horizontal_neighbors(id)) {
      m = std::max(m, tau[nb]);
      for (int nb2 : g.horizontal_neighbors(nb)) m = std::max(m, tau[nb2]);
    }
    tt[id] = 2 * m;
  }

  // level-by-level correction: pi1 = tilde-tau * pi0(parent), smoothed so
  // adjacent products stay within K = 1/eta-
  std::vector<double> log_pi(g.size(), 0.0);
  std::vector<double> rho_hat(g.size(), 0.0);
  rho_hat[g.root()] = 0.5;
  log_pi[g.root()] = std::log(0.5);
  const double K = 1.0 / res.eta_minus;
  for (int k = 1; k <= g.max_level(); ++k) {
    const auto [b, e] = g.level_range(k);
    std::vector<double> log_pi1(e - b);
    for (int v = b; v < e; ++v) log_pi1[v - b] = std::log(tt[v]) + log_pi[g.parent(v)];
    for (int v = b; v < e; ++v) {
      double m = log_pi1[v - b];
      for (int nb : g.horizontal_neighbors(v))
        m = std::max(m, log_pi1[nb - b] - std::log(K));
      log_pi[v] = m;
      rho_hat[v] = std::exp(log_pi[v] - log_pi[g.parent(v)]);
    }
  }

  // per-parent normalization sum rho^beta C = C(B) by monotone bisection in
  // omega, applied on non-peripheral children only
  std::vector<double> rho = rho_hat;
  res.omega.assign(g.size(), 0.0);
  for (int k = 0; k < g.max_level(); ++k) {
    const auto [b, e] = g.level_range(k);
    for (int B = b; B < e; ++B) {
      const auto& kids = g.children(B);
      if (kids.empty()) continue;
      bool has_np = false;
      for (int c : kids)
        if (g.non_peripheral(c)) has_np = true;
      if (!has_np)
        raise(errc::no_nonperipheral_child,
              "vertex has no non-peripheral child, (E) cannot hold");

      auto total = [&](double omega) {
        double s = 0;
        for (int c : kids) {
          const double r = g.non_peripheral(c) ? std::max(omega, rho_hat[c]) : rho_hat[c];
          s += std::pow(r, beta) * gentle.C[c];
        }
        return s;
      };
      const double target = gentle.C[B];
      double lo = 0, hi = 1;
      if (total(0) > target * (1 + 1e-10))
        raise(errc::s2_violated, "normalization impossible: children already exceed the parent");
      if (total(1) < target)
        raise(errc::e_violated, "normalization impossible: (E) margin too small");
      for (int it = 0; it < 200 && (hi - lo) > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) < target ? lo : hi) = mid;
      }
      const double omega = 0.5 * (lo + hi);
      res.omega[B] = omega;
      for (int c : kids)
        if (g.non_peripheral(c)) rho[c] = std::max(omega, rho_hat[c]);
      res.sf4_residual =
          std::max(res.sf4_residual, std::abs(total(omega) - target) / target);
    }
  }

  // guard the open interval (0,1): bisection can push rho to 1 only if (E)
  // margins vanish, which e_violated above already excludes
  for (double& v : rho) v = std::min(v, 1.0 - 1e-15);
  res.weight = make_weight(g, std::move(rho));
  return res;
}

MeasureResult measure_from_weights(const FillingGraph& g, const WeightFunction& w,
                                   const GentleFunction& gentle, double beta, double drift_tol) {
  MeasureResult out;
  out.levels.resize(g.max_level() + 1);
  for (int k = 0; k <= g.max_level(); ++k) {
    const auto [b, e] = g.level_range(k);
    auto& lm = out.levels[k];
    lm.level = k;
    lm.masses.resize(e - b);
    for (int v = b; v < e; ++v) {
      lm.masses[v - b] = std::exp(beta * w.log_pi[v]) * gentle.C[v];
      lm.total += lm.masses[v - b];
    }
  }
  for (int k = 0; k < g.max_level(); ++k) {
    const double drift = std::abs(out.levels[k + 1].total / out.levels[k].total - 1.0);
    out.worst_level_drift = std::max(out.worst_level_drift, drift);
  }
  if (out.worst_level_drift > drift_tol)
    raise(errc::compatibility_drift, "level mass drift " + std::to_string(out.worst_level_drift));
  return out;
}

double ball_mass(const FillingGraph& g, const MeasureResult& m, int point, double r) {
  const int L = g.max_level();
  const auto [b, e] = g.level_range(L);
  double acc = 0;
  for (int v = b; v < e; ++v)
    if (g.space().dist(g.vertex(v).point, point) < r) acc += m.levels[L].masses[v - b];
  return acc;
}

double compatibility_check(const FillingGraph& g, const WeightFunction& w,
                           const GentleFunction& gentle, double beta) {
  const int L = g.max_level();
  std::vector<double> value(g.size());
  for (int id = 0; id < g.size(); ++id)
    value[id] = std::exp(beta * w.log_pi[id]) * gentle.C[id];

  double worst = 1.0;
  for (int n = 1; n <= L; ++n) {
    // fold the generation-n values up the tree, comparing at every ancestor
    std::vector<double> sum(g.size(), 0.0);
    const auto [b, e] = g.level_range(n);
    for (int v = b; v < e; ++v) sum[v] = value[v];
    for (int k = n - 1; k >= 0; --k) {
      const auto [cb, ce] = g.level_range(k + 1);
      for (int v = cb; v < ce; ++v) sum[g.parent(v)] += sum[v];
      const auto [pb, pe] = g.level_range(k);
      for (int B = pb; B < pe; ++B) {
        const double ratio = sum[B] / value[B];
        worst = std::max({worst, ratio, 1.0 / ratio});
      }
    }
  }
  return worst;
}

}  // namespace cwd
