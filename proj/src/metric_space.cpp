#include "cwd/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>

namespace cwd {

FiniteMetricSpace FiniteMetricSpace::from_points(std::vector<std::string> ids,
                                                 std::vector<std::vector<double>> coords) {
  if (ids.empty()) raise(errc::empty_space, "no points");
  if (ids.size() != coords.size()) raise(errc::invariant_error, "ids/coords size mismatch");
  const int n = static_cast<int>(ids.size());
  const std::size_t dim = coords.front().size();
  for (const auto& c : coords)
    if (c.size() != dim) raise(errc::invariant_error, "inconsistent coordinate dimension");

  FiniteMetricSpace s;
  s.ids_ = std::move(ids);
  s.coords_ = std::move(coords);
  s.dist_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    s.dist_(i, i) = 0;
    for (int j = i + 1; j < n; ++j) {
      double acc = 0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = s.coords_[i][d] - s.coords_[j][d];
        acc += diff * diff;
      }
      const double dij = std::sqrt(acc);
      s.dist_(i, j) = dij;
      s.dist_(j, i) = dij;
    }
  }
  return s;
}

FiniteMetricSpace FiniteMetricSpace::from_distance_matrix(std::vector<std::string> ids,
                                                          Eigen::MatrixXd dist, bool validate) {
  if (ids.empty()) raise(errc::empty_space, "no points");
  if (dist.rows() != dist.cols() || dist.rows() != static_cast<Eigen::Index>(ids.size()))
    raise(errc::invariant_error, "distance matrix shape does not match id count");
  FiniteMetricSpace s;
  s.ids_ = std::move(ids);
  s.dist_ = std::move(dist);
  if (validate) s.validate_metric();
  return s;
}

double FiniteMetricSpace::diameter() const { return dist_.maxCoeff(); }

FiniteMetricSpace FiniteMetricSpace::scaled_to_diameter(double target) const {
  const double diam = diameter();
  if (diam <= 0) raise(errc::degenerate, "all points coincide, cannot rescale");
  FiniteMetricSpace s = *this;
  const double f = target / diam;
  s.dist_ *= f;
  for (auto& c : s.coords_)
    for (auto& v : c) v *= f;
  return s;
}

void FiniteMetricSpace::validate_metric(std::uint64_t seed) const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    if (dist_(i, i) != 0)
      raise(errc::invariant_error, "nonzero diagonal at (" + ids_[i] + "," + ids_[i] + ")");
    for (int j = i + 1; j < n; ++j) {
      if (dist_(i, j) != dist_(j, i))
        raise(errc::invariant_error, "asymmetric entry (" + ids_[i] + "," + ids_[j] + ")");
      if (!(dist_(i, j) > 0))
        raise(errc::invariant_error, "non-positive distance (" + ids_[i] + "," + ids_[j] + ")");
    }
  }
  const double slack = 1e-12 * std::max(1.0, diameter());
  auto check_triple = [&](int i, int j, int k) {
    if (dist_(i, j) > dist_(i, k) + dist_(k, j) + slack)
      raise(errc::invariant_error, "triangle inequality fails for (" + ids_[i] + "," + ids_[j] +
                                       "," + ids_[k] + ")");
  };
  if (n <= 150) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) check_triple(i, j, k);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int s = 0; s < 200000; ++s) check_triple(pick(rng), pick(rng), pick(rng));
  }
}

double NetHierarchy::separation(int level) const { return std::pow(base_scale, -level); }

void NetHierarchy::check_invariants(const FiniteMetricSpace& space) const {
  for (int k = 0; k <= max_level(); ++k) {
    const double eps = separation(k);
    const auto& net = levels[k];
    for (std::size_t i = 0; i < net.size(); ++i)
      for (std::size_t j = i + 1; j < net.size(); ++j)
        if (space.dist(net[i], net[j]) < eps) raise(errc::invariant_error, "net not separated");
    // maximality
    for (int p = 0; p < space.size(); ++p) {
      bool near = false;
      for (int q : net)
        if (space.dist(p, q) < eps) {
          near = true;
          break;
        }
      if (!near) raise(errc::invariant_error, "net not maximal");
    }
    if (k >= 1) {
      std::unordered_set<int> prev(levels[k - 1].begin(), levels[k - 1].end());
      for (std::size_t i = 0; i < net.size(); ++i) {
        if (i < levels[k - 1].size() && net[i] != levels[k - 1][i])
          raise(errc::invariant_error, "net nesting broken");
        int pred = predecessor[k][i];
        if (!prev.count(pred)) raise(errc::invariant_error, "predecessor not in coarser net");
        for (int q : levels[k - 1])
          if (space.dist(net[i], q) < space.dist(net[i], pred) - 1e-15)
            raise(errc::invariant_error, "predecessor not a closest coarse point");
      }
    }
  }
}

NetHierarchy build_net_hierarchy(const FiniteMetricSpace& space, double a, int max_level) {
  if (space.size() == 0) raise(errc::empty_space, "no points");
  if (!(a > 1)) raise(errc::scale_error, "base scale must exceed 1");
  if (max_level < 0) raise(errc::param_error, "max_level must be >= 0");

  NetHierarchy h;
  h.base_scale = a;
  h.levels.resize(max_level + 1);
  h.predecessor.resize(max_level + 1);

  const int n = space.size();
  for (int k = 0; k <= max_level; ++k) {
    const double eps = std::pow(a, -k);
    std::vector<int>& net = h.levels[k];
    // seed with the coarser net (preserves nesting), then greedy in id order
    if (k > 0) net = h.levels[k - 1];
    for (int p = 0; p < n; ++p) {
      bool ok = true;
      for (int q : net)
        if (space.dist(p, q) < eps) {
          ok = false;
          break;
        }
      if (ok) net.push_back(p);
    }
    if (k > 0) {
      const auto& coarse = h.levels[k - 1];
      auto& pred = h.predecessor[k];
      pred.resize(net.size());
      for (std::size_t i = 0; i < net.size(); ++i) {
        int best = coarse.front();
        double bestd = space.dist(net[i], best);
        for (int q : coarse) {
          const double d = space.dist(net[i], q);
          if (d < bestd) {  // ties keep the earlier id
            bestd = d;
            best = q;
          }
        }
        pred[i] = best;
      }
    }
  }
  return h;
}

double doubling_constant_estimate(const FiniteMetricSpace& space, const std::vector<double>& radii,
                                  int max_centers, std::uint64_t seed) {
  if (space.size() == 0) raise(errc::empty_space, "no points");
  if (radii.empty()) raise(errc::param_error, "radii must be nonempty");
  for (double r : radii)
    if (!(r > 0)) raise(errc::param_error, "radii must be positive");

  const int n = space.size();
  std::vector<int> centers(n);
  for (int i = 0; i < n; ++i) centers[i] = i;
  if (n > max_centers) {
    std::mt19937_64 rng(seed);
    std::shuffle(centers.begin(), centers.end(), rng);
    centers.resize(max_centers);
    std::sort(centers.begin(), centers.end());
  }

  double worst = 1;
  std::vector<int> ball;
  for (int x : centers) {
    for (double r : radii) {
      ball.clear();
      for (int p = 0; p < n; ++p)
        if (space.dist(x, p) < r) ball.push_back(p);
      if (ball.empty()) continue;
      // greedy max-coverage: repeatedly pick the center (any point of the
      // space) covering the most uncovered ball points, id order on ties
      std::vector<char> covered(ball.size(), 0);
      std::size_t left = ball.size();
      int count = 0;
      while (left > 0) {
        int best = -1;
        std::size_t best_gain = 0;
        for (int c = 0; c < n; ++c) {
          std::size_t gain = 0;
          for (std::size_t i = 0; i < ball.size(); ++i)
            if (!covered[i] && space.dist(c, ball[i]) < r / 2) ++gain;
          if (gain > best_gain) {
            best_gain = gain;
            best = c;
          }
        }
        for (std::size_t i = 0; i < ball.size(); ++i)
          if (!covered[i] && space.dist(best, ball[i]) < r / 2) {
            covered[i] = 1;
            --left;
          }
        ++count;
      }
      worst = std::max(worst, static_cast<double>(count));
    }
  }
  return worst;
}

double uniform_perfectness_estimate(const FiniteMetricSpace& space) {
  const int n = space.size();
  if (n < 2) raise(errc::param_error, "need at least two points");
  if (space.diameter() <= 0) raise(errc::degenerate, "all points coincide");

  // For fixed x the constraint "B(x,r) \ B(x,r/K) nonempty whenever the
  // complement is" bites exactly at radii just below each realized distance,
  // so the required K is the largest ratio of consecutive distinct distances
  // from x. Balls that hold only their center at this resolution contribute
  // nothing (the first distance opens the ladder).
  double required = 1.0;
  std::vector<double> dists;
  for (int x = 0; x < n; ++x) {
    dists.clear();
    for (int p = 0; p < n; ++p)
      if (space.dist(x, p) > 0) dists.push_back(space.dist(x, p));
    std::sort(dists.begin(), dists.end());
    dists.erase(std::unique(dists.begin(), dists.end()), dists.end());
    for (std::size_t i = 0; i + 1 < dists.size(); ++i)
      required = std::max(required, dists[i + 1] / dists[i]);
  }
  // report on the 1.05-ratio grid
  double k = 1.0;
  while (k < required * (1 - 1e-12)) k *= 1.05;
  return k;
}

double DistortionProfile::envelope_at(double ratio) const {
  // largest envelope value among samples with t <= ratio
  auto it = std::upper_bound(t.begin(), t.end(), ratio);
  if (it == t.begin()) return 0;
  return eta[static_cast<std::size_t>(it - t.begin()) - 1];
}

DistortionProfile quasisymmetry_distortion_estimate(const FiniteMetricSpace& space,
                                                    const FiniteMetricSpace& second,
                                                    std::size_t max_triples, std::uint64_t seed) {
  if (space.ids() != second.ids()) raise(errc::metric_mismatch, "id sets differ");
  const int n = space.size();

  std::vector<std::pair<double, double>> samples;
  auto add_triple = [&](int x, int a, int b) {
    if (x == b || a == b || x == a) return;
    const double d1b = space.dist(x, b);
    const double d2b = second.dist(x, b);
    if (d1b <= 0 || d2b <= 0) return;
    samples.emplace_back(space.dist(x, a) / d1b, second.dist(x, a) / d2b);
  };

  const std::size_t all = static_cast<std::size_t>(n) * (n - 1) * (n - 2);
  if (n < 100 || all <= max_triples) {
    for (int x = 0; x < n; ++x)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) add_triple(x, a, b);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::unordered_set<std::uint64_t> seen;
    while (seen.size() < max_triples) {
      const int x = pick(rng), a = pick(rng), b = pick(rng);
      if (x == a || a == b || x == b) continue;
      const std::uint64_t key =
          (static_cast<std::uint64_t>(x) * n + a) * static_cast<std::uint64_t>(n) + b;
      if (!seen.insert(key).second) continue;
      add_triple(x, a, b);
    }
  }

  std::sort(samples.begin(), samples.end());
  DistortionProfile prof;
  prof.triples = samples.size();
  double running = 0;
  for (const auto& [tv, rv] : samples) {
    running = std::max(running, rv);
    if (!prof.t.empty() && prof.t.back() == tv)
      prof.eta.back() = running;
    else {
      prof.t.push_back(tv);
      prof.eta.push_back(running);
    }
  }

  // least-squares fit of the power quasisymmetry eta_{alpha,lambda} on the
  // t >= 1 branch: log eta = alpha log t + log lambda (diagnostic only)
  double sxx = 0, sxy = 0, sy = 0, sx = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < prof.t.size(); ++i) {
    if (prof.t[i] < 1 || prof.eta[i] <= 0) continue;
    const double lx = std::log(prof.t[i]);
    const double ly = std::log(prof.eta[i]);
    sxx += lx * lx;
    sxy += lx * ly;
    sx += lx;
    sy += ly;
    ++m;
  }
  if (m >= 2 && sxx * m - sx * sx > 0) {
    const double alpha = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    prof.fit_alpha = std::max(alpha, 1e-9);
    prof.fit_lambda = std::exp((sy - alpha * sx) / m);
  }
  return prof;
}

}  // namespace cwd
