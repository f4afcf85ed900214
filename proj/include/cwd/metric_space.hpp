#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cwd/errors.hpp"

namespace cwd {

/// Finite metric space over opaque point ids. Distances are held as a dense
/// symmetric matrix; optional Euclidean coordinates are kept for reporting.
/// Id order is the construction order and drives every greedy tie-break.
class FiniteMetricSpace {
 public:
  static FiniteMetricSpace from_points(std::vector<std::string> ids,
                                       std::vector<std::vector<double>> coords);
  static FiniteMetricSpace from_distance_matrix(std::vector<std::string> ids,
                                                Eigen::MatrixXd dist, bool validate = true);

  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::vector<double>>& coords() const { return coords_; }
  double dist(int i, int j) const { return dist_(i, j); }
  const Eigen::MatrixXd& dist_matrix() const { return dist_; }
  double diameter() const;

  /// Returns a copy with all distances scaled so the diameter equals
  /// `target` (default 1/2, the normalization the filling construction expects).
  FiniteMetricSpace scaled_to_diameter(double target = 0.5) const;

  /// Checks symmetry, zero diagonal, positivity off the diagonal and the
  /// triangle inequality (exhaustively up to 150 points, sampled beyond).
  void validate_metric(std::uint64_t seed = 1) const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::vector<double>> coords_;
  Eigen::MatrixXd dist_;
};

/// Nested net hierarchy N_0 supseteq-refining: N_{k-1} subset N_k, each N_k
/// a^{-k}-separated and maximal, built greedily in id order.
struct NetHierarchy {
  double base_scale = 0;                      // a
  std::vector<std::vector<int>> levels;       // point indices per level, scan order
  std::vector<std::vector<int>> predecessor;  // predecessor[k][i] for levels[k][i], k >= 1

  int max_level() const { return static_cast<int>(levels.size()) - 1; }
  double separation(int level) const;  // a^{-level}
  void check_invariants(const FiniteMetricSpace& space) const;
};

NetHierarchy build_net_hierarchy(const FiniteMetricSpace& space, double a, int max_level);

/// Greedy-cover doubling estimate: max over sampled (x, r) of the number of
/// radius r/2 balls the greedy cover of B(x, r) needs.
double doubling_constant_estimate(const FiniteMetricSpace& space, const std::vector<double>& radii,
                                  int max_centers = 256, std::uint64_t seed = 1);

/// Smallest K on the 1.05-ratio grid such that every sampled ball with
/// nonempty complement meets B(x,r) \ B(x,r/K). Balls that contain only
/// their center at the sampling resolution are skipped.
double uniform_perfectness_estimate(const FiniteMetricSpace& space);

/// Empirical quasisymmetric distortion envelope between two metrics on the
/// same id set: samples of (t, eta(t)) with eta the running max of d2-ratios.
struct DistortionProfile {
  std::vector<double> t;        // sorted ratios in d1
  std::vector<double> eta;      // monotone envelope of d2-ratios
  std::size_t triples = 0;      // number of sampled triples
  double fit_alpha = 0;         // least-squares power-QS fit eta_{alpha,lambda}
  double fit_lambda = 0;

  double envelope_at(double ratio) const;
};

DistortionProfile quasisymmetry_distortion_estimate(const FiniteMetricSpace& space,
                                                    const FiniteMetricSpace& second,
                                                    std::size_t max_triples = 200000,
                                                    std::uint64_t seed = 1);

}  // namespace cwd
