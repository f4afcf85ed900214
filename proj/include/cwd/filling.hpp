#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "cwd/errors.hpp"
#include "cwd/graph_form.hpp"
#include "cwd/metric_space.hpp"

namespace cwd {

struct FillingParams {
  double a = 0;       // vertical parameter
  double lambda = 0;  // horizontal parameter
  double K_P = 0;     // perfectness estimate (only computed in strict mode)
  bool strict = false;
};

/// Leveled ball-graph over a net hierarchy: one vertex per net point and
/// level, radius 2 a^-level, horizontal edges between lambda-inflated
/// overlapping balls of a level, vertical edges from the predecessor map.
/// Vertex ids are level-major and follow the net scan order.
class FillingGraph {
 public:
  struct Vertex {
    int level;
    int point;  // index into the underlying space
  };

  int size() const { return static_cast<int>(verts_.size()); }
  int max_level() const { return static_cast<int>(offsets_.size()) - 2; }
  int root() const { return 0; }
  const Vertex& vertex(int id) const { return verts_[id]; }
  double radius(int id) const { return radii_[id]; }
  std::pair<int, int> level_range(int k) const { return {offsets_[k], offsets_[k + 1]}; }
  int level_size(int k) const { return offsets_[k + 1] - offsets_[k]; }
  const std::vector<int>& horizontal_neighbors(int id) const { return hnbrs_[id]; }
  int parent(int id) const { return parent_[id]; }
  const std::vector<int>& children(int id) const { return children_[id]; }
  const FiniteMetricSpace& space() const { return *space_; }
  const FillingParams& params() const { return params_; }

  double center_dist(int id1, int id2) const {
    return space_->dist(verts_[id1].point, verts_[id2].point);
  }
  /// Every horizontal neighbor descends from the same parent.
  bool non_peripheral(int id) const;
  /// max over vertices of #{B' : B' ~ B} (neighbors including the vertex).
  int measured_Dh() const;
  /// max number of children.
  int measured_Dv() const;

  friend FillingGraph build_filling(const FiniteMetricSpace& space, const NetHierarchy& nets,
                                    double lambda, bool strict);

 private:
  std::shared_ptr<const FiniteMetricSpace> space_;
  FillingParams params_;
  std::vector<Vertex> verts_;
  std::vector<double> radii_;
  std::vector<int> offsets_;  // level k vertices occupy [offsets_[k], offsets_[k+1])
  std::vector<std::vector<int>> hnbrs_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
};

FillingGraph build_filling(const FiniteMetricSpace& space, const NetHierarchy& nets, double lambda,
                           bool strict = false);

/// Weight rho in (0,1) per vertex with genealogy products kept as log-sums.
struct WeightFunction {
  std::vector<double> rho;
  std::vector<double> log_pi;

  double pi(int id) const { return std::exp(log_pi[id]); }
};

WeightFunction make_weight(const FillingGraph& g, std::vector<double> rho);

struct H1Result {
  double eta_minus = 0;
  double eta_plus = 0;
  bool pass = false;
};

H1Result check_H1(const WeightFunction& w);

/// K0 = max pi-ratio over horizontal edges (1 when there are none).
double check_H2(const FillingGraph& g, const WeightFunction& w);

struct H3Result {
  double min_cost = 0;  // +inf when vacuous
  bool vacuous = false;
  int worst_parent = -1;
  bool pass() const { return vacuous || min_cost >= 1.0; }
};

/// (H3'): min over parents B and crossing paths in Gamma_{k+1}(B) of
/// L_h(gamma, rho) with edge cost rho*(B_j) ^ rho*(B_{j+1}).
H3Result check_H3prime(const FillingGraph& g, const WeightFunction& w);

/// Dijkstra over the crossing paths of Gamma_{k+1}(B) with caller-supplied
/// edge and node costs; +inf when no crossing exists.
double crossing_min_cost(const FillingGraph& g, int B,
                         const std::function<double(int, int)>& edge_cost,
                         const std::function<double(int)>& node_cost);

struct ThetaEstimate {
  double value = 0;    // pi(c_alpha(x,y))
  int level = -1;      // m_alpha(x,y)
  bool unseparated = false;
};

/// Boundary metric surrogate theta(x,y) = pi(c_alpha(x,y)); pairs that never
/// separate before the deepest level are flagged, not errors.
std::vector<ThetaEstimate> boundary_metric_estimate(const FillingGraph& g,
                                                    const WeightFunction& w, double alpha,
                                                    const std::vector<std::pair<int, int>>& pairs);

/// Shortest-path metric D_rho on the filling: horizontal edges cost
/// 2 max(-log eta+, -log eta-, log K0), vertical edges |log pi - log pi|.
double filling_metric_Drho(const FillingGraph& g, const WeightFunction& w, int v1, int v2);

/// Gentle capacity surrogate C(B) = m(B)/r_B^gamma with measured edge-ratio
/// constants and the enhanced subadditivity margin.
struct GentleFunction {
  std::vector<double> C;
  double K_h = 1;
  double K_v = 1;
  double E_delta = 0;   // 1 - max_B C(B)/sum of non-peripheral children
  bool E_holds = false;
};

GentleFunction gentle_capacity_function(const FillingGraph& g,
                                        const std::vector<double>& ball_masses, double gamma);

/// Empirical counting-measure masses of the vertex balls.
std::vector<double> counting_ball_masses(const FillingGraph& g);

}  // namespace cwd
