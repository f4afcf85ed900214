#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "cwd/errors.hpp"

namespace cwd {

/// Weighted-graph quadratic form E(u,u) = sum_e c_e (u_x - u_y)^2 with a
/// positive vertex measure. The discrete carrier for every capacity,
/// harmonicity and Poincare solve.
class GraphForm {
 public:
  struct Edge {
    int u, v;
    double c;
  };

  GraphForm() = default;
  GraphForm(int n, std::vector<Edge> edges, std::vector<double> vertex_measure);

  int size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<double>& vertex_measure() const { return measure_; }
  const std::vector<std::vector<std::pair<int, double>>>& adjacency() const { return adj_; }

  double energy(const Eigen::VectorXd& u) const;
  Eigen::SparseMatrix<double> laplacian() const;

  /// Connected component labels (by edge structure, conductance > 0).
  std::vector<int> components() const;

  /// Solves the Dirichlet problem: u fixed on `boundary` (values given),
  /// harmonic elsewhere. Conjugate gradient with Jacobi preconditioner at
  /// relative residual 1e-10; dense solve below 2000 unknowns.
  Eigen::VectorXd dirichlet_solve(const std::vector<int>& boundary,
                                  const std::vector<double>& values) const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> measure_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

struct CapacityResult {
  double value = 0;
  Eigen::VectorXd potential;  // equilibrium potential, 1 on A, 0 on B
  bool disconnected = false;  // no A-B path: value 0 by convention
};

/// Cap(A,B) = inf { E(f,f) : f = 1 on A, f = 0 on B }, attained by the
/// equilibrium potential. A and B must be disjoint and nonempty.
CapacityResult capacity(const GraphForm& form, const std::vector<int>& A,
                        const std::vector<int>& B);

/// Effective resistance between two vertices, 1/Cap({x},{y}).
double effective_resistance(const GraphForm& form, int x, int y);

/// All-pairs effective resistance via one factorization (n guarded small).
Eigen::MatrixXd resistance_matrix(const GraphForm& form);

}  // namespace cwd
