#include "cwd/graph_form.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace cwd {

GraphForm::GraphForm(int n, std::vector<Edge> edges, std::vector<double> vertex_measure)
    : n_(n), edges_(std::move(edges)), measure_(std::move(vertex_measure)) {
  if (n_ <= 0) raise(errc::invariant_error, "graph needs at least one vertex");
  if (measure_.empty()) measure_.assign(n_, 1.0);
  if (static_cast<int>(measure_.size()) != n_)
    raise(errc::invariant_error, "vertex measure size mismatch");
  for (double m : measure_)
    if (!(m > 0)) raise(errc::invariant_error, "vertex measure must be positive");
  adj_.resize(n_);
  for (const auto& e : edges_) {
    if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_ || e.u == e.v)
      raise(errc::invariant_error, "bad edge endpoints");
    if (e.c < 0) raise(errc::invariant_error, "negative conductance");
    if (e.c == 0) continue;
    adj_[e.u].emplace_back(e.v, e.c);
    adj_[e.v].emplace_back(e.u, e.c);
  }
}

double GraphForm::energy(const Eigen::VectorXd& u) const {
  double acc = 0;
  for (const auto& e : edges_) {
    const double d = u[e.u] - u[e.v];
    acc += e.c * d * d;
  }
  return acc;
}

Eigen::SparseMatrix<double> GraphForm::laplacian() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(edges_.size() * 4 + n_);
  for (const auto& e : edges_) {
    trips.emplace_back(e.u, e.u, e.c);
    trips.emplace_back(e.v, e.v, e.c);
    trips.emplace_back(e.u, e.v, -e.c);
    trips.emplace_back(e.v, e.u, -e.c);
  }
  Eigen::SparseMatrix<double> L(n_, n_);
  L.setFromTriplets(trips.begin(), trips.end());
  return L;
}

std::vector<int> GraphForm::components() const {
  std::vector<int> comp(n_, -1);
  int label = 0;
  std::vector<int> stack;
  for (int s = 0; s < n_; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = label;
    stack.push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [w, c] : adj_[v])
        if (comp[w] < 0) {
          comp[w] = label;
          stack.push_back(w);
        }
    }
    ++label;
  }
  return comp;
}

Eigen::VectorXd GraphForm::dirichlet_solve(const std::vector<int>& boundary,
                                           const std::vector<double>& values) const {
  if (boundary.size() != values.size()) raise(errc::invariant_error, "boundary/value mismatch");
  std::vector<char> fixed(n_, 0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n_);
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    fixed[boundary[i]] = 1;
    u[boundary[i]] = values[i];
  }
  std::vector<int> free;
  std::vector<int> slot(n_, -1);
  for (int v = 0; v < n_; ++v)
    if (!fixed[v]) {
      slot[v] = static_cast<int>(free.size());
      free.push_back(v);
    }
  if (free.empty()) return u;

  const int m = static_cast<int>(free.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < m; ++i) {
    const int v = free[i];
    double diag = 0;
    for (const auto& [w, c] : adj_[v]) {
      diag += c;
      if (fixed[w])
        rhs[i] += c * u[w];
      else
        trips.emplace_back(i, slot[w], -c);
    }
    // isolated free vertices keep value 0 (harmonic continuation convention)
    trips.emplace_back(i, i, diag > 0 ? diag : 1.0);
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd x;
  if (m < 2000) {
    Eigen::MatrixXd Ad(A);
    x = Ad.ldlt().solve(rhs);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-10);
    cg.setMaxIterations(40L * m);
    cg.compute(A);
    x = cg.solve(rhs);
    if (cg.info() != Eigen::Success) raise(errc::solve_error, "conjugate gradient stalled");
  }
  for (int i = 0; i < m; ++i) u[free[i]] = x[i];
  return u;
}

CapacityResult capacity(const GraphForm& form, const std::vector<int>& A,
                        const std::vector<int>& B) {
  if (A.empty() || B.empty()) raise(errc::param_error, "capacity needs nonempty A and B");
  std::unordered_set<int> inA(A.begin(), A.end());
  for (int b : B)
    if (inA.count(b)) raise(errc::overlap, "A and B intersect");

  const auto comp = form.components();
  std::unordered_set<int> compA;
  for (int a : A) compA.insert(comp[a]);
  bool connected = false;
  for (int b : B)
    if (compA.count(comp[b])) {
      connected = true;
      break;
    }

  std::vector<int> boundary = A;
  std::vector<double> values(A.size(), 1.0);
  boundary.insert(boundary.end(), B.begin(), B.end());
  values.insert(values.end(), B.size(), 0.0);

  CapacityResult res;
  res.potential = form.dirichlet_solve(boundary, values);
  res.value = form.energy(res.potential);
  res.disconnected = !connected;
  if (res.disconnected) res.value = 0;
  return res;
}

double effective_resistance(const GraphForm& form, int x, int y) {
  const auto cap = capacity(form, {x}, {y});
  if (cap.disconnected) raise(errc::disconnected, "vertices in different components");
  return 1.0 / cap.value;
}

Eigen::MatrixXd resistance_matrix(const GraphForm& form) {
  const int n = form.size();
  if (n > 6000) raise(errc::param_error, "resistance matrix limited to 6000 vertices");
  const auto comp = form.components();
  for (int v = 0; v < n; ++v)
    if (comp[v] != comp[0]) raise(errc::disconnected, "graph is not connected");

  // ground vertex 0; G = inverse of the reduced Laplacian
  Eigen::SparseMatrix<double> L = form.laplacian();
  Eigen::SparseMatrix<double> Lr = L.block(1, 1, n - 1, n - 1);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(Lr);
  if (chol.info() != Eigen::Success) raise(errc::solve_error, "Laplacian factorization failed");

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n - 1);
  for (int j = 1; j < n; ++j) {
    e[j - 1] = 1;
    const Eigen::VectorXd col = chol.solve(e);
    e[j - 1] = 0;
    for (int i = 1; i < n; ++i) G(i, j) = col[i - 1];
  }
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = G(i, i) + G(j, j) - G(i, j) - G(j, i);
  return R;
}

}  // namespace cwd
