#include "cwd/pcf.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace cwd {

std::string word_to_string(const Word& w) {
  std::string s;
  s.reserve(w.size());
  for (int c : w) {
    if (c < 0 || c > 9) raise(errc::param_error, "word letters above 9 not printable");
    s.push_back(static_cast<char>('0' + c));
  }
  return s.empty() ? "-" : s;
}

Word word_from_string(const std::string& s, int alphabet) {
  Word w;
  if (s == "-" || s.empty()) return w;
  for (char c : s) {
    if (c < '0' || c > '9') raise(errc::parse_error, "bad word character");
    const int v = c - '0';
    if (v >= alphabet) raise(errc::parse_error, "word letter outside alphabet");
    w.push_back(v);
  }
  return w;
}

SelfSimilarStructure::SelfSimilarStructure(std::string name, int base,
                                           std::vector<std::vector<long long>> fixed,
                                           std::vector<int> v0, Eigen::MatrixXd embed)
    : name_(std::move(name)),
      base_(base),
      fixed_(std::move(fixed)),
      v0_(std::move(v0)),
      embed_(std::move(embed)) {
  if (base_ < 2) raise(errc::param_error, "contraction base must be >= 2");
  if (fixed_.size() < 2) raise(errc::invariant_error, "need at least two maps");
  if (v0_.empty()) raise(errc::invariant_error, "V0 must be nonempty");
  for (int i : v0_)
    if (i < 0 || i >= alphabet_size()) raise(errc::invariant_error, "V0 map index out of range");
  const std::size_t d = fixed_.front().size();
  for (const auto& f : fixed_)
    if (f.size() != d) raise(errc::invariant_error, "fixed point dimension mismatch");
  if (embed_.cols() != static_cast<Eigen::Index>(d))
    raise(errc::invariant_error, "embedding dimension mismatch");
}

std::size_t SelfSimilarStructure::word_count(int n) const {
  std::size_t c = 1;
  for (int i = 0; i < n; ++i) c *= static_cast<std::size_t>(alphabet_size());
  return c;
}

Word SelfSimilarStructure::word_at(int n, std::size_t index) const {
  Word w(n);
  for (int pos = n - 1; pos >= 0; --pos) {
    w[pos] = static_cast<int>(index % alphabet_size());
    index /= alphabet_size();
  }
  return w;
}

std::size_t SelfSimilarStructure::word_index(const Word& w) const {
  std::size_t idx = 0;
  for (int c : w) {
    if (c < 0 || c >= alphabet_size()) raise(errc::param_error, "word letter outside alphabet");
    idx = idx * alphabet_size() + static_cast<std::size_t>(c);
  }
  return idx;
}

std::vector<long long> SelfSimilarStructure::map_point(const Word& w,
                                                       const std::vector<long long>& p) const {
  std::vector<long long> k = p;
  long long scale = 1;
  for (int pos = static_cast<int>(w.size()) - 1; pos >= 0; --pos) {
    const auto& q = fixed_[w[pos]];
    for (std::size_t d = 0; d < k.size(); ++d) k[d] += (base_ - 1) * q[d] * scale;
    scale *= base_;
  }
  return k;
}

std::vector<long long> SelfSimilarStructure::corner_key(const Word& w, int corner) const {
  std::vector<long long> k = map_point(w, fixed_[v0_[corner]]);
  long long m = static_cast<long long>(w.size());
  auto divisible = [&] {
    for (long long v : k)
      if (v % base_ != 0) return false;
    return true;
  };
  while (m > 0 && divisible()) {
    for (auto& v : k) v /= base_;
    --m;
  }
  k.insert(k.begin(), m);
  return k;
}

void SelfSimilarStructure::build_level(int n) const {
  if (static_cast<int>(levels_.size()) > n) return;
  levels_.resize(n + 1);
  key_maps_.resize(n + 1);
  for (int lev = 0; lev <= n; ++lev) {
    if (!levels_[lev].cell_vertices.empty()) continue;
    LevelData& data = levels_[lev];
    auto& keys = key_maps_[lev];
    const std::size_t words = word_count(lev);
    data.cell_vertices.resize(words);
    for (std::size_t wi = 0; wi < words; ++wi) {
      const Word w = word_at(lev, wi);
      auto& cell = data.cell_vertices[wi];
      cell.resize(boundary_size());
      for (int j = 0; j < boundary_size(); ++j) {
        auto key = corner_key(w, j);
        auto [it, inserted] = keys.try_emplace(key, data.vertex_count);
        if (inserted) {
          const long long m = key.front();
          double denom = 1;
          for (long long i = 0; i < m; ++i) denom *= base_;
          Eigen::VectorXd lattice(lattice_dim());
          for (int d = 0; d < lattice_dim(); ++d)
            lattice[d] = static_cast<double>(key[d + 1]) / denom;
          const Eigen::VectorXd x = embed_ * lattice;
          data.vertex_coords.emplace_back(x.data(), x.data() + x.size());
          ++data.vertex_count;
        }
        cell[j] = it->second;
      }
    }
  }
}

const SelfSimilarStructure::LevelData& SelfSimilarStructure::level(int n) const {
  if (n < 0) raise(errc::param_error, "negative level");
  build_level(n);
  return levels_[n];
}

std::vector<int> SelfSimilarStructure::cell_corner_ids(const Word& w, int n) const {
  if (static_cast<int>(w.size()) > n) raise(errc::param_error, "word longer than level");
  build_level(n);
  std::vector<int> ids(boundary_size());
  for (int j = 0; j < boundary_size(); ++j) {
    const auto key = corner_key(w, j);
    const auto it = key_maps_[n].find(key);
    if (it == key_maps_[n].end()) raise(errc::invariant_error, "corner missing from level table");
    ids[j] = it->second;
  }
  return ids;
}

double HarmonicStructure::r_word(const Word& w) const {
  double v = 1;
  for (int c : w) v *= r[c];
  return v;
}

void HarmonicStructure::check_d1_d2() const {
  const int m = boundary_size();
  if (D.cols() != m || m < 2) raise(errc::invariant_error, "D must be square, size >= 2");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (std::abs(D(i, j) - D(j, i)) > 1e-14 * (1 + std::abs(D(i, j))))
        raise(errc::invariant_error, "D not symmetric");
      if (i != j && D(i, j) < 0) raise(errc::invariant_error, "(D2) fails: negative off-diagonal");
    }
  if ((D * Eigen::VectorXd::Ones(m)).cwiseAbs().maxCoeff() > 1e-12)
    raise(errc::invariant_error, "(D1) fails: constants not in kernel");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
  lu.setThreshold(1e-12);
  if (lu.rank() != m - 1) raise(errc::invariant_error, "(D1) fails: kernel larger than constants");
  for (int i = 0; i < r.size(); ++i)
    if (!(r[i] > 0 && r[i] < 1))
      raise(errc::param_error, "resistance weights must lie in (0,1) (regular structure)");
}

namespace {

Eigen::MatrixXd regular_simplex(int N) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N, N + 1);
  for (int k = 1; k <= N; ++k) {
    Eigen::VectorXd centroid = P.leftCols(k).rowwise().mean();
    const double d2 = (P.col(0) - centroid).squaredNorm();
    P.col(k) = centroid;
    P(k - 1, k) = std::sqrt(1.0 - d2);
  }
  return P;
}

// level-1 network Laplacian with V0 ids first; returns (L1, V1 size)
Eigen::MatrixXd level1_laplacian(const SelfSimilarStructure& ss, const HarmonicStructure& hs,
                                 std::vector<int>& v0_ids) {
  const auto& lv = ss.level(1);
  const int n1 = lv.vertex_count;
  const int nb = ss.boundary_size();
  const Eigen::MatrixXd L0 = hs.laplacian0();
  Eigen::MatrixXd L1 = Eigen::MatrixXd::Zero(n1, n1);
  for (int i = 0; i < ss.alphabet_size(); ++i) {
    const auto& cell = lv.cell_vertices[i];
    for (int p = 0; p < nb; ++p)
      for (int q = 0; q < nb; ++q) L1(cell[p], cell[q]) += L0(p, q) / hs.r[i];
  }
  v0_ids = ss.cell_corner_ids({}, 1);
  return L1;
}

// permutation putting V0 first, interior after
void split_boundary_interior(int n1, const std::vector<int>& v0_ids, std::vector<int>& order,
                             std::vector<int>& where) {
  order.clear();
  order.insert(order.end(), v0_ids.begin(), v0_ids.end());
  std::vector<char> isb(n1, 0);
  for (int v : v0_ids) isb[v] = 1;
  for (int v = 0; v < n1; ++v)
    if (!isb[v]) order.push_back(v);
  where.assign(n1, -1);
  for (int i = 0; i < n1; ++i) where[order[i]] = i;
}

}  // namespace

std::pair<SelfSimilarStructure, HarmonicStructure> make_sierpinski_gasket(int N) {
  if (N < 2) raise(errc::dimension_error, "Sierpinski gasket needs N >= 2");
  std::vector<std::vector<long long>> fixed(N + 1, std::vector<long long>(N + 1, 0));
  std::vector<int> v0(N + 1);
  for (int i = 0; i <= N; ++i) {
    fixed[i][i] = 1;
    v0[i] = i;
  }
  SelfSimilarStructure ss("sg" + std::to_string(N), 2, std::move(fixed), std::move(v0),
                          regular_simplex(N));
  HarmonicStructure hs;
  hs.D = Eigen::MatrixXd::Ones(N + 1, N + 1);
  hs.D.diagonal().setConstant(-static_cast<double>(N));
  hs.r = Eigen::VectorXd::Constant(N + 1, static_cast<double>(N + 1) / (N + 3));
  hs.check_d1_d2();
  return {std::move(ss), std::move(hs)};
}

std::pair<SelfSimilarStructure, HarmonicStructure> make_vicsek(double r) {
  if (!(r > 0 && r < 0.5)) raise(errc::param_error, "Vicsek weight r must lie in (0, 1/2)");
  std::vector<std::vector<long long>> fixed = {{0, 0}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  std::vector<int> v0 = {1, 2, 3, 4};
  SelfSimilarStructure ss("vicsek", 3, std::move(fixed), std::move(v0),
                          Eigen::MatrixXd::Identity(2, 2));
  HarmonicStructure hs;
  hs.D = Eigen::MatrixXd::Ones(4, 4);
  hs.D.diagonal().setConstant(-3.0);
  hs.r.resize(5);
  hs.r << 1 - 2 * r, r, r, r, r;
  hs.check_d1_d2();
  return {std::move(ss), std::move(hs)};
}

double validate_harmonic_structure(const SelfSimilarStructure& ss, HarmonicStructure& hs) {
  hs.check_d1_d2();
  if (hs.r.size() != ss.alphabet_size()) raise(errc::invariant_error, "weight count != map count");
  if (hs.boundary_size() != ss.boundary_size())
    raise(errc::invariant_error, "D size != boundary size");

  std::vector<int> v0_ids;
  const Eigen::MatrixXd L1 = level1_laplacian(ss, hs, v0_ids);
  const int n1 = static_cast<int>(L1.rows());
  const int nb = ss.boundary_size();
  std::vector<int> order, where;
  split_boundary_interior(n1, v0_ids, order, where);

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n1, n1);
  for (int i = 0; i < n1; ++i) P(i, order[i]) = 1;
  const Eigen::MatrixXd Lp = P * L1 * P.transpose();
  const int ni = n1 - nb;
  if (ni == 0) {
    const double res = (Lp - hs.laplacian0()).cwiseAbs().maxCoeff();
    hs.validated = res <= 1e-12 * hs.D.cwiseAbs().maxCoeff();
    return res;
  }
  const Eigen::MatrixXd A = Lp.topLeftCorner(nb, nb);
  const Eigen::MatrixXd B = Lp.topRightCorner(nb, ni);
  const Eigen::MatrixXd C = Lp.bottomRightCorner(ni, ni);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
  lu.setThreshold(1e-12);
  if (lu.rank() < ni) raise(errc::singular_interior, "interior block of level-1 form is singular");
  const Eigen::MatrixXd schur = A - B * lu.solve(B.transpose());
  const double res = (schur - hs.laplacian0()).cwiseAbs().maxCoeff();
  hs.validated = res <= 1e-12 * hs.D.cwiseAbs().maxCoeff();
  return res;
}

std::vector<Eigen::MatrixXd> extension_matrices(const SelfSimilarStructure& ss,
                                                const HarmonicStructure& hs) {
  std::vector<int> v0_ids;
  const Eigen::MatrixXd L1 = level1_laplacian(ss, hs, v0_ids);
  const int n1 = static_cast<int>(L1.rows());
  const int nb = ss.boundary_size();
  std::vector<int> order, where;
  split_boundary_interior(n1, v0_ids, order, where);

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n1, n1);
  for (int i = 0; i < n1; ++i) P(i, order[i]) = 1;
  const Eigen::MatrixXd Lp = P * L1 * P.transpose();
  const int ni = n1 - nb;

  // rows of the full harmonic extension V0 -> V1 in permuted order
  Eigen::MatrixXd H(n1, nb);
  H.topRows(nb) = Eigen::MatrixXd::Identity(nb, nb);
  if (ni > 0) {
    const Eigen::MatrixXd B = Lp.topRightCorner(nb, ni);
    const Eigen::MatrixXd C = Lp.bottomRightCorner(ni, ni);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
    lu.setThreshold(1e-12);
    if (lu.rank() < ni)
      raise(errc::singular_interior, "interior block of level-1 form is singular");
    H.bottomRows(ni) = -lu.solve(B.transpose());
  }

  const auto& lv = ss.level(1);
  std::vector<Eigen::MatrixXd> A(ss.alphabet_size());
  for (int i = 0; i < ss.alphabet_size(); ++i) {
    A[i].resize(nb, nb);
    for (int j = 0; j < nb; ++j) A[i].row(j) = H.row(where[lv.cell_vertices[i][j]]);
  }
  return A;
}

double graph_energy(const SelfSimilarStructure& ss, const HarmonicStructure& hs, int n,
                    const Eigen::VectorXd& u) {
  const auto& lv = ss.level(n);
  if (u.size() != lv.vertex_count) raise(errc::param_error, "vector size != |V_n|");
  const Eigen::MatrixXd L0 = hs.laplacian0();
  const int nb = ss.boundary_size();
  Eigen::VectorXd loc(nb);
  double acc = 0;
  for (std::size_t wi = 0; wi < lv.cell_vertices.size(); ++wi) {
    const auto& cell = lv.cell_vertices[wi];
    for (int j = 0; j < nb; ++j) loc[j] = u[cell[j]];
    acc += loc.dot(L0 * loc) / hs.r_word(ss.word_at(n, wi));
  }
  return acc;
}

Eigen::VectorXd harmonic_extension(const SelfSimilarStructure& ss, const HarmonicStructure& hs,
                                   const Eigen::VectorXd& u0, int n) {
  if (u0.size() != ss.boundary_size()) raise(errc::param_error, "u0 size != |V0|");
  const auto A = extension_matrices(ss, hs);
  const auto& lv = ss.level(n);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(lv.vertex_count);

  // DFS over the word tree carrying the boundary restriction of h o F_w
  struct Frame {
    Word w;
    Eigen::VectorXd u;
  };
  std::vector<Frame> stack{{Word{}, u0}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (static_cast<int>(f.w.size()) == n) {
      const auto& cell = lv.cell_vertices[ss.word_index(f.w)];
      for (int j = 0; j < ss.boundary_size(); ++j) out[cell[j]] = f.u[j];
      continue;
    }
    for (int i = ss.alphabet_size() - 1; i >= 0; --i) {
      Frame child;
      child.w = f.w;
      child.w.push_back(i);
      child.u = A[i] * f.u;
      stack.push_back(std::move(child));
    }
  }
  return out;
}

GraphForm level_network(const SelfSimilarStructure& ss, const HarmonicStructure& hs, int n) {
  const auto& lv = ss.level(n);
  const Eigen::MatrixXd L0 = hs.laplacian0();
  const int nb = ss.boundary_size();
  const double dH = hausdorff_weight_dimension(hs);

  std::map<std::pair<int, int>, double> acc;
  std::vector<double> measure(lv.vertex_count, 0.0);
  for (std::size_t wi = 0; wi < lv.cell_vertices.size(); ++wi) {
    const Word w = ss.word_at(n, wi);
    const double rw = hs.r_word(w);
    const double mw = std::pow(rw, dH);
    const auto& cell = lv.cell_vertices[wi];
    for (int p = 0; p < nb; ++p) {
      measure[cell[p]] += mw / nb;
      for (int q = p + 1; q < nb; ++q) {
        const double c = -L0(p, q);
        if (c <= 0) continue;
        auto key = std::minmax(cell[p], cell[q]);
        acc[{key.first, key.second}] += c / rw;
      }
    }
  }
  std::vector<GraphForm::Edge> edges;
  edges.reserve(acc.size());
  for (const auto& [pq, c] : acc) edges.push_back({pq.first, pq.second, c});
  return GraphForm(lv.vertex_count, std::move(edges), std::move(measure));
}

double CellMeasure::total() const {
  double acc = 0;
  for (double m : masses) acc += m;
  return acc;
}

double CellMeasure::mass_of(const SelfSimilarStructure& ss, const Word& w) const {
  const int m = static_cast<int>(w.size());
  if (m > level) raise(errc::param_error, "word deeper than measure level");
  std::size_t block = 1;
  for (int i = 0; i < level - m; ++i) block *= ss.alphabet_size();
  const std::size_t start = ss.word_index(w) * block;
  double acc = 0;
  for (std::size_t i = start; i < start + block; ++i) acc += masses[i];
  return acc;
}

CellMeasure self_similar_measure(const SelfSimilarStructure& ss, const Eigen::VectorXd& weights,
                                 int n) {
  if (weights.size() != ss.alphabet_size()) raise(errc::param_error, "weight count != map count");
  CellMeasure mu;
  mu.level = n;
  mu.masses.resize(ss.word_count(n));
  for (std::size_t wi = 0; wi < mu.masses.size(); ++wi) {
    double v = 1;
    for (int c : ss.word_at(n, wi)) v *= weights[c];
    mu.masses[wi] = v;
  }
  return mu;
}

CellMeasure cell_energy_measure(const SelfSimilarStructure& ss, const HarmonicStructure& hs,
                                const HarmonicFunction& h, int n) {
  if (h.u0.size() != ss.boundary_size()) raise(errc::param_error, "boundary vector size != |V0|");
  const auto A = extension_matrices(ss, hs);
  const Eigen::MatrixXd L0 = hs.laplacian0();
  CellMeasure mu;
  mu.level = n;
  mu.masses.assign(ss.word_count(n), 0.0);

  struct Frame {
    int depth;
    std::size_t index;
    double rw;
    Eigen::VectorXd u;
  };
  std::vector<Frame> stack{{0, 0, 1.0, h.u0}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.depth == n) {
      mu.masses[f.index] = f.u.dot(L0 * f.u) / f.rw;
      continue;
    }
    for (int i = ss.alphabet_size() - 1; i >= 0; --i)
      stack.push_back({f.depth + 1, f.index * ss.alphabet_size() + static_cast<std::size_t>(i),
                       f.rw * hs.r[i], A[i] * f.u});
  }
  return mu;
}

double resistance_metric(const SelfSimilarStructure& ss, const HarmonicStructure& hs, int n,
                         int v1, int v2) {
  if (v1 == v2) return 0;
  return effective_resistance(level_network(ss, hs, n), v1, v2);
}

double hausdorff_weight_dimension(const HarmonicStructure& hs) {
  auto f = [&](double s) {
    double acc = 0;
    for (int i = 0; i < hs.r.size(); ++i) acc += std::pow(hs.r[i], s);
    return acc - 1.0;
  };
  double lo = 0, hi = 1;
  while (f(hi) > 0) hi *= 2;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  const double dH = 0.5 * (lo + hi);
  if (dH < 1 - 1e-9)
    raise(errc::invariant_error, "weight dimension below 1 contradicts resistance scaling");
  return dH;
}

FwSpectrum fw_star_spectrum(const SelfSimilarStructure& ss, const HarmonicStructure& hs,
                            const Word& w) {
  const auto A = extension_matrices(ss, hs);
  const int nb = ss.boundary_size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(nb, nb);
  for (int c : w) M = A[c] * M;

  FwSpectrum out;
  out.map = M;
  // Helmert basis: deterministic orthonormal complement of the constants
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nb, nb - 1);
  for (int k = 1; k < nb; ++k) {
    const double norm = std::sqrt(static_cast<double>(k) * (k + 1));
    for (int i = 0; i < k; ++i) C(i, k - 1) = 1.0 / norm;
    C(k, k - 1) = -static_cast<double>(k) / norm;
  }
  const Eigen::MatrixXd Mq = C.transpose() * M * C;

  Eigen::EigenSolver<Eigen::MatrixXd> es(Mq);
  if (es.info() != Eigen::Success) raise(errc::solve_error, "eigendecomposition failed");
  out.quotient_eigenvalues = es.eigenvalues();
  out.quotient_eigenvectors = C * es.eigenvectors();

  Eigen::EigenSolver<Eigen::MatrixXd> full(M);
  out.full_eigenvalues.resize(nb);
  for (int i = 0; i < nb; ++i) out.full_eigenvalues[i] = full.eigenvalues()[i].real();
  std::sort(out.full_eigenvalues.rbegin(), out.full_eigenvalues.rend());
  return out;
}

CellMeasure kusuoka_pair_measure(const SelfSimilarStructure& ss, const HarmonicStructure& hs,
                                 const HarmonicFunction& h1, const HarmonicFunction& h2, int n) {
  const Eigen::MatrixXd L0 = hs.laplacian0();
  const double e1 = h1.u0.dot(L0 * h1.u0);
  const double e2 = h2.u0.dot(L0 * h2.u0);
  const double s = e1 + e2;
  if (!(s > 0)) raise(errc::degenerate, "both harmonic functions are constant");
  CellMeasure m1 = cell_energy_measure(ss, hs, h1, n);
  const CellMeasure m2 = cell_energy_measure(ss, hs, h2, n);
  for (std::size_t i = 0; i < m1.masses.size(); ++i) m1.masses[i] = (m1.masses[i] + m2.masses[i]) / s;
  return m1;
}

double CellDiameters::at(const SelfSimilarStructure& ss, const Word& w) const {
  const int m = static_cast<int>(w.size());
  if (m > max_level) raise(errc::param_error, "word deeper than diameter table");
  return diam[m][ss.word_index(w)];
}

namespace {

std::vector<double> dijkstra(const std::vector<std::vector<std::pair<int, double>>>& adj, int src) {
  std::vector<double> dist(adj.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[src] = 0;
  heap.push({0.0, src});
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (const auto& [w, len] : adj[v]) {
      const double nd = d + len;
      if (nd < dist[w]) {
        dist[w] = nd;
        heap.push({nd, w});
      }
    }
  }
  return dist;
}

}  // namespace

CellGraphMetric cell_graph_metric(const SelfSimilarStructure& ss, const HarmonicStructure& hs,
                                  const CellMeasure& mu, int n) {
  if (mu.level < n) raise(errc::param_error, "measure shallower than requested level");
  const auto& lv = ss.level(n);
  const int nb = ss.boundary_size();

  CellGraphMetric out;
  out.diams.max_level = n;
  out.diams.diam.resize(n + 1);

  // per-cell crossing weight sqrt(r_w mu(K_w)); zero mass flags degeneracy
  const std::size_t words = ss.word_count(n);
  std::vector<double> weight(words);
  for (std::size_t wi = 0; wi < words; ++wi) {
    const Word w = ss.word_at(n, wi);
    const double mw = mu.mass_of(ss, w);
    if (!(mw > 0)) out.degenerate = true;
    weight[wi] = std::sqrt(std::max(mw, 0.0) * hs.r_word(w));
  }

  std::vector<std::vector<std::pair<int, double>>> adj(lv.vertex_count);
  for (std::size_t wi = 0; wi < words; ++wi) {
    const auto& cell = lv.cell_vertices[wi];
    for (int p = 0; p < nb; ++p)
      for (int q = p + 1; q < nb; ++q) {
        adj[cell[p]].emplace_back(cell[q], weight[wi]);
        adj[cell[q]].emplace_back(cell[p], weight[wi]);
      }
  }

  for (int m = 0; m <= n; ++m) {
    const std::size_t cnt = ss.word_count(m);
    out.diams.diam[m].assign(cnt, 0.0);
    for (std::size_t wi = 0; wi < cnt; ++wi) {
      const Word w = ss.word_at(m, wi);
      const auto corners = ss.cell_corner_ids(w, n);
      double best = 0;
      for (int p = 0; p + 1 < nb; ++p) {
        const auto dist = dijkstra(adj, corners[p]);
        for (int q = p + 1; q < nb; ++q) best = std::max(best, dist[corners[q]]);
      }
      out.diams.diam[m][wi] = best;
    }
  }

  if (lv.vertex_count <= 1500) {
    out.vertex_dist.resize(lv.vertex_count, lv.vertex_count);
    for (int v = 0; v < lv.vertex_count; ++v) {
      const auto dist = dijkstra(adj, v);
      for (int u = 0; u < lv.vertex_count; ++u) out.vertex_dist(v, u) = dist[u];
    }
  }
  return out;
}

std::pair<CellDiameters, CellMeasure> rescale_cell_pair(const SelfSimilarStructure& ss,
                                                        const CellDiameters& theta,
                                                        const CellMeasure& mu,
                                                        const HarmonicStructure& hs,
                                                        const Word& w) {
  const int k = static_cast<int>(w.size());
  if (theta.max_level < k || mu.level < k) raise(errc::param_error, "word deeper than tables");
  const double mw = mu.mass_of(ss, w);
  if (!(mw > 0)) raise(errc::zero_mass, "cell " + word_to_string(w) + " has zero mass");
  const double scale = std::sqrt(hs.r_word(w) * mw);

  CellDiameters th;
  th.max_level = theta.max_level - k;
  th.diam.resize(th.max_level + 1);
  for (int m = 0; m <= th.max_level; ++m) {
    const std::size_t cnt = ss.word_count(m);
    th.diam[m].resize(cnt);
    for (std::size_t vi = 0; vi < cnt; ++vi) {
      Word wv = w;
      const Word v = ss.word_at(m, vi);
      wv.insert(wv.end(), v.begin(), v.end());
      th.diam[m][vi] = theta.at(ss, wv) / scale;
    }
  }

  CellMeasure nu;
  nu.level = mu.level - k;
  nu.masses.resize(ss.word_count(nu.level));
  std::size_t block = nu.masses.size();
  const std::size_t start = ss.word_index(w) * block;
  for (std::size_t i = 0; i < block; ++i) nu.masses[i] = mu.masses[start + i] / mw;
  return {std::move(th), std::move(nu)};
}

M2Report m2_constant(const SelfSimilarStructure& ss, const CellDiameters& theta,
                     const CellMeasure& mu, const HarmonicStructure& hs, int max_level) {
  if (theta.max_level < max_level || mu.level < max_level)
    raise(errc::param_error, "tables shallower than max_level");
  M2Report rep;
  rep.per_level.resize(max_level + 1, 0.0);
  for (int m = 0; m <= max_level; ++m) {
    const std::size_t cnt = ss.word_count(m);
    for (std::size_t wi = 0; wi < cnt; ++wi) {
      const Word w = ss.word_at(m, wi);
      const double v = hs.r_word(w) * mu.mass_of(ss, w);
      const double d2 = theta.diam[m][wi] * theta.diam[m][wi];
      if (!(v > 0) || !(d2 > 0)) {
        rep.degenerate = true;
        rep.per_level[m] = std::numeric_limits<double>::infinity();
        if (rep.argmax_word.empty()) rep.argmax_word = word_to_string(w);
        continue;
      }
      const double ratio = std::max(v / d2, d2 / v);
      if (ratio > rep.per_level[m]) rep.per_level[m] = ratio;
      if (ratio > rep.c_star) {
        rep.c_star = ratio;
        rep.argmax_word = word_to_string(w);
      }
    }
  }
  if (rep.degenerate) rep.c_star = std::numeric_limits<double>::infinity();
  return rep;
}

SgDegenReport sg_degeneration_probe(int N, int depth) {
  if (N < 2) raise(errc::dimension_error, "Sierpinski gasket needs N >= 2");
  if (depth < 1) raise(errc::param_error, "depth must be >= 1");
  auto [ss, hs] = make_sierpinski_gasket(N);
  const auto A = extension_matrices(ss, hs);
  const Eigen::MatrixXd L0 = hs.laplacian0();
  const int nb = N + 1;

  SgDegenReport rep;
  rep.N = N;
  rep.depth = depth;
  rep.expected_chain_ratio = 2.0 / (N + 3);
  rep.expected_gap_ratio = 1.0 / ((N + 1.0) * (N + 1.0));
  rep.informational_only = (N == 2);

  // phi: 0-harmonic with phi|_V0 = N^{-1/2}(N+3)^{-1}(1_{q0} - 1_{q1})
  Eigen::VectorXd phi0 = Eigen::VectorXd::Zero(nb);
  phi0[0] = 1;
  phi0[1] = -1;
  phi0 *= 1.0 / (std::sqrt(static_cast<double>(N)) * (N + 3));
  for (int j = 2; j < ss.alphabet_size(); ++j) {
    const double err = (A[j] * phi0 - phi0 / (N + 3)).cwiseAbs().maxCoeff();
    rep.phi_pullback_error = std::max(rep.phi_pullback_error, err);
  }

  // resistance diameter estimate from a level-3 network
  {
    const int lvl = std::min(depth, 3);
    const Eigen::MatrixXd R = resistance_matrix(level_network(ss, hs, lvl));
    rep.diam_resistance = R.maxCoeff();
  }

  // chain sums over {2,3}^n, computed from per-word pullback energies
  const double ephi = phi0.dot(L0 * phi0);
  if (N >= 3) {
    std::vector<Eigen::VectorXd> layer{phi0};
    for (int n = 1; n <= depth; ++n) {
      std::vector<Eigen::VectorXd> next;
      next.reserve(layer.size() * 2);
      for (const auto& u : layer)
        for (int j : {2, 3}) next.push_back(A[j] * u);
      layer = std::move(next);
      double sum = 0;
      for (const auto& u : layer) sum += std::sqrt(rep.diam_resistance * u.dot(L0 * u));
      rep.chain_sums.push_back(sum);
    }
  } else {
    // N = 2: the two-letter chain does not exist; report the closed form only
    for (int n = 1; n <= depth; ++n)
      rep.chain_sums.push_back(std::pow(2.0 / (N + 3), n) *
                               std::sqrt(rep.diam_resistance * ephi));
  }
  for (std::size_t i = 1; i < rep.chain_sums.size(); ++i)
    rep.chain_ratios.push_back(rep.chain_sums[i] / rep.chain_sums[i - 1]);

  // convergence of normalized pullbacks h_{0^n} to psi in energy
  Eigen::VectorXd psi0 = Eigen::VectorXd::Zero(nb);
  psi0[0] = 1.0 / std::sqrt(static_cast<double>(N));
  Eigen::VectorXd h = Eigen::VectorXd::Zero(nb);
  h[0] = 1;
  h[1] = 0.3;
  h[2] = -0.3;
  for (int n = 1; n <= depth; ++n) {
    h = A[0] * h;
    Eigen::VectorXd hn = h / std::sqrt(h.dot(L0 * h));
    if (hn.dot(L0 * psi0) < 0) hn = -hn;
    const Eigen::VectorXd gap = psi0 - hn;
    rep.psi_energy_gap.push_back(gap.dot(L0 * gap));
  }
  for (std::size_t i = 1; i < rep.psi_energy_gap.size(); ++i)
    rep.psi_gap_ratios.push_back(rep.psi_energy_gap[i] / rep.psi_energy_gap[i - 1]);
  return rep;
}

std::vector<bool> vicsek_cells_on_diagonals(const SelfSimilarStructure& ss, int n) {
  if (ss.lattice_dim() != 2) raise(errc::param_error, "diagonal test is for the Vicsek lattice");
  const std::size_t words = ss.word_count(n);
  std::vector<bool> on(words, false);
  const std::vector<long long> center = {0, 0};
  for (std::size_t wi = 0; wi < words; ++wi) {
    const auto c = ss.map_point(ss.word_at(n, wi), center);
    // closed cell of half-side 3^-n meets {y=x} or {y=-x}
    on[wi] = std::llabs(c[0] - c[1]) <= 2 || std::llabs(c[0] + c[1]) <= 2;
  }
  return on;
}

}  // namespace cwd
