#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cwd/errors.hpp"
#include "cwd/graph_form.hpp"

namespace cwd {

using Word = std::vector<int>;

std::string word_to_string(const Word& w);
Word word_from_string(const std::string& s, int alphabet);

/// Post-critically finite self-similar structure whose contractions all have
/// ratio 1/base and integer fixed points on a lattice. Vertex identifications
/// across cells are computed in exact integer arithmetic.
class SelfSimilarStructure {
 public:
  /// base: contraction denominator; fixed: integer lattice coordinates of the
  /// fixed point of each map; v0: indices of the maps whose fixed points form
  /// the boundary V0; embed: lattice -> R^dim display embedding.
  SelfSimilarStructure(std::string name, int base, std::vector<std::vector<long long>> fixed,
                       std::vector<int> v0, Eigen::MatrixXd embed);

  const std::string& name() const { return name_; }
  int alphabet_size() const { return static_cast<int>(fixed_.size()); }
  int boundary_size() const { return static_cast<int>(v0_.size()); }
  int lattice_dim() const { return static_cast<int>(fixed_.front().size()); }
  int base() const { return base_; }
  const std::vector<int>& v0_maps() const { return v0_; }

  struct LevelData {
    std::vector<std::vector<int>> cell_vertices;  // per word (lex order), |V0| global ids
    int vertex_count = 0;
    std::vector<std::vector<double>> vertex_coords;  // display embedding
  };
  /// Level-n vertex table, built on demand and cached.
  const LevelData& level(int n) const;

  std::size_t word_count(int n) const;
  Word word_at(int n, std::size_t index) const;
  std::size_t word_index(const Word& w) const;

  /// Global level-n ids of the corners F_w(V0) of a cell w with |w| <= n.
  std::vector<int> cell_corner_ids(const Word& w, int n) const;

  /// Exact lattice coordinates (numerator, denominator base^n) of F_w(p)
  /// where p has integer coordinates.
  std::vector<long long> map_point(const Word& w, const std::vector<long long>& p) const;

 private:
  // normalized lattice key [reduced level, coords...] identifying a point
  std::vector<long long> corner_key(const Word& w, int corner) const;
  void build_level(int n) const;

  std::string name_;
  int base_;
  std::vector<std::vector<long long>> fixed_;
  std::vector<int> v0_;
  Eigen::MatrixXd embed_;
  mutable std::vector<LevelData> levels_;
  mutable std::vector<std::map<std::vector<long long>, int>> key_maps_;  // per level
};

/// Boundary matrix D with (D1)/(D2) plus per-map resistance weights r in (0,1).
struct HarmonicStructure {
  Eigen::MatrixXd D;
  Eigen::VectorXd r;
  bool validated = false;

  int boundary_size() const { return static_cast<int>(D.rows()); }
  Eigen::MatrixXd laplacian0() const { return -D; }
  double r_word(const Word& w) const;
  void check_d1_d2() const;
};

std::pair<SelfSimilarStructure, HarmonicStructure> make_sierpinski_gasket(int N);
std::pair<SelfSimilarStructure, HarmonicStructure> make_vicsek(double r);

/// Max-abs entry of (level-1 Schur complement - level-0 Laplacian); marks the
/// structure validated when below 1e-12 * ||D||_max.
double validate_harmonic_structure(const SelfSimilarStructure& ss, HarmonicStructure& hs);

/// Per-map harmonic extension matrices A_i with (h o F_i)|_V0 = A_i h|_V0.
std::vector<Eigen::MatrixXd> extension_matrices(const SelfSimilarStructure& ss,
                                                const HarmonicStructure& hs);

double graph_energy(const SelfSimilarStructure& ss, const HarmonicStructure& hs, int n,
                    const Eigen::VectorXd& u);

Eigen::VectorXd harmonic_extension(const SelfSimilarStructure& ss, const HarmonicStructure& hs,
                                   const Eigen::VectorXd& u0, int n);

/// Level-n resistance network as a GraphForm; vertex measure spreads the
/// self-similar measure of each cell equally over its corners.
GraphForm level_network(const SelfSimilarStructure& ss, const HarmonicStructure& hs, int n);

/// 0-harmonic function represented by its boundary values.
struct HarmonicFunction {
  Eigen::VectorXd u0;
};

/// Word-indexed mass function at a fixed level, lex word order. Finitely
/// additive: masses of shorter words are descendant sums.
struct CellMeasure {
  int level = 0;
  std::vector<double> masses;

  double total() const;
  double mass_of(const SelfSimilarStructure& ss, const Word& w) const;
};

CellMeasure self_similar_measure(const SelfSimilarStructure& ss, const Eigen::VectorXd& weights,
                                 int n);

/// Cell energy measure of a 0-harmonic h: mass(w) = r_w^{-1} E0(h o F_w).
CellMeasure cell_energy_measure(const SelfSimilarStructure& ss, const HarmonicStructure& hs,
                                const HarmonicFunction& h, int n);

double resistance_metric(const SelfSimilarStructure& ss, const HarmonicStructure& hs, int n,
                         int v1, int v2);

/// Solves sum_i r_i^s = 1 by monotone bisection (tolerance 1e-12).
double hausdorff_weight_dimension(const HarmonicStructure& hs);

struct FwSpectrum {
  Eigen::MatrixXd map;                    // A_w on boundary vectors
  Eigen::VectorXcd quotient_eigenvalues;  // spectrum modulo constants
  Eigen::MatrixXcd quotient_eigenvectors;
  std::vector<double> full_eigenvalues;   // |eigenvalues| of A_w incl. constants
};

FwSpectrum fw_star_spectrum(const SelfSimilarStructure& ss, const HarmonicStructure& hs,
                            const Word& w);

/// Gamma(h1,h1)+Gamma(h2,h2) after joint energy normalization; total mass 1.
CellMeasure kusuoka_pair_measure(const SelfSimilarStructure& ss, const HarmonicStructure& hs,
                                 const HarmonicFunction& h1, const HarmonicFunction& h2, int n);

/// Candidate metric diameters of cells, per level up to max_level.
struct CellDiameters {
  int max_level = 0;
  std::vector<std::vector<double>> diam;  // diam[m][word index], m = 0..max_level

  double at(const SelfSimilarStructure& ss, const Word& w) const;
};

struct CellGraphMetric {
  CellDiameters diams;
  Eigen::MatrixXd vertex_dist;  // level-n pairwise metric (empty above 1500 vertices)
  bool degenerate = false;      // some cell had zero mass
};

/// Shortest-path metric on the level-n cell graph with per-cell edge weight
/// sqrt(r_w mu(K_w)); diameters of every cell with |w| <= n are read off
/// between the cell's boundary vertices.
CellGraphMetric cell_graph_metric(const SelfSimilarStructure& ss, const HarmonicStructure& hs,
                                  const CellMeasure& mu, int n);

/// Cell rescaling (theta_w, mu_w): theta_w = theta(w.) / sqrt(r_w mu(K_w)),
/// mu_w = mu(w.) / mu(K_w).
std::pair<CellDiameters, CellMeasure> rescale_cell_pair(const SelfSimilarStructure& ss,
                                                        const CellDiameters& theta,
                                                        const CellMeasure& mu,
                                                        const HarmonicStructure& hs,
                                                        const Word& w);

struct M2Report {
  double c_star = 0;
  std::vector<double> per_level;  // max two-sided ratio per level
  bool degenerate = false;        // zero mass or zero diameter encountered
  std::string argmax_word;
};

/// Finite-depth surrogate for membership in M2: the worst two-sided constant
/// in  C^-1 diam(K_w)^2 <= r_w mu(K_w) <= C diam(K_w)^2  over |w| <= max_level.
M2Report m2_constant(const SelfSimilarStructure& ss, const CellDiameters& theta,
                     const CellMeasure& mu, const HarmonicStructure& hs, int max_level);

struct SgDegenReport {
  int N = 0;
  int depth = 0;
  double phi_pullback_error = 0;        // max_j ||A_j phi - phi/(N+3)||_inf
  std::vector<double> chain_sums;       // direct sums over {2,3}^n, n = 1..depth
  std::vector<double> chain_ratios;     // successive ratios, should be 2/(N+3)
  std::vector<double> psi_energy_gap;   // E(psi - h_{0^n}) per n
  std::vector<double> psi_gap_ratios;   // measured contraction of the gap
  double expected_chain_ratio = 0;      // 2/(N+3)
  double expected_gap_ratio = 0;        // (1/(N+1))^2 from the spectral gap
  double diam_resistance = 0;           // resistance-diameter estimate used
  bool informational_only = false;      // N = 2: decay holds, conclusion does not apply
};

/// Degeneration probe behind the non-attainment argument for SG_N, N >= 3.
SgDegenReport sg_degeneration_probe(int N, int depth);

/// True for each level-n Vicsek cell whose closed cell meets one of the two
/// diagonals (exact integer test).
std::vector<bool> vicsek_cells_on_diagonals(const SelfSimilarStructure& ss, int n);

}  // namespace cwd
