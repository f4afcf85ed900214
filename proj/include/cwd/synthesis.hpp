#pragma once

#include <span>

#include "cwd/filling.hpp"

namespace cwd {

/// sigma: vertex -> [0, 1/4), supported on V_B for the local constructor.
struct SigmaFunction {
  std::vector<double> value;  // dense over all vertices
  int parent = -1;            // local constructor's B, -1 once patched
  std::vector<int> support;   // V_B for locals
  bool vacuous = false;       // B had no exterior beyond 2B
  double energy_ratio = 0;    // sum sigma^2 C / C(B) for locals (reported)

  double max_value() const;
  bool in_range() const { return max_value() < 0.25; }
};

/// GraphForm over the vertices of one filling level: node i corresponds to
/// vertex level_range(level).first + i, conductances min(C,C') across
/// horizontal edges, vertex measure C.
GraphForm level_form(const FillingGraph& g, int level, const GentleFunction& gentle);

/// Discrete gradient of the equilibrium potential of
/// Cap(B(x_B, 1.1 r_B), B(x_B, 1.9 r_B)^c) on the level-(k+1) form,
/// zeroed outside V_B = { B' : B' meets 3B }.
SigmaFunction discrete_gradient_sigma(const FillingGraph& g, const GraphForm& form,
                                      const GentleFunction& gentle, int B);

/// Pointwise max of local sigmas; zero on levels 0 and 1.
SigmaFunction patch_sigma(const FillingGraph& g, std::span<const SigmaFunction> locals);

struct S1Result {
  double min_sum = 0;  // +inf when vacuous
  bool vacuous = false;
  int worst_parent = -1;
  bool pass() const { return vacuous || min_sum >= 1.0; }
};

/// (S1): min over parents B and paths in Gamma_{k+1}(B) of sum sigma(B_i).
S1Result check_S1(const FillingGraph& g, const SigmaFunction& sigma);

struct SynthesisResult {
  WeightFunction weight;
  double eta0 = 0;
  double eta_minus = 0;
  double K_h = 1, K_v = 1;
  int D_h = 1, D_v = 1;
  double s2_worst = 0;         // max_B sum sigma^beta C / C(B)
  double sf4_residual = 0;     // worst relative normalization defect
  std::vector<double> omega;   // per parent vertex id
};

/// Weight synthesis pipeline: tau = sigma v eta-, neighborhood smoothing,
/// level-by-level correction, and per-parent normalization by bisection so
/// that sum over children of rho^beta C equals C(B) to 1e-10 relative.
SynthesisResult synthesize_weight(const FillingGraph& g, const GentleFunction& gentle,
                                  const SigmaFunction& sigma, double beta);

struct LevelMeasure {
  int level = 0;
  std::vector<double> masses;  // per vertex of that level, id order
  double total = 0;
};

struct MeasureResult {
  std::vector<LevelMeasure> levels;  // mu_n for every level
  double worst_level_drift = 0;      // max |total_{n+1}/total_n - 1|
};

/// mu_n = sum over level-n vertices of pi^beta C delta_{x_B}; drift beyond
/// the tolerance raises CompatibilityDrift.
MeasureResult measure_from_weights(const FillingGraph& g, const WeightFunction& w,
                                   const GentleFunction& gentle, double beta,
                                   double drift_tol = 1e-8);

/// Mass of B(x_point, r) under the deepest-level atomic measure.
double ball_mass(const FillingGraph& g, const MeasureResult& m, int point, double r);

/// K2 = worst two-sided ratio between descendant sums of pi^beta C and the
/// parent value, over all vertices and depths.
double compatibility_check(const FillingGraph& g, const WeightFunction& w,
                           const GentleFunction& gentle, double beta);

}  // namespace cwd
