#pragma once

#include "georank/embedded.hpp"
#include "georank/quotient.hpp"
#include "georank/transport.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace georank {

EmbeddedTangent grad_embedded_from_quotient(const QuotientPoint& Z, const HorizontalVector& grad_h,
                                            Metric m);
HorizontalVector grad_quotient_from_embedded(const QuotientPoint& Z, const EmbeddedTangent& grad_f,
                                             Metric m);

struct SpectrumReport {
  Geometry geometry = Geometry::EmbeddedPsd;
  Metric metric = Metric::Euclidean;
  Vec eigenvalues;  // descending
  double gram_condition = 1.0;
  double grad_norm = 0.0;
};

// Riemannian Hessian spectrum on the tangent (embedded) or horizontal (quotient) space, from
// H v = lambda G v over a basis. A basis_seed mixes the basis by a random invertible map.
SpectrumReport hessian_spectrum_embedded(const EmbeddedPoint& pt, const Objective& obj,
                                         std::optional<std::uint64_t> basis_seed = std::nullopt);
SpectrumReport hessian_spectrum_quotient(const QuotientPoint& Z, const Objective& obj, Metric m,
                                         std::optional<std::uint64_t> basis_seed = std::nullopt);
// Dispatches on the geometry; quotient geometries use the canonical lift of pt.
SpectrumReport hessian_spectrum(const EmbeddedPoint& pt, const Objective& obj, Geometry g, Metric m,
                                std::optional<std::uint64_t> basis_seed = std::nullopt);

double embedded_grad_norm(const EmbeddedPoint& pt, const Objective& obj);
// Stationarity threshold 1e-8 (1 + sigma_1(egrad)) used before comparing Hessians.
double fosp_threshold(const EmbeddedPoint& pt, const Objective& obj);

struct SandwichReport {
  SandwichCoefficients coefficients;
  Vec eig_quotient, eig_embedded;
  Vec lower_margin, upper_margin;  // lambda_h - lower bound, upper bound - lambda_h
  double spectral_scale = 0.0;
  double min_margin = 0.0;  // min over k of both margins, divided by spectral_scale
  double slack_tol = 1e-8;
  bool sandwich_ok = false;
  bool spectra_equal = false;  // elementwise agreement, meaningful when alpha = beta = 1
  double spectra_max_rel_diff = 0.0;
  int identity_trials = 0;
  double identity_max_rel_err = 0.0;
  double identity_tol = 1e-8;
  bool identity_ok = false;
  double grad_norm = 0.0;
  double fosp_tol = 0.0;
  bool ok() const { return sandwich_ok && identity_ok; }
};

// Requires Z to be a stationary point; throws Precondition otherwise.
SandwichReport verify_sandwich(const QuotientPoint& Z, const Objective& obj, Metric m,
                               int identity_trials = 100, std::uint64_t seed = 0);

struct ClassifyTolerances {
  double tol_g = 1e-8;
  double tol_h = 1e-6;
  double tol_s = 1e-6;
};

struct StationaryClassification {
  bool is_fosp = false;
  bool is_sosp = false;
  bool is_strict_saddle = false;
  double min_eigenvalue = 0.0;
  double grad_norm = 0.0;
  double grad_threshold = 0.0;
  double spectrum_scale = 0.0;
  ClassifyTolerances tolerances;
};

StationaryClassification classify_point(const EmbeddedPoint& pt, const Objective& obj, Geometry g,
                                        Metric m, const ClassifyTolerances& tol = {});

struct TraceEntry {
  int iter;
  double f;
  double grad_norm;
};

struct FospResult {
  EmbeddedPoint point;
  bool converged = false;
  int iterations = 0;
  std::vector<TraceEntry> trace;
};

// Riemannian gradient descent with Armijo backtracking. Embedded geometries step with the
// projection retraction; quotient geometries step in factor space.
FospResult find_fosp(const Objective& obj, Geometry g, Metric m, const EmbeddedPoint& init,
                     int max_iter, double tol);

// All stationary truncations of f = 1/2 ||X - M||^2 onto r of the eigen (PSD) or singular
// (general) components of M.
std::vector<EmbeddedPoint> analytic_fosps(const Objective& approx, Eigen::Index r);

}  // namespace georank
