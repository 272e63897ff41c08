#include "georank/landscape.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace georank;
using namespace georank::testing;

namespace {

Eigen::Index p1_for(Geometry g) { return kind_of(g) == Kind::Psd ? 6 : 5; }
Eigen::Index p2_for(Geometry g) { return kind_of(g) == Kind::Psd ? 6 : 4; }

double tangent_norm(const EmbeddedTangent& a) { return std::sqrt(tangent_inner(a, a)); }

Mat diag3(double a, double b, double c) {
  return Vec((Vec(3) << a, b, c).finished()).asDiagonal();
}

}  // namespace

TEST(Landscape, GradientConversionWorkedExample) {
  Mat Y(2, 1);
  Y << 1.0, 0.0;
  Mat M = Mat::Zero(2, 2);
  M(0, 0) = 3.0;
  M(1, 1) = 1.0;
  const Objective obj = make_matrix_approx(M, true);
  const QuotientPoint Z = make_quotient_point(Geometry::PsdQ1, {Y});
  const FactorVector gh = riem_grad_quotient(Z, obj, Metric::Q1Identity);
  EXPECT_NEAR(gh.c[0](0, 0), -4.0, 1e-14);
  EXPECT_NEAR(gh.c[0](1, 0), 0.0, 1e-14);
  const Mat gf = ambient(Z.base, grad_embedded_from_quotient(Z, gh, Metric::Q1Identity));
  Mat expect = Mat::Zero(2, 2);
  expect(0, 0) = -2.0;
  EXPECT_LE((gf - expect).norm(), 1e-14);
  const FactorVector back =
      grad_quotient_from_embedded(Z, riem_grad_embedded(Z.base, obj), Metric::Q1Identity);
  EXPECT_LE((back - gh).frob_norm(), 1e-14);
}

TEST(Landscape, ZeroGradientConvertsToZero) {
  std::mt19937_64 rng(31);
  for (auto [g, m] : quotient_pairs()) {
    const QuotientPoint Z = random_quotient(g, p1_for(g), p2_for(g), 2, rng);
    EXPECT_LE(tangent_norm(grad_embedded_from_quotient(Z, zero_vector(Z), m)), 1e-300);
    EXPECT_LE(grad_quotient_from_embedded(Z, tangent_zero(Z.base), m).frob_norm(), 1e-300);
  }
}

TEST(Landscape, GradientConversionIdentitiesAtRandomPoints) {
  std::mt19937_64 rng(32);
  for (auto [g, m] : quotient_pairs()) {
    const Objective obj = random_objective(kind_of(g), p1_for(g), p2_for(g), rng);
    for (int trial = 0; trial < 10; ++trial) {
      const QuotientPoint Z = random_quotient(g, p1_for(g), p2_for(g), 2, rng);
      const EmbeddedTangent gf = riem_grad_embedded(Z.base, obj);
      const FactorVector gh = riem_grad_quotient(Z, obj, m);
      const EmbeddedTangent conv = grad_embedded_from_quotient(Z, gh, m);
      EXPECT_LE(tangent_norm(tangent_axpy(-1.0, conv, gf)), 1e-10 * tangent_norm(gf))
          << to_string(g) << " " << to_string(m);
      const FactorVector back = grad_quotient_from_embedded(Z, gf, m);
      EXPECT_LE((back - gh).frob_norm(), 1e-10 * gh.frob_norm()) << to_string(g) << " " << to_string(m);
    }
  }
}

TEST(Landscape, EmbeddedSpectrumWorkedExample) {
  Mat M = Mat::Zero(2, 2);
  M(0, 0) = 3.0;
  M(1, 1) = 1.0;
  const Objective obj = make_matrix_approx(M, true);
  Mat X = Mat::Zero(2, 2);
  X(0, 0) = 3.0;
  const SpectrumReport rep = hessian_spectrum_embedded(embed_point(X, 1, Kind::Psd), obj);
  ASSERT_EQ(rep.eigenvalues.size(), 2);
  // S direction: 1. Unit D direction: 1 + 2 <grad f, E22> / (2 * 3) = 2/3.
  EXPECT_NEAR(rep.eigenvalues(0), 1.0, 1e-12);
  EXPECT_NEAR(rep.eigenvalues(1), 2.0 / 3.0, 1e-12);
}

TEST(Landscape, ZeroObjectiveHasZeroSpectrum) {
  std::mt19937_64 rng(33);
  const Objective zero(
      5, 5, true, [](const Mat&) { return 0.0; }, [](const Mat& X) -> Mat { return Mat::Zero(X.rows(), X.cols()); },
      [](const Mat& X, const Mat&) -> Mat { return Mat::Zero(X.rows(), X.cols()); });
  const EmbeddedPoint pt = random_point(Kind::Psd, 5, 5, 2, rng);
  for (Geometry g : {Geometry::EmbeddedPsd, Geometry::PsdQ1, Geometry::PsdQ2})
    for (Metric m : metrics_for(g)) {
      const SpectrumReport rep = hessian_spectrum(pt, zero, g, m);
      EXPECT_EQ(rep.eigenvalues.size(), manifold_dim(g, 5, 5, 2));
      EXPECT_LE(rep.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
    }
}

TEST(Landscape, SpectrumIndependentOfBasis) {
  std::mt19937_64 rng(34);
  for (Geometry g : all_geometries()) {
    const Objective obj = random_objective(kind_of(g), p1_for(g), p2_for(g), rng);
    const EmbeddedPoint pt = random_point(kind_of(g), p1_for(g), p2_for(g), 2, rng);
    for (Metric m : metrics_for(g)) {
      const Vec a = hessian_spectrum(pt, obj, g, m).eigenvalues;
      const Vec b = hessian_spectrum(pt, obj, g, m, 77).eigenvalues;
      EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-8 * a.cwiseAbs().maxCoeff()) << to_string(g);
    }
  }
}

TEST(Landscape, SpectrumLengthsMatchDimension) {
  std::mt19937_64 rng(35);
  for (Geometry g : all_geometries()) {
    const Objective obj = random_objective(kind_of(g), p1_for(g), p2_for(g), rng);
    const EmbeddedPoint pt = random_point(kind_of(g), p1_for(g), p2_for(g), 3, rng);
    for (Metric m : metrics_for(g)) {
      const SpectrumReport rep = hessian_spectrum(pt, obj, g, m);
      EXPECT_EQ(rep.eigenvalues.size(), manifold_dim(g, p1_for(g), p2_for(g), 3));
      for (Eigen::Index k = 0; k + 1 < rep.eigenvalues.size(); ++k)
        EXPECT_GE(rep.eigenvalues(k), rep.eigenvalues(k + 1));
    }
  }
}

TEST(Landscape, AnalyticFospsOfDiagonalTarget) {
  const Objective obj = make_matrix_approx(diag3(3, 2, 1), true);
  const auto pts = analytic_fosps(obj, 1);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_LE((pts[0].X - diag3(3, 0, 0)).norm(), 1e-12);
  EXPECT_LE((pts[1].X - diag3(0, 2, 0)).norm(), 1e-12);
  EXPECT_LE((pts[2].X - diag3(0, 0, 1)).norm(), 1e-12);
  for (const auto& pt : pts)
    EXPECT_TRUE(classify_point(pt, obj, Geometry::EmbeddedPsd, Metric::Euclidean).is_fosp);
  const auto full = analytic_fosps(obj, 3);
  ASSERT_EQ(full.size(), 1u);
  EXPECT_LE((full[0].X - diag3(3, 2, 1)).norm(), 1e-12);
}

TEST(Landscape, AnalyticFospsRejectsRepeatedSpectrum) {
  const Objective obj = make_matrix_approx(diag3(3, 2, 2), true);
  try {
    analytic_fosps(obj, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Ambiguity);
  }
}

TEST(Landscape, ClassificationAgreesAcrossGeometries) {
  std::mt19937_64 rng(36);
  const Objective psd = make_matrix_approx(diag3(3, 2, 1), true);
  Mat Mg = Mat::Zero(4, 3);
  Mg(0, 0) = 3.0;
  Mg(1, 1) = 2.0;
  Mg(2, 2) = 1.0;
  const Objective gen = make_matrix_approx(Mg, false);
  for (const Objective* obj : {&psd, &gen}) {
    const Kind kind = obj->symmetric() ? Kind::Psd : Kind::General;
    const auto pts = analytic_fosps(*obj, 1);
    ASSERT_EQ(pts.size(), 3u);
    for (size_t i = 0; i < pts.size(); ++i)
      for (Geometry g : all_geometries()) {
        if (kind_of(g) != kind) continue;
        for (Metric m : metrics_for(g)) {
          const StationaryClassification c = classify_point(pts[i], *obj, g, m);
          EXPECT_TRUE(c.is_fosp) << to_string(g) << " " << to_string(m) << " " << i;
          EXPECT_EQ(c.is_sosp, i == 0) << to_string(g) << " " << to_string(m) << " " << i;
          EXPECT_EQ(c.is_strict_saddle, i != 0) << to_string(g) << " " << to_string(m) << " " << i;
        }
      }
  }
  const EmbeddedPoint off = random_point(Kind::Psd, 3, 3, 1, rng);
  const StationaryClassification c = classify_point(off, psd, Geometry::EmbeddedPsd, Metric::Euclidean);
  EXPECT_FALSE(c.is_fosp);
  EXPECT_FALSE(c.is_sosp);
  EXPECT_FALSE(c.is_strict_saddle);
}

TEST(Landscape, SandwichAtStationaryPoints) {
  std::mt19937_64 rng(37);
  Vec d(4);
  d << 5.0, 3.5, 2.0, 0.4;
  for (auto [g, m] : quotient_pairs()) {
    for (const std::vector<int>& subset : {std::vector<int>{0, 1}, std::vector<int>{0, 3}, std::vector<int>{2, 3}}) {
      const FospInstance inst = fosp_instance(kind_of(g), p1_for(g), p2_for(g), d, subset, rng);
      const Objective obj = make_matrix_approx(inst.M, kind_of(g) == Kind::Psd);
      const QuotientPoint Z = act(lift_point(inst.X, g), random_group_element(g, 2, rng));
      const SandwichReport rep = verify_sandwich(Z, obj, m, 100, 5);
      EXPECT_TRUE(rep.sandwich_ok) << to_string(g) << " " << to_string(m) << " margin " << rep.min_margin;
      EXPECT_TRUE(rep.identity_ok) << to_string(g) << " " << to_string(m) << " err "
                                   << rep.identity_max_rel_err;
      if (rep.coefficients.alpha == rep.coefficients.beta || (m == Metric::Q2TwoBSqId || m == Metric::G3GramId))
        EXPECT_TRUE(rep.spectra_equal) << to_string(g) << " " << to_string(m);
    }
  }
}

TEST(Landscape, SandwichRequiresStationaryPoint) {
  std::mt19937_64 rng(38);
  const QuotientPoint Z = random_quotient(Geometry::PsdQ1, 5, 5, 2, rng);
  const Objective obj = random_objective(Kind::Psd, 5, 5, rng);
  try {
    verify_sandwich(Z, obj, Metric::Q1Identity);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Precondition);
  }
}

TEST(Landscape, FindFospReachesATruncation) {
  std::mt19937_64 rng(39);
  const Objective obj = make_matrix_approx(diag3(3, 2, 1), true);
  const auto fosps = analytic_fosps(obj, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const EmbeddedPoint init = random_point(Kind::Psd, 3, 3, 1, rng);
    const FospResult res = find_fosp(obj, Geometry::EmbeddedPsd, Metric::Euclidean, init, 5000, 1e-10);
    ASSERT_TRUE(res.converged);
    double best = 1e300;
    for (const auto& p : fosps) best = std::min(best, (p.X - res.point.X).norm());
    EXPECT_LE(best, 1e-6);
    for (size_t k = 1; k < res.trace.size(); ++k) EXPECT_LE(res.trace[k].f, res.trace[k - 1].f);
  }
  // Global minimum value is the truncation residual (4 + 1) / 2.
  Mat X0 = diag3(2.5, 0.3, 0.1);
  const FospResult res =
      find_fosp(obj, Geometry::EmbeddedPsd, Metric::Euclidean, truncate_point(X0, 1, Kind::Psd), 5000, 1e-10);
  EXPECT_NEAR(res.trace.back().f, 2.5, 1e-12);
}

TEST(Landscape, FindFospStartingAtStationaryPoint) {
  const Objective obj = make_matrix_approx(diag3(3, 2, 1), true);
  const auto fosps = analytic_fosps(obj, 1);
  const FospResult res = find_fosp(obj, Geometry::EmbeddedPsd, Metric::Euclidean, fosps[1], 100, 1e-8);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 0);
}

TEST(Landscape, FindFospOnQuotientGeometries) {
  std::mt19937_64 rng(40);
  for (auto [g, m] : quotient_pairs()) {
    const FospInstance inst =
        fosp_instance(kind_of(g), p1_for(g), p2_for(g), Vec::LinSpaced(4, 4.0, 1.0), {0, 1}, rng);
    const Objective obj = make_matrix_approx(inst.M, kind_of(g) == Kind::Psd);
    const EmbeddedPoint init = random_point(kind_of(g), p1_for(g), p2_for(g), 2, rng);
    const FospResult res = find_fosp(obj, g, m, init, 20000, 1e-6);
    EXPECT_TRUE(res.converged) << to_string(g) << " " << to_string(m) << " iters " << res.iterations
                               << " grad " << res.trace.back().grad_norm << " f " << res.trace.back().f;
    for (size_t k = 1; k < res.trace.size(); ++k) ASSERT_LE(res.trace[k].f, res.trace[k - 1].f);
  }
}

TEST(Landscape, FindFospOnMaskedCompletion) {
  std::mt19937_64 rng(41);
  const Mat A = randn(6, 2, rng);
  const Mat B = randn(5, 2, rng);
  const Mat M = A * B.transpose();
  Mat mask = Mat::Ones(6, 5);
  mask(0, 0) = mask(2, 3) = mask(5, 1) = 0.0;
  const Objective obj = make_masked_completion(M, mask, false);
  const EmbeddedPoint init = truncate_point(M + 0.1 * randn(6, 5, rng), 2, Kind::General);
  const FospResult res = find_fosp(obj, Geometry::EmbeddedGeneral, Metric::Euclidean, init, 5000, 1e-8);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.trace.back().grad_norm, 1e-8);
}
