#include "georank/flows.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace georank;
using namespace georank::testing;

namespace {

const FlowSource kEmbPsd{Geometry::EmbeddedPsd, Metric::Euclidean};
const FlowSource kPsdQ1{Geometry::PsdQ1, Metric::Q1TwoGram};
const FlowSource kPsdQ2{Geometry::PsdQ2, Metric::Q2TwoBSqId};
const FlowSource kEmbGen{Geometry::EmbeddedGeneral, Metric::Euclidean};
const FlowSource kGenQ1{Geometry::GenQ1, Metric::G1CrossGrams};
const FlowSource kGenQ3{Geometry::GenQ3, Metric::G3GramId};

Mat proj(const Mat& U) { return U * U.transpose(); }

}  // namespace

TEST(Flows, FieldsMatchDisplayedFormulas) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 5; ++trial) {
    const Objective psd = random_objective(Kind::Psd, 6, 6, rng);
    const EmbeddedPoint p = random_point(Kind::Psd, 6, 6, 2, rng);
    const Mat G = psd.egrad(p.X);
    const Mat PU = proj(p.U);
    const Mat emb = -PU * G - G * PU + PU * G * PU;
    const double sc = 1.0 + emb.norm();
    EXPECT_LE((flow_field(p, psd, kEmbPsd) - emb).norm(), 1e-12 * sc);
    EXPECT_LE((flow_field(p, psd, kPsdQ2) - emb).norm(), 1e-12 * sc);
    EXPECT_LE((flow_field(p, psd, kPsdQ1) - (-PU * G - G * PU)).norm(), 1e-12 * sc);

    const Objective gen = random_objective(Kind::General, 5, 4, rng);
    const EmbeddedPoint q = random_point(Kind::General, 5, 4, 2, rng);
    const Mat H = gen.egrad(q.X);
    const Mat PV = proj(q.V);
    const Mat PUq = proj(q.U);
    const Mat embg = -PUq * H - H * PV + PUq * H * PV;
    const double sg = 1.0 + embg.norm();
    EXPECT_LE((flow_field(q, gen, kEmbGen) - embg).norm(), 1e-12 * sg);
    EXPECT_LE((flow_field(q, gen, kGenQ3) - embg).norm(), 1e-12 * sg);
    EXPECT_LE((flow_field(q, gen, kGenQ1) - (-PUq * H - H * PV)).norm(), 1e-12 * sg);
  }
}

TEST(Flows, DifferenceFieldIsResidualTerm) {
  std::mt19937_64 rng(52);
  const Objective psd = random_objective(Kind::Psd, 5, 5, rng);
  const EmbeddedPoint p = random_point(Kind::Psd, 5, 5, 2, rng);
  const Mat diff = flow_field(p, psd, kEmbPsd) - flow_field(p, psd, kPsdQ1);
  const Mat G = psd.egrad(p.X);
  EXPECT_LE((diff - proj(p.U) * G * proj(p.U)).norm(), 1e-12 * (1.0 + diff.norm()));
}

TEST(Flows, UnsupportedSourceRejected) {
  std::mt19937_64 rng(53);
  const Objective psd = random_objective(Kind::Psd, 5, 5, rng);
  const EmbeddedPoint p = random_point(Kind::Psd, 5, 5, 2, rng);
  try {
    flow_field(p, psd, {Geometry::PsdQ1, Metric::Q1Identity});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Enumeration);
  }
}

TEST(Flows, ZeroGradientGivesConstantTrace) {
  std::mt19937_64 rng(54);
  const EmbeddedPoint p = random_point(Kind::Psd, 4, 4, 2, rng);
  const Objective obj = make_matrix_approx(p.X, true);
  const FlowTrace tr = integrate_flow(p, obj, kPsdQ1, 1.0, 0.1);
  ASSERT_EQ(tr.states.size(), 11u);
  for (const Mat& X : tr.states) EXPECT_LE((X - p.X).norm(), 1e-12 * p.X.norm());
}

TEST(Flows, EnergyDecreasesTowardTruncation) {
  std::mt19937_64 rng(55);
  const FospInstance inst = fosp_instance(Kind::Psd, 5, 5, Vec::LinSpaced(4, 4.0, 1.0), {0, 1}, rng);
  const Objective obj = make_matrix_approx(inst.M, true);
  const EmbeddedPoint X0 = truncate_point(inst.X.X + 0.2 * sym(randn(5, 5, rng)), 2, Kind::Psd);
  for (const FlowSource& s : {kEmbPsd, kPsdQ1, kPsdQ2}) {
    const FlowTrace tr = integrate_flow(X0, obj, s, 60.0, 0.05);
    ASSERT_FALSE(tr.degenerate);
    for (size_t i = 1; i < tr.states.size(); ++i)
      EXPECT_LE(obj.value(tr.states[i]), obj.value(tr.states[i - 1]) + 1e-12);
    EXPECT_LE((tr.states.back() - inst.X.X).norm(), 1e-6) << to_string(s.geometry);
  }
}

TEST(Flows, RungeKuttaSelfConvergenceIsFourthOrder) {
  std::mt19937_64 rng(56);
  const Objective obj = random_objective(Kind::General, 5, 4, rng);
  const EmbeddedPoint X0 = random_point(Kind::General, 5, 4, 2, rng);
  const double T = 0.4;
  const double lip = obj.lipschitz_estimate(X0.X);
  const double dt = 0.2 / lip;
  const double n = std::round(T / dt);
  const double h = T / n;
  const Mat ref = integrate_flow(X0, obj, kGenQ1, T, h / 16).states.back();
  const double e1 = (integrate_flow(X0, obj, kGenQ1, T, h).states.back() - ref).norm();
  const double e2 = (integrate_flow(X0, obj, kGenQ1, T, h / 2).states.back() - ref).norm();
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 24.0);
}

TEST(Flows, IdenticalPairsGiveIdenticalTrajectories) {
  std::mt19937_64 rng(57);
  const Objective psd = random_objective(Kind::Psd, 5, 5, rng);
  const EmbeddedPoint p = random_point(Kind::Psd, 5, 5, 2, rng);
  const double dt = 0.05 / psd.lipschitz_estimate(p.X);
  EXPECT_LE(compare_flows(p, psd, kEmbPsd, kPsdQ2, 100 * dt, dt).max_deviation, 1e-9);
  const Objective gen = random_objective(Kind::General, 5, 4, rng);
  const EmbeddedPoint q = random_point(Kind::General, 5, 4, 2, rng);
  const double dg = 0.05 / gen.lipschitz_estimate(q.X);
  EXPECT_LE(compare_flows(q, gen, kEmbGen, kGenQ3, 100 * dg, dg).max_deviation, 1e-9);
}

TEST(Flows, FieldDifferenceAlongTrace) {
  std::mt19937_64 rng(58);
  const FospInstance inst = fosp_instance(Kind::General, 5, 4, Vec::LinSpaced(4, 4.0, 1.0), {0, 1}, rng);
  const Objective obj = make_matrix_approx(inst.M, false);
  const EmbeddedPoint X0 = truncate_point(inst.X.X + 0.3 * randn(5, 4, rng), 2, Kind::General);
  const FlowTrace tr = integrate_flow(X0, obj, kEmbGen, 2.0, 0.01);
  const FieldDifference fd = field_difference_along(tr, obj, kEmbGen, kGenQ1);
  EXPECT_EQ(fd.diff_norm.size(), tr.states.size());
  EXPECT_LE(fd.max_mismatch, 1e-10);
  EXPECT_GT(compare_flows(X0, obj, kEmbGen, kGenQ1, 2.0, 0.01).max_deviation, 1e-6);
}

TEST(Flows, RankCollapseStopsWithPartialTrace) {
  Mat M = Mat::Zero(3, 3);
  M(0, 0) = 1.0;
  const Objective obj = make_matrix_approx(M, true);
  Mat X = Mat::Zero(3, 3);
  X(0, 0) = 1.0;
  X(1, 1) = 0.5;
  const FlowTrace tr = integrate_flow(embed_point(X, 2, Kind::Psd), obj, kEmbPsd, 40.0, 0.5);
  EXPECT_TRUE(tr.degenerate);
  EXPECT_GT(tr.states.size(), 10u);
  EXPECT_LT(tr.states.size(), 81u);
}

TEST(Flows, CsvExport) {
  FlowTrace tr;
  tr.times = {0.0, 0.5};
  Mat A(2, 1), B(2, 1);
  A << 1.0, 2.0;
  B << 3.0, 4.0;
  tr.states = {A, B};
  std::ostringstream os;
  write_trace_csv(tr, os);
  EXPECT_EQ(os.str(), "0,1,2\n0.5,3,4\n");
}
