#include "georank/numerics.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace georank;
using namespace georank::testing;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

Mat random_spd(Eigen::Index n, std::mt19937_64& rng) {
  const Mat G = randn(n, n, rng);
  return G * G.transpose() + static_cast<double>(n) * Mat::Identity(n, n);
}

}  // namespace

TEST(Numerics, SymAndSkew) {
  Mat X(2, 2);
  X << 1, 2, 3, 4;
  Mat s(2, 2), k(2, 2);
  s << 1, 2.5, 2.5, 4;
  k << 0, -0.5, 0.5, 0;
  EXPECT_EQ(sym(X), s);
  EXPECT_EQ(skew(X), k);
  EXPECT_EQ(sym(s), s);
  EXPECT_EQ(skew(k), k);
  EXPECT_EQ(skew(s), Mat::Zero(2, 2));
  EXPECT_EQ(sym(Mat::Zero(3, 3)), Mat::Zero(3, 3));
  std::mt19937_64 rng(1);
  const Mat R = randn(5, 5, rng);
  EXPECT_LE((sym(R) + skew(R) - R).norm(), 1e-15 * R.norm());
  EXPECT_EQ(code_of([] { sym(Mat::Zero(2, 3)); }), ErrorCode::Dimension);
  EXPECT_EQ(code_of([] { skew(Mat::Zero(3, 2)); }), ErrorCode::Dimension);
}

TEST(Numerics, SylvesterClosedForms) {
  const Mat A = 2.0 * Mat::Identity(2, 2);
  Mat C = Mat::Zero(2, 2);
  C.diagonal() << 4, 8;
  Mat expect = Mat::Zero(2, 2);
  expect.diagonal() << 1, 2;
  EXPECT_LE((solve_sylvester(A, A, C) - expect).norm(), 1e-14);

  Mat Ad = Mat::Zero(2, 2), Bd = Mat::Zero(2, 2);
  Ad.diagonal() << 1, 2;
  Bd.diagonal() << 3, 4;
  const Mat X = solve_sylvester(Ad, Bd, Mat::Ones(2, 2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(X(i, j), 1.0 / (Ad(i, i) + Bd(j, j)), 1e-14);
}

TEST(Numerics, SylvesterAgainstKroneckerSolve) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index m = 1 + trial % 20, n = 1 + (trial * 7) % 20;
    const Mat A = random_spd(m, rng), B = random_spd(n, rng);
    const Mat C = randn(m, n, rng);
    const Mat X = solve_sylvester(A, B, C);
    ASSERT_LE((A * X + X * B - C).norm(), 1e-10 * (A.norm() + B.norm()) * X.norm());
  }
  // independent oracle: explicit Kronecker system built here
  const Mat A = random_spd(4, rng);
  const Mat C = sym(randn(4, 4, rng));
  Mat K = Mat::Zero(16, 16);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) {
        K(j * 4 + i, j * 4 + k) += A(i, k);
        K(j * 4 + i, k * 4 + i) += A(k, j);
      }
  const Vec x = K.fullPivLu().solve(Eigen::Map<const Vec>(C.data(), 16));
  const Mat X = solve_sylvester(A, A, C);
  EXPECT_LE((Eigen::Map<const Vec>(X.data(), 16) - x).norm(), 1e-12 * x.norm());
  EXPECT_LE((X - X.transpose()).norm(), 1e-12 * X.norm());
}

TEST(Numerics, SylvesterOverlappingSpectraIsSingular) {
  Mat A = Mat::Zero(2, 2);
  A.diagonal() << 1, 2;
  EXPECT_EQ(code_of([&] { solve_sylvester(A, -A, Mat::Ones(2, 2)); }), ErrorCode::Singular);
}

TEST(Numerics, GeneralSylvesterResidual) {
  std::mt19937_64 rng(3);
  const Mat A1 = random_spd(3, rng), B1 = random_spd(2, rng), A2 = random_spd(3, rng), B2 = random_spd(2, rng);
  const Mat C = randn(3, 2, rng);
  const Mat X = solve_sylvester_general(A1, B1, A2, B2, C);
  EXPECT_LE((A1 * X * B1 + A2 * X * B2 - C).norm(), 1e-12 * C.norm() * 10);
}

TEST(Numerics, OrthComplement) {
  Mat e1 = Mat::Zero(2, 1);
  e1(0) = 1.0;
  const Mat c = orth_complement(e1);
  ASSERT_EQ(c.cols(), 1);
  EXPECT_NEAR(std::abs(c(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(c(0, 0), 0.0, 1e-15);
  const Mat full = orth_complement(Mat::Identity(3, 3));
  EXPECT_EQ(full.rows(), 3);
  EXPECT_EQ(full.cols(), 0);
  std::mt19937_64 rng(4);
  const Mat U = qf(randn(7, 3, rng));
  const Mat Up = orth_complement(U);
  Mat Q(7, 7);
  Q << U, Up;
  EXPECT_LE((Q.transpose() * Q - Mat::Identity(7, 7)).norm(), 1e-12);
  EXPECT_EQ(code_of([] { orth_complement(2.0 * Mat::Identity(3, 1)); }), ErrorCode::Precondition);
}

TEST(Numerics, GeneralizedEigen) {
  Mat H = Mat::Zero(2, 2), G = Mat::Zero(2, 2);
  H.diagonal() << 2, 6;
  G.diagonal() << 1, 2;
  const GenEig d = gen_sym_eig(H, G);
  EXPECT_NEAR(d.values(0), 3.0, 1e-14);
  EXPECT_NEAR(d.values(1), 2.0, 1e-14);

  std::mt19937_64 rng(5);
  const Mat S = sym(randn(4, 4, rng));
  const GenEig plain = gen_sym_eig(S, Mat::Identity(4, 4));
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  EXPECT_LE((plain.values - es.eigenvalues().reverse()).norm(), 1e-12);

  const Mat Gs = random_spd(4, rng);
  const GenEig g = gen_sym_eig(S, Gs);
  Eigen::SelfAdjointEigenSolver<Mat> ws(Gs);
  const Mat Wi = ws.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<Mat> white(sym(Wi * S * Wi));
  EXPECT_LE((g.values - white.eigenvalues().reverse()).norm(), 1e-10 * S.norm());
  EXPECT_LE((g.vectors.transpose() * Gs * g.vectors - Mat::Identity(4, 4)).norm(), 1e-10);
  EXPECT_LE((S * g.vectors - Gs * g.vectors * g.values.asDiagonal()).norm(), 1e-10 * S.norm());

  // congruence invariance
  const Mat Cg = randn(4, 4, rng) + 3.0 * Mat::Identity(4, 4);
  const GenEig c = gen_sym_eig(Mat(sym(Cg.transpose() * S * Cg)), Mat(sym(Cg.transpose() * Gs * Cg)));
  EXPECT_LE((c.values - g.values).norm(), 1e-10 * g.values.norm());

  Mat bad = Mat::Identity(2, 2);
  bad(1, 1) = 0.0;
  EXPECT_EQ(code_of([&] { gen_sym_eig(Mat::Identity(2, 2), bad); }), ErrorCode::Conditioning);
}

TEST(Numerics, SpdFunctions) {
  Mat B = Mat::Zero(2, 2);
  B.diagonal() << 4, 9;
  const SpdFunctions f = spd_functions(B);
  Mat s = Mat::Zero(2, 2);
  s.diagonal() << 2, 3;
  EXPECT_LE((f.sqrt - s).norm(), 1e-14);
  const SpdFunctions id = spd_functions(Mat::Identity(3, 3));
  EXPECT_LE((id.sqrt - Mat::Identity(3, 3)).norm(), 1e-14);
  EXPECT_LE((id.inverse - Mat::Identity(3, 3)).norm(), 1e-14);
  EXPECT_LE((id.inv_sqrt - Mat::Identity(3, 3)).norm(), 1e-14);
  std::mt19937_64 rng(6);
  const Mat R = random_spd(5, rng);
  const SpdFunctions r = spd_functions(R);
  EXPECT_LE((r.sqrt * r.sqrt - R).norm(), 1e-10 * R.norm());
  EXPECT_LE((r.inverse * R - Mat::Identity(5, 5)).norm(), 1e-10);
  EXPECT_LE((r.inv_sqrt * r.sqrt - Mat::Identity(5, 5)).norm(), 1e-10);
  EXPECT_EQ(code_of([] { spd_functions(-Mat::Identity(2, 2)); }), ErrorCode::Precondition);
}

TEST(Numerics, FiniteDifferences) {
  std::mt19937_64 rng(7);
  const Mat X = randn(3, 2, rng), V = randn(3, 2, rng);
  auto half_sq = [](const Mat& A) { return 0.5 * A.squaredNorm(); };
  EXPECT_NEAR(finite_diff_directional(half_sq, X, V, 1, 1e-4), inner(X, V), 1e-8);
  EXPECT_NEAR(finite_diff_directional(half_sq, X, V, 2, 1e-4), V.squaredNorm(), 1e-6);
  auto tr3 = [](const Mat& A) { return (A * A * A).trace(); };
  EXPECT_NEAR(finite_diff_directional(tr3, Mat::Identity(2, 2), Mat::Identity(2, 2), 1, 1e-4), 6.0, 1e-6);
  auto nan_fn = [](const Mat&) { return std::nan(""); };
  EXPECT_EQ(code_of([&] { finite_diff_directional(nan_fn, X, V, 1, 1e-4); }), ErrorCode::Evaluation);
}
