#include "georank/quotient.hpp"

#include <cmath>

namespace georank {

namespace {

constexpr double kRankGap = 1e-10;

size_t factor_count(Geometry g) {
  switch (g) {
    case Geometry::PsdQ1:
      return 1;
    case Geometry::PsdQ2:
    case Geometry::GenQ1:
    case Geometry::GenQ3:
      return 2;
    case Geometry::GenQ2:
      return 3;
    default:
      return 0;
  }
}

Mat spd_inverse(const Mat& A) {
  Eigen::LLT<Mat> llt(sym(A));
  require(llt.info() == Eigen::Success, ErrorCode::Precondition,
          "weight matrix is not positive definite");
  return sym(llt.solve(Mat::Identity(A.rows(), A.cols())));
}

void check_full_rank(const Mat& A, const char* name) {
  require(A.allFinite(), ErrorCode::Evaluation, std::string(name) + " has non-finite entries");
  const Vec s = singular_values(A);
  require(s.size() == A.cols() && s(s.size() - 1) > kRankGap * s(0), ErrorCode::Rank,
          std::string(name) + " is not of full column rank");
}

void check_stiefel(const Mat& U, const char* name) {
  const Eigen::Index r = U.cols();
  require((U.transpose() * U - Mat::Identity(r, r)).cwiseAbs().maxCoeff() <= 1e-10,
          ErrorCode::Precondition, std::string(name) + " does not have orthonormal columns");
}

void check_spd(const Mat& B) {
  require(B.rows() == B.cols(), ErrorCode::Dimension, "B must be square");
  require((B - B.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, B.cwiseAbs().maxCoeff()),
          ErrorCode::Symmetry, "B must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(B), Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() > kRankGap * es.eigenvalues().maxCoeff(), ErrorCode::Precondition,
          "B must be positive definite");
}

Mat perp_proj(const Mat& U, const Mat& A) { return A - U * (U.transpose() * A); }

// Symmetric basis {E_ii} U {E_ij + E_ji}.
std::vector<Mat> sym_basis(Eigen::Index r) {
  std::vector<Mat> out;
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = j; i < r; ++i) {
      Mat E = Mat::Zero(r, r);
      E(i, j) = 1.0;
      E(j, i) = 1.0;
      out.push_back(E);
    }
  return out;
}

// Skew basis {E_ij - E_ji}, i < j.
std::vector<Mat> skew_basis(Eigen::Index r) {
  std::vector<Mat> out;
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < j; ++i) {
      Mat E = Mat::Zero(r, r);
      E(i, j) = 1.0;
      E(j, i) = -1.0;
      out.push_back(E);
    }
  return out;
}

std::vector<Mat> unit_basis(Eigen::Index m, Eigen::Index n) {
  std::vector<Mat> out;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) {
      Mat E = Mat::Zero(m, n);
      E(i, j) = 1.0;
      out.push_back(E);
    }
  return out;
}

void set_cached(QuotientPoint& Z) {
  const Mat& U = Z.base.U;
  const Mat& V = Z.base.V;
  switch (Z.geom) {
    case Geometry::PsdQ1:
      Z.P1 = U.transpose() * Z.f[0];
      Z.P2 = Mat();
      break;
    case Geometry::GenQ1:
      Z.P1 = U.transpose() * Z.f[0];
      Z.P2 = V.transpose() * Z.f[1];
      break;
    default:
      Z.P1 = Mat();
      Z.P2 = Mat();
  }
}

// Solves skew(A K C) = Rhs over skew K; Rhs is skew.
Mat solve_skew(const Mat& A, const Mat& C, const Mat& Rhs) {
  const Eigen::Index r = A.rows();
  const std::vector<Mat> basis = skew_basis(r);
  const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
  if (n == 0) return Mat::Zero(r, r);
  Mat Sys(n, n);
  Vec rhs(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    const Mat img = skew(A * basis[l] * C);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < r; ++j)
      for (Eigen::Index i = 0; i < j; ++i) Sys(k++, l) = img(i, j);
  }
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < j; ++i) rhs(k++) = Rhs(i, j);
  Eigen::FullPivLU<Mat> lu(Sys);
  require(lu.isInvertible(), ErrorCode::Singular, "vertical component system is singular");
  const Vec x = lu.solve(rhs);
  Mat K = Mat::Zero(r, r);
  for (Eigen::Index l = 0; l < n; ++l) K += x(l) * basis[l];
  return K;
}

}  // namespace

FactorVector& FactorVector::operator+=(const FactorVector& o) {
  require(c.size() == o.c.size(), ErrorCode::Dimension, "factor vector size mismatch");
  for (size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
  return *this;
}

FactorVector& FactorVector::operator-=(const FactorVector& o) {
  require(c.size() == o.c.size(), ErrorCode::Dimension, "factor vector size mismatch");
  for (size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
  return *this;
}

FactorVector& FactorVector::operator*=(double a) {
  for (auto& m : c) m *= a;
  return *this;
}

double FactorVector::frob_inner(const FactorVector& o) const {
  require(c.size() == o.c.size(), ErrorCode::Dimension, "factor vector size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < c.size(); ++i) s += inner(c[i], o.c[i]);
  return s;
}

FactorVector operator+(FactorVector a, const FactorVector& b) { return a += b; }
FactorVector operator-(FactorVector a, const FactorVector& b) { return a -= b; }
FactorVector operator*(double s, FactorVector a) { return a *= s; }

void check_metric(Geometry g, Metric m) {
  require(metric_belongs(g, m), ErrorCode::Enumeration,
          "metric " + to_string(m) + " is not defined for geometry " + to_string(g));
}

Mat represented(Geometry g, const std::vector<Mat>& f) {
  require(f.size() == factor_count(g), ErrorCode::Variant, "wrong number of factors for geometry");
  switch (g) {
    case Geometry::PsdQ1:
      return f[0] * f[0].transpose();
    case Geometry::PsdQ2:
      return f[0] * f[1] * f[0].transpose();
    case Geometry::GenQ1:
      return f[0] * f[1].transpose();
    case Geometry::GenQ2:
      return f[0] * f[1] * f[2].transpose();
    case Geometry::GenQ3:
      return f[0] * f[1].transpose();
    default:
      throw Error(ErrorCode::Variant, "not a quotient geometry");
  }
}

QuotientPoint make_quotient_point(Geometry g, std::vector<Mat> f) {
  require(is_quotient(g), ErrorCode::Variant, "not a quotient geometry");
  require(f.size() == factor_count(g), ErrorCode::Variant, "wrong number of factors for geometry");
  QuotientPoint Z;
  Z.geom = g;
  switch (g) {
    case Geometry::PsdQ1: {
      check_full_rank(f[0], "Y");
      Eigen::JacobiSVD<Mat> svd(f[0], Eigen::ComputeThinU);
      const Mat U = svd.matrixU();
      Z.base = point_from_bases(sym(f[0] * f[0].transpose()), U, U, Kind::Psd);
      break;
    }
    case Geometry::PsdQ2: {
      check_stiefel(f[0], "U");
      require(f[1].rows() == f[0].cols(), ErrorCode::Dimension, "B must be r x r");
      check_spd(f[1]);
      f[1] = sym(f[1]);
      Z.base = point_from_bases(sym(f[0] * f[1] * f[0].transpose()), f[0], f[0], Kind::Psd);
      break;
    }
    case Geometry::GenQ1: {
      require(f[0].cols() == f[1].cols(), ErrorCode::Dimension, "L and R must have r columns");
      check_full_rank(f[0], "L");
      check_full_rank(f[1], "R");
      Z.base = truncate_point(f[0] * f[1].transpose(), f[0].cols(), Kind::General);
      break;
    }
    case Geometry::GenQ2: {
      check_stiefel(f[0], "U");
      check_stiefel(f[2], "V");
      require(f[1].rows() == f[0].cols() && f[2].cols() == f[0].cols(), ErrorCode::Dimension,
              "factor shapes disagree");
      check_spd(f[1]);
      f[1] = sym(f[1]);
      Z.base = point_from_bases(f[0] * f[1] * f[2].transpose(), f[0], f[2], Kind::General);
      break;
    }
    case Geometry::GenQ3: {
      check_stiefel(f[0], "U");
      require(f[0].cols() == f[1].cols(), ErrorCode::Dimension, "U and Y must have r columns");
      check_full_rank(f[1], "Y");
      Eigen::JacobiSVD<Mat> svd(f[1], Eigen::ComputeThinU);
      Z.base = point_from_bases(f[0] * f[1].transpose(), f[0], svd.matrixU(), Kind::General);
      break;
    }
    default:
      break;
  }
  Z.f = std::move(f);
  set_cached(Z);
  return Z;
}

QuotientPoint lift_point(const EmbeddedPoint& pt, Geometry g) {
  require(is_quotient(g), ErrorCode::Variant, "not a quotient geometry");
  require(kind_of(g) == pt.kind, ErrorCode::Variant,
          "geometry " + to_string(g) + " is incompatible with the point kind");
  const Mat& U = pt.U;
  const Mat& V = pt.V;
  const Mat& S = pt.Sigma;
  std::vector<Mat> f;
  const bool spd_sigma = (S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * S.norm() &&
                         Eigen::SelfAdjointEigenSolver<Mat>(sym(S)).eigenvalues().minCoeff() > 0.0;
  switch (g) {
    case Geometry::PsdQ1:
      f = {U * spd_functions(sym(S)).sqrt};
      break;
    case Geometry::PsdQ2:
      f = {U, sym(S)};
      break;
    case Geometry::GenQ1:
      if (spd_sigma) {
        const Mat root = spd_functions(sym(S)).sqrt;
        f = {U * root, V * root};
      } else {
        f = {U * S, V};
      }
      break;
    case Geometry::GenQ2:
      require(spd_sigma, ErrorCode::Precondition, "gen-q2 lift needs a positive definite Sigma");
      f = {U, sym(S), V};
      break;
    case Geometry::GenQ3:
      f = {U, V * S.transpose()};
      break;
    default:
      break;
  }
  QuotientPoint Z = make_quotient_point(g, f);
  const double scale = std::max(pt.X.norm(), 1e-300);
  require((represented(g, Z.f) - pt.X).norm() <= 1e-9 * scale, ErrorCode::Precondition,
          "lifted factors do not reproduce the point");
  Z.base = pt;
  set_cached(Z);
  return Z;
}

bool same_fiber(const QuotientPoint& a, const QuotientPoint& b) {
  require(a.geom == b.geom, ErrorCode::Variant, "same_fiber: variant mismatch");
  const Mat Xa = represented(a.geom, a.f);
  const Mat Xb = represented(b.geom, b.f);
  require(Xa.rows() == Xb.rows() && Xa.cols() == Xb.cols() && a.rank() == b.rank(),
          ErrorCode::Dimension, "same_fiber: shape mismatch");
  return (Xa - Xb).norm() <= 1e-8 * std::max(Xa.norm(), Xb.norm());
}

Weights metric_weights(const QuotientPoint& Z, Metric m) {
  check_metric(Z.geom, m);
  const Eigen::Index r = Z.rank();
  const Mat I = Mat::Identity(r, r);
  Weights w{I, I, I, I};
  switch (m) {
    case Metric::Q1Identity:
    case Metric::G3IdId:
      break;
    case Metric::Q1TwoGram: {
      const Mat G = sym(Z.f[0].transpose() * Z.f[0]);
      w.W = 2.0 * G;
      w.Winv = 0.5 * spd_inverse(G);
      break;
    }
    case Metric::Q1InvGram: {
      const Mat G = sym(Z.f[0].transpose() * Z.f[0]);
      w.W = spd_inverse(G);
      w.Winv = G;
      break;
    }
    case Metric::Q2IdInvB:
    case Metric::G2IdInvB:
      w.W = spd_inverse(Z.f[1]);
      w.Winv = Z.f[1];
      break;
    case Metric::Q2TwoBSqId: {
      const Mat& B = Z.f[1];
      const Mat Binv = spd_inverse(B);
      w.V = 2.0 * sym(B * B);
      w.Vinv = 0.5 * sym(Binv * Binv);
      break;
    }
    case Metric::G1InvGrams: {
      const Mat GL = sym(Z.f[0].transpose() * Z.f[0]);
      const Mat GR = sym(Z.f[1].transpose() * Z.f[1]);
      w.W = spd_inverse(GL);
      w.Winv = GL;
      w.V = spd_inverse(GR);
      w.Vinv = GR;
      break;
    }
    case Metric::G1CrossGrams: {
      const Mat GL = sym(Z.f[0].transpose() * Z.f[0]);
      const Mat GR = sym(Z.f[1].transpose() * Z.f[1]);
      w.W = GR;
      w.Winv = spd_inverse(GR);
      w.V = GL;
      w.Vinv = spd_inverse(GL);
      break;
    }
    case Metric::G3IdInvGram: {
      const Mat G = sym(Z.f[1].transpose() * Z.f[1]);
      w.W = spd_inverse(G);
      w.Winv = G;
      break;
    }
    case Metric::G3GramId: {
      const Mat G = sym(Z.f[1].transpose() * Z.f[1]);
      w.V = G;
      w.Vinv = spd_inverse(G);
      break;
    }
    case Metric::Euclidean:
      break;
  }
  return w;
}

Weights metric_weights_derivative(const QuotientPoint& Z, Metric m, const FactorVector& theta) {
  check_metric(Z.geom, m);
  const Weights w = metric_weights(Z, m);
  const Eigen::Index r = Z.rank();
  const Mat O = Mat::Zero(r, r);
  Mat dW = O, dV = O;
  auto gram_dot = [](const Mat& A, const Mat& dA) -> Mat {
    return dA.transpose() * A + A.transpose() * dA;
  };
  switch (m) {
    case Metric::Q1TwoGram:
      dW = 2.0 * gram_dot(Z.f[0], theta.c[0]);
      break;
    case Metric::Q1InvGram:
      dW = -w.W * gram_dot(Z.f[0], theta.c[0]) * w.W;
      break;
    case Metric::Q2IdInvB:
    case Metric::G2IdInvB:
      dW = -w.W * theta.c[1] * w.W;
      break;
    case Metric::Q2TwoBSqId:
      dV = 2.0 * (theta.c[1] * Z.f[1] + Z.f[1] * theta.c[1]);
      break;
    case Metric::G1InvGrams:
      dW = -w.W * gram_dot(Z.f[0], theta.c[0]) * w.W;
      dV = -w.V * gram_dot(Z.f[1], theta.c[1]) * w.V;
      break;
    case Metric::G1CrossGrams:
      dW = gram_dot(Z.f[1], theta.c[1]);
      dV = gram_dot(Z.f[0], theta.c[0]);
      break;
    case Metric::G3IdInvGram:
      dW = -w.W * gram_dot(Z.f[1], theta.c[1]) * w.W;
      break;
    case Metric::G3GramId:
      dV = gram_dot(Z.f[1], theta.c[1]);
      break;
    default:
      break;
  }
  Weights d;
  d.W = dW;
  d.Winv = -w.Winv * dW * w.Winv;
  d.V = dV;
  d.Vinv = -w.Vinv * dV * w.Vinv;
  return d;
}

double metric_inner(const QuotientPoint& Z, Metric m, const FactorVector& a, const FactorVector& b) {
  const Weights w = metric_weights(Z, m);
  require(a.c.size() == Z.f.size() && b.c.size() == Z.f.size(), ErrorCode::Precondition,
          "metric_inner: vectors do not match the point");
  switch (Z.geom) {
    case Geometry::PsdQ1:
      return (w.W * a.c[0].transpose() * b.c[0]).trace();
    case Geometry::PsdQ2:
      return (w.V * a.c[0].transpose() * b.c[0]).trace() + (w.W * a.c[1] * w.W * b.c[1]).trace();
    case Geometry::GenQ1:
      return (w.W * a.c[0].transpose() * b.c[0]).trace() + (w.V * a.c[1].transpose() * b.c[1]).trace();
    case Geometry::GenQ2:
      return inner(a.c[0], b.c[0]) + (w.W * a.c[1] * w.W * b.c[1]).trace() + inner(a.c[2], b.c[2]);
    case Geometry::GenQ3:
      return (w.V * a.c[0].transpose() * b.c[0]).trace() + (w.W * a.c[1].transpose() * b.c[1]).trace();
    default:
      throw Error(ErrorCode::Variant, "not a quotient geometry");
  }
}

FactorVector zero_vector(const QuotientPoint& Z) {
  FactorVector z;
  for (const auto& F : Z.f) z.c.push_back(Mat::Zero(F.rows(), F.cols()));
  return z;
}

FactorVector total_tangent_project(const QuotientPoint& Z, const FactorVector& eta) {
  require(eta.c.size() == Z.f.size(), ErrorCode::Dimension, "vector does not match the point");
  FactorVector out = eta;
  auto stiefel = [](const Mat& U, const Mat& E) -> Mat { return E - U * sym(U.transpose() * E); };
  switch (Z.geom) {
    case Geometry::PsdQ2:
      out.c[0] = stiefel(Z.f[0], eta.c[0]);
      out.c[1] = sym(eta.c[1]);
      break;
    case Geometry::GenQ2:
      out.c[0] = stiefel(Z.f[0], eta.c[0]);
      out.c[1] = sym(eta.c[1]);
      out.c[2] = stiefel(Z.f[2], eta.c[2]);
      break;
    case Geometry::GenQ3:
      out.c[0] = stiefel(Z.f[0], eta.c[0]);
      break;
    default:
      break;
  }
  return out;
}

bool is_total_tangent(const QuotientPoint& Z, const FactorVector& eta, double tol) {
  if (eta.c.size() != Z.f.size()) return false;
  for (size_t i = 0; i < Z.f.size(); ++i)
    if (eta.c[i].rows() != Z.f[i].rows() || eta.c[i].cols() != Z.f[i].cols()) return false;
  const double scale = std::max(eta.frob_norm(), 1e-300);
  auto stiefel_ok = [&](const Mat& U, const Mat& E) {
    return sym(U.transpose() * E).norm() <= tol * scale;
  };
  auto sym_ok = [&](const Mat& B) { return skew(B).norm() <= tol * scale; };
  switch (Z.geom) {
    case Geometry::PsdQ2:
      return stiefel_ok(Z.f[0], eta.c[0]) && sym_ok(eta.c[1]);
    case Geometry::GenQ2:
      return stiefel_ok(Z.f[0], eta.c[0]) && sym_ok(eta.c[1]) && stiefel_ok(Z.f[2], eta.c[2]);
    case Geometry::GenQ3:
      return stiefel_ok(Z.f[0], eta.c[0]);
    default:
      return true;
  }
}

bool is_horizontal(const QuotientPoint& Z, Metric m, const FactorVector& theta, double tol) {
  if (!is_total_tangent(Z, theta, tol)) return false;
  const Weights w = metric_weights(Z, m);
  const double tn = theta.frob_norm();
  switch (Z.geom) {
    case Geometry::PsdQ1: {
      const Mat& Y = Z.f[0];
      return skew(Y.transpose() * theta.c[0] * w.W).norm() <= tol * tn * Y.norm() * w.W.norm();
    }
    case Geometry::PsdQ2:
    case Geometry::GenQ3:
      return (Z.f[0].transpose() * theta.c[0]).norm() <= tol * tn;
    case Geometry::GenQ1: {
      const Mat& L = Z.f[0];
      const Mat& R = Z.f[1];
      const Mat lhs = L.transpose() * theta.c[0] * w.W;
      const Mat rhs = w.V * theta.c[1].transpose() * R;
      const double scale = tn * (L.norm() * w.W.norm() + R.norm() * w.V.norm());
      return (lhs - rhs).norm() <= tol * scale;
    }
    case Geometry::GenQ2:
      return (Z.f[0].transpose() * theta.c[0] + Z.f[2].transpose() * theta.c[2]).norm() <= tol * tn;
    default:
      return false;
  }
}

FactorVector vertical_vector(const QuotientPoint& Z, const Mat& K) {
  switch (Z.geom) {
    case Geometry::PsdQ1:
      return FactorVector{{Z.f[0] * K}};
    case Geometry::PsdQ2:
      return FactorVector{{Z.f[0] * K, Z.f[1] * K - K * Z.f[1]}};
    case Geometry::GenQ1:
      return FactorVector{{Z.f[0] * K, -Z.f[1] * K.transpose()}};
    case Geometry::GenQ2:
      return FactorVector{{Z.f[0] * K, Z.f[1] * K - K * Z.f[1], Z.f[2] * K}};
    case Geometry::GenQ3:
      return FactorVector{{Z.f[0] * K, Z.f[1] * K}};
    default:
      throw Error(ErrorCode::Variant, "not a quotient geometry");
  }
}

std::pair<FactorVector, FactorVector> vertical_horizontal_split(const QuotientPoint& Z, Metric m,
                                                                const FactorVector& theta) {
  require(is_total_tangent(Z, theta), ErrorCode::Precondition,
          "vector is not tangent to the total space");
  const Weights w = metric_weights(Z, m);
  Mat K;
  switch (Z.geom) {
    case Geometry::PsdQ1: {
      const Mat& Y = Z.f[0];
      K = solve_skew(Y.transpose() * Y, w.W, skew(Y.transpose() * theta.c[0] * w.W));
      break;
    }
    case Geometry::PsdQ2:
    case Geometry::GenQ3:
      K = skew(Z.f[0].transpose() * theta.c[0]);
      break;
    case Geometry::GenQ1: {
      const Mat& L = Z.f[0];
      const Mat& R = Z.f[1];
      const Mat rhs = L.transpose() * theta.c[0] * w.W - w.V * theta.c[1].transpose() * R;
      K = solve_sylvester_general(L.transpose() * L, w.W, w.V, R.transpose() * R, rhs);
      break;
    }
    case Geometry::GenQ2:
      K = 0.5 * (skew(Z.f[0].transpose() * theta.c[0]) + skew(Z.f[2].transpose() * theta.c[2]));
      break;
    default:
      throw Error(ErrorCode::Variant, "not a quotient geometry");
  }
  FactorVector v = vertical_vector(Z, K);
  FactorVector h = theta - v;
  return {std::move(v), std::move(h)};
}

FactorVector vertical_project(const QuotientPoint& Z, Metric m, const FactorVector& theta) {
  return vertical_horizontal_split(Z, m, theta).first;
}

FactorVector horizontal_project(const QuotientPoint& Z, Metric m, const FactorVector& theta) {
  return vertical_horizontal_split(Z, m, theta).second;
}

HorizontalVector riem_grad_quotient(const QuotientPoint& Z, const Objective& obj, Metric m) {
  const Mat X = represented(Z.geom, Z.f);
  require(obj.rows() == X.rows() && obj.cols() == X.cols(), ErrorCode::Dimension,
          "objective shape does not match point");
  return grad_lift(Z, obj.egrad(X), m);
}

HorizontalVector grad_lift(const QuotientPoint& Z, const Mat& G, Metric m) {
  require(G.rows() == Z.base.X.rows() && G.cols() == Z.base.X.cols(), ErrorCode::Dimension,
          "gradient shape does not match point");
  const Weights w = metric_weights(Z, m);
  switch (Z.geom) {
    case Geometry::PsdQ1:
      return FactorVector{{2.0 * G * Z.f[0] * w.Winv}};
    case Geometry::PsdQ2: {
      const Mat& U = Z.f[0];
      const Mat& B = Z.f[1];
      return FactorVector{{2.0 * perp_proj(U, G * U) * B * w.Vinv,
                           w.Winv * U.transpose() * G * U * w.Winv}};
    }
    case Geometry::GenQ1:
      return FactorVector{{G * Z.f[1] * w.Winv, G.transpose() * Z.f[0] * w.Vinv}};
    case Geometry::GenQ2: {
      const Mat& U = Z.f[0];
      const Mat& B = Z.f[1];
      const Mat& V = Z.f[2];
      const Mat D = U.transpose() * G * V;
      const Mat a = 0.5 * (skew(D) * B + B * skew(D));
      return FactorVector{{perp_proj(U, G * V) * B + U * a, B * sym(D) * B,
                           perp_proj(V, G.transpose() * U) * B - V * a}};
    }
    case Geometry::GenQ3: {
      const Mat& U = Z.f[0];
      const Mat& Y = Z.f[1];
      return FactorVector{{perp_proj(U, G * Y) * w.Vinv, G.transpose() * U * w.Winv}};
    }
    default:
      throw Error(ErrorCode::Variant, "not a quotient geometry");
  }
}

double riem_hess_quad_quotient(const QuotientPoint& Z, const Objective& obj, Metric m,
                               const HorizontalVector& theta) {
  require(is_horizontal(Z, m, theta, 1e-6), ErrorCode::Precondition,
          "Hessian argument is not horizontal");
  const Mat X = represented(Z.geom, Z.f);
  const Mat G = obj.egrad(X);
  const Weights w = metric_weights(Z, m);
  const Weights dth = metric_weights_derivative(Z, m, theta);
  const HorizontalVector grad = riem_grad_quotient(Z, obj, m);
  const Weights dgr = metric_weights_derivative(Z, m, grad);
  switch (Z.geom) {
    case Geometry::PsdQ1: {
      const Mat& Y = Z.f[0];
      const Mat& t = theta.c[0];
      const Mat xi = Y * t.transpose() + t * Y.transpose();
      return obj.ehess_quad(X, xi) + 2.0 * inner(G, t * t.transpose()) +
             2.0 * inner(G * Y * dth.Winv, t * w.W) + 0.5 * inner(dgr.W, t.transpose() * t);
    }
    case Geometry::PsdQ2: {
      const Mat& U = Z.f[0];
      const Mat& B = Z.f[1];
      const Mat& tU = theta.c[0];
      const Mat& tB = theta.c[1];
      const Mat xi = U * B * tU.transpose() + U * tB * U.transpose() + tU * B * U.transpose();
      const Mat inner_arg = 2.0 * tU * tB + U * dth.Winv * w.W * tB + tU * w.V * dth.Vinv * B -
                            tU * U.transpose() * tU * B - U * tU.transpose() * tU * B;
      // DV_B and DW_B depend on B only, so the derivative along grad uses its B component.
      return obj.ehess_quad(X, xi) + 2.0 * inner(G, tU * B * tU.transpose()) +
             2.0 * inner(G * U, inner_arg) + 0.5 * (dgr.V * tU.transpose() * tU).trace() +
             (sym(w.W * tB * dgr.W) * tB).trace();
    }
    case Geometry::GenQ1: {
      const Mat& L = Z.f[0];
      const Mat& R = Z.f[1];
      const Mat& tL = theta.c[0];
      const Mat& tR = theta.c[1];
      const Mat xi = L * tR.transpose() + tL * R.transpose();
      return obj.ehess_quad(X, xi) + 2.0 * inner(G, tL * tR.transpose()) +
             inner(G * R * dth.Winv, tL * w.W) + inner(G.transpose() * L * dth.Vinv, tR * w.V) +
             0.5 * inner(dgr.W, tL.transpose() * tL) + 0.5 * inner(dgr.V, tR.transpose() * tR);
    }
    case Geometry::GenQ2: {
      const Mat& U = Z.f[0];
      const Mat& B = Z.f[1];
      const Mat& V = Z.f[2];
      const Mat& tU = theta.c[0];
      const Mat& tB = theta.c[1];
      const Mat& tV = theta.c[2];
      const Mat Binv = w.W;
      const Mat xi = tU * B * V.transpose() + U * tB * V.transpose() + U * B * tV.transpose();
      const Mat D = U.transpose() * G * V;
      const Mat D1 = tU.transpose() * G * V;
      const Mat D2 = U.transpose() * G * tV;
      const Mat UtU = U.transpose() * tU;
      const Mat VtV = V.transpose() * tV;
      double h = obj.ehess_quad(X, xi) + 2.0 * inner(G, tU * B * tV.transpose());
      h += 0.5 * inner(D, sym(UtU * UtU) * B + B * sym(VtV * UtU) - 2.0 * tU.transpose() * tU * B);
      h += 0.5 * inner(D, B * sym(VtV * VtV) + sym(UtU * VtV) * B - 2.0 * B * tV.transpose() * tV +
                              2.0 * tB * Binv * tB);
      h += inner(D1, 2.0 * tB - UtU * B - 0.5 * tU.transpose() * U * B - 0.5 * VtV * B);
      h += inner(D2, 2.0 * tB - B * tV.transpose() * V - 0.5 * B * VtV - 0.5 * B * tU.transpose() * U);
      return h;
    }
    case Geometry::GenQ3: {
      const Mat& U = Z.f[0];
      const Mat& Y = Z.f[1];
      const Mat& tU = theta.c[0];
      const Mat& tY = theta.c[1];
      const Mat xi = U * tY.transpose() + tU * Y.transpose();
      return obj.ehess_quad(X, xi) + 2.0 * inner(G, tU * tY.transpose()) -
             inner(U.transpose() * G * Y, tU.transpose() * tU) +
             inner(G.transpose() * U * dth.Winv, tY * w.W) + inner(G * Y * dth.Vinv, tU * w.V) +
             0.5 * inner(dgr.W, tY.transpose() * tY) + 0.5 * inner(dgr.V, tU.transpose() * tU);
    }
    default:
      throw Error(ErrorCode::Variant, "not a quotient geometry");
  }
}

std::vector<HorizontalVector> horizontal_basis(const QuotientPoint& Z, Metric m) {
  const Weights w = metric_weights(Z, m);
  const Eigen::Index r = Z.rank();
  const Mat& U = Z.base.U;
  const Mat& Up = Z.base.Uperp;
  const Mat& V = Z.base.V;
  const Mat& Vp = Z.base.Vperp;
  const FactorVector zero = zero_vector(Z);
  std::vector<HorizontalVector> out;
  switch (Z.geom) {
    case Geometry::PsdQ1: {
      const Mat PinvT = Z.P1.transpose().partialPivLu().inverse();
      const Mat A = PinvT * w.W * PinvT.transpose();
      const Mat Ainv = spd_inverse(A);
      for (const Mat& K : sym_basis(r)) out.push_back(FactorVector{{U * K * Ainv * PinvT}});
      for (const Mat& E : unit_basis(Up.cols(), r)) out.push_back(FactorVector{{Up * E * PinvT}});
      break;
    }
    case Geometry::PsdQ2:
      for (const Mat& K : sym_basis(r)) out.push_back(FactorVector{{zero.c[0], K}});
      for (const Mat& E : unit_basis(Up.cols(), r)) out.push_back(FactorVector{{Up * E, zero.c[1]}});
      break;
    case Geometry::GenQ1: {
      const Mat P1invT = Z.P1.transpose().partialPivLu().inverse();
      const Mat P2invT = Z.P2.transpose().partialPivLu().inverse();
      for (const Mat& S : unit_basis(r, r))
        out.push_back(FactorVector{{U * S * Z.P2 * w.Winv, V * S.transpose() * Z.P1 * w.Vinv}});
      for (const Mat& E : unit_basis(Up.cols(), r))
        out.push_back(FactorVector{{Up * E * P2invT, zero.c[1]}});
      for (const Mat& E : unit_basis(Vp.cols(), r))
        out.push_back(FactorVector{{zero.c[0], Vp * E * P1invT}});
      break;
    }
    case Geometry::GenQ2:
      for (const Mat& K : skew_basis(r))
        out.push_back(FactorVector{{Z.f[0] * K, zero.c[1], -Z.f[2] * K}});
      for (const Mat& K : sym_basis(r)) out.push_back(FactorVector{{zero.c[0], K, zero.c[2]}});
      for (const Mat& E : unit_basis(Up.cols(), r))
        out.push_back(FactorVector{{Up * E, zero.c[1], zero.c[2]}});
      for (const Mat& E : unit_basis(Vp.cols(), r))
        out.push_back(FactorVector{{zero.c[0], zero.c[1], Vp * E}});
      break;
    case Geometry::GenQ3:
      for (const Mat& E : unit_basis(Up.cols(), r)) out.push_back(FactorVector{{Up * E, zero.c[1]}});
      for (const Mat& E : unit_basis(Z.f[1].rows(), r))
        out.push_back(FactorVector{{zero.c[0], E}});
      break;
    default:
      throw Error(ErrorCode::Variant, "not a quotient geometry");
  }
  for (auto& e : out) e *= 1.0 / std::sqrt(metric_inner(Z, m, e, e));
  return out;
}

Mat gram_matrix(const QuotientPoint& Z, Metric m, const std::vector<FactorVector>& basis) {
  const Eigen::Index d = static_cast<Eigen::Index>(basis.size());
  Mat G(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j) G(i, j) = G(j, i) = metric_inner(Z, m, basis[i], basis[j]);
  return G;
}

namespace {

std::vector<Mat> moved_factors(const QuotientPoint& Z, const FactorVector& theta, double t) {
  std::vector<Mat> f = Z.f;
  switch (Z.geom) {
    case Geometry::PsdQ1:
    case Geometry::GenQ1:
      for (size_t i = 0; i < f.size(); ++i) f[i] += t * theta.c[i];
      break;
    case Geometry::PsdQ2:
      f[0] = qf(Z.f[0] + t * theta.c[0]);
      f[1] = Z.f[1] + t * theta.c[1];
      break;
    case Geometry::GenQ2:
      f[0] = qf(Z.f[0] + t * theta.c[0]);
      f[1] = Z.f[1] + t * theta.c[1];
      f[2] = qf(Z.f[2] + t * theta.c[2]);
      break;
    case Geometry::GenQ3:
      f[0] = qf(Z.f[0] + t * theta.c[0]);
      f[1] = Z.f[1] + t * theta.c[1];
      break;
    default:
      throw Error(ErrorCode::Variant, "not a quotient geometry");
  }
  return f;
}

}  // namespace

Mat represented_along(const QuotientPoint& Z, const FactorVector& theta, double t) {
  return represented(Z.geom, moved_factors(Z, theta, t));
}

QuotientPoint move_along(const QuotientPoint& Z, const FactorVector& theta, double t) {
  return make_quotient_point(Z.geom, moved_factors(Z, theta, t));
}

QuotientPoint act(const QuotientPoint& Z, const Mat& O) {
  std::vector<Mat> f = Z.f;
  switch (Z.geom) {
    case Geometry::PsdQ1:
      f[0] = Z.f[0] * O;
      break;
    case Geometry::PsdQ2:
      f[0] = Z.f[0] * O;
      f[1] = O.transpose() * Z.f[1] * O;
      break;
    case Geometry::GenQ1:
      f[0] = Z.f[0] * O;
      f[1] = Z.f[1] * O.transpose().partialPivLu().inverse();
      break;
    case Geometry::GenQ2:
      f[0] = Z.f[0] * O;
      f[1] = O.transpose() * Z.f[1] * O;
      f[2] = Z.f[2] * O;
      break;
    case Geometry::GenQ3:
      f[0] = Z.f[0] * O;
      f[1] = Z.f[1] * O;
      break;
    default:
      throw Error(ErrorCode::Variant, "not a quotient geometry");
  }
  return make_quotient_point(Z.geom, f);
}

FactorVector act(const QuotientPoint& Z, const FactorVector& theta, const Mat& O) {
  FactorVector out = theta;
  switch (Z.geom) {
    case Geometry::PsdQ1:
      out.c[0] = theta.c[0] * O;
      break;
    case Geometry::PsdQ2:
      out.c[0] = theta.c[0] * O;
      out.c[1] = O.transpose() * theta.c[1] * O;
      break;
    case Geometry::GenQ1:
      out.c[0] = theta.c[0] * O;
      out.c[1] = theta.c[1] * O.transpose().partialPivLu().inverse();
      break;
    case Geometry::GenQ2:
      out.c[0] = theta.c[0] * O;
      out.c[1] = O.transpose() * theta.c[1] * O;
      out.c[2] = theta.c[2] * O;
      break;
    case Geometry::GenQ3:
      out.c[0] = theta.c[0] * O;
      out.c[1] = theta.c[1] * O;
      break;
    default:
      throw Error(ErrorCode::Variant, "not a quotient geometry");
  }
  return out;
}

HorizontalVector random_horizontal(const QuotientPoint& Z, Metric m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  FactorVector eta = zero_vector(Z);
  for (auto& C : eta.c) C = C.unaryExpr([&](double) { return nd(rng); });
  return horizontal_project(Z, m, total_tangent_project(Z, eta));
}

}  // namespace georank
