#include "georank/transport.hpp"

#include <algorithm>

namespace georank {

namespace {

double smin(const Mat& A) {
  const Vec s = singular_values(A);
  return s(s.size() - 1);
}

double smax(const Mat& A) { return singular_values(A)(0); }

Mat sylvester_guarded(const Mat& A, const Mat& B, const Mat& C) {
  try {
    return solve_sylvester(A, B, C);
  } catch (const Error& e) {
    throw Error(ErrorCode::Conditioning, std::string("transport system: ") + e.what());
  }
}

}  // namespace

EmbeddedTangent forward_map(const QuotientPoint& Z, const HorizontalVector& theta, Metric m,
                            bool check) {
  require(theta.c.size() == Z.f.size(), ErrorCode::Dimension, "forward_map: vector does not match the point");
  require(!check || is_horizontal(Z, m, theta, 1e-8), ErrorCode::Precondition,
          "forward_map: argument is not horizontal");
  const auto& f = Z.f;
  const auto& t = theta.c;
  Mat xi;
  switch (Z.geom) {
    case Geometry::PsdQ1:
      xi = f[0] * t[0].transpose() + t[0] * f[0].transpose();
      break;
    case Geometry::PsdQ2:
      xi = f[0] * f[1] * t[0].transpose() + f[0] * t[1] * f[0].transpose() +
           t[0] * f[1] * f[0].transpose();
      break;
    case Geometry::GenQ1:
      xi = f[0] * t[1].transpose() + t[0] * f[1].transpose();
      break;
    case Geometry::GenQ2:
      xi = t[0] * f[1] * f[2].transpose() + f[0] * t[1] * f[2].transpose() +
           f[0] * f[1] * t[2].transpose();
      break;
    case Geometry::GenQ3:
      xi = f[0] * t[1].transpose() + t[0] * f[1].transpose();
      break;
    default:
      throw Error(ErrorCode::Variant, "forward_map: not a quotient geometry");
  }
  return tangent_project(Z.base, xi);
}

HorizontalVector inverse_map(const QuotientPoint& Z, const EmbeddedTangent& xi, Metric m) {
  const EmbeddedPoint& b = Z.base;
  const Eigen::Index r = Z.rank();
  require(xi.S.rows() == r && xi.S.cols() == r && xi.D1.rows() == b.Uperp.cols() &&
              xi.D2.rows() == b.Vperp.cols(),
          ErrorCode::Dimension, "inverse_map: tangent blocks do not match the point");
  const Weights w = metric_weights(Z, m);
  const Mat& U = b.U;
  const Mat& V = b.V;
  const Mat& Up = b.Uperp;
  const Mat& Vp = b.Vperp;
  switch (Z.geom) {
    case Geometry::PsdQ1: {
      const Mat PinvT = Z.P1.transpose().partialPivLu().inverse();
      const Mat A = sym(PinvT * w.W * PinvT.transpose());
      const Mat Sp = sylvester_guarded(A, A, A * xi.S);
      return FactorVector{{(U * Sp + Up * xi.D1) * PinvT}};
    }
    case Geometry::PsdQ2: {
      const Mat Binv = Z.f[1].llt().solve(Mat::Identity(r, r));
      return FactorVector{{Up * xi.D1 * Binv, sym(xi.S)}};
    }
    case Geometry::GenQ1: {
      const Mat& P1 = Z.P1;
      const Mat& P2 = Z.P2;
      const Mat A = P1 * w.Vinv * P1.transpose();
      const Mat B = P2 * w.Winv * P2.transpose();
      const Mat Sp = sylvester_guarded(A, B, xi.S);
      const Mat P1invT = P1.transpose().partialPivLu().inverse();
      const Mat P2invT = P2.transpose().partialPivLu().inverse();
      return FactorVector{{U * Sp * P2 * w.Winv + Up * xi.D1 * P2invT,
                           V * Sp.transpose() * P1 * w.Vinv + Vp * xi.D2 * P1invT}};
    }
    case Geometry::GenQ2: {
      const Mat& B = Z.f[1];
      const Mat Binv = B.llt().solve(Mat::Identity(r, r));
      const Mat Om = skew(sylvester_guarded(B, B, skew(xi.S)));
      const Mat tB = sym(xi.S - Om * B - B * Om);
      return FactorVector{{U * Om + Up * xi.D1 * Binv, tB, -V * Om + Vp * xi.D2 * Binv}};
    }
    case Geometry::GenQ3: {
      const Mat YtV = Z.f[1].transpose() * V;
      return FactorVector{{Up * xi.D1 * YtV.partialPivLu().inverse(),
                           V * xi.S.transpose() + Vp * xi.D2}};
    }
    default:
      throw Error(ErrorCode::Variant, "inverse_map: not a quotient geometry");
  }
}

SandwichCoefficients spectrum_bounds(const QuotientPoint& Z, Metric m) {
  const Weights w = metric_weights(Z, m);
  SandwichCoefficients c;
  c.geometry = Z.geom;
  c.metric = m;
  switch (Z.geom) {
    case Geometry::PsdQ1: {
      const Mat A = Z.P1 * w.Winv * Z.P1.transpose();
      c.alpha = 2.0 * smin(A);
      c.beta = 4.0 * smax(A);
      c.closed_form = "(2 sigma_r(P W^-1 P^T), 4 sigma_1(P W^-1 P^T))";
      break;
    }
    case Geometry::PsdQ2:
    case Geometry::GenQ2: {
      // W_B^{-1} and V_B^{-1/2} B; gen-q2 has V_B = I and W_B^{-1} = B.
      const Mat C = spd_functions(w.V).inv_sqrt * Z.f[1];
      const double a1 = std::pow(smin(w.Winv), 2), b1 = std::pow(smax(w.Winv), 2);
      const double a2 = 2.0 * std::pow(smin(C), 2), b2 = 2.0 * std::pow(smax(C), 2);
      if (Z.geom == Geometry::PsdQ2) {
        c.alpha = std::min(a1, a2);
        c.beta = std::max(b1, b2);
        c.closed_form =
            "(min(sigma_r^2(W_B^-1), 2 sigma_r^2(V_B^-1/2 B)), max(sigma_1^2(W_B^-1), 2 sigma_1^2(V_B^-1/2 B)))";
      } else {
        c.alpha = a1;
        c.beta = 2.0 * b1;
        c.closed_form = "(sigma_r^2(X), 2 sigma_1^2(X))";
      }
      break;
    }
    case Geometry::GenQ1: {
      const Mat A = Z.P2 * w.Winv * Z.P2.transpose();
      const Mat B = Z.P1 * w.Vinv * Z.P1.transpose();
      c.alpha = std::min(smin(A), smin(B));
      c.beta = 2.0 * std::max(smax(A), smax(B));
      c.closed_form =
          "(min(sigma_r(P2 W^-1 P2^T), sigma_r(P1 V^-1 P1^T)), 2 max(sigma_1(P2 W^-1 P2^T), sigma_1(P1 V^-1 P1^T)))";
      break;
    }
    case Geometry::GenQ3: {
      const Mat C = Z.f[1] * spd_functions(w.V).inv_sqrt;
      c.alpha = std::min(smin(w.Winv), std::pow(smin(C), 2));
      c.beta = std::max(smax(w.Winv), std::pow(smax(C), 2));
      c.closed_form =
          "(min(sigma_r(W_Y^-1), sigma_r^2(Y V_Y^-1/2)), max(sigma_1(W_Y^-1), sigma_1^2(Y V_Y^-1/2)))";
      break;
    }
    default:
      throw Error(ErrorCode::Variant, "spectrum_bounds: not a quotient geometry");
  }
  // these rows cancel the weights exactly; report the constants instead of round-off
  if (m == Metric::Q1TwoGram || m == Metric::G1CrossGrams) {
    c.alpha = 1.0;
    c.beta = 2.0;
    c.closed_form = "(1, 2)";
  } else if (m == Metric::Q2TwoBSqId || m == Metric::G3GramId) {
    c.alpha = 1.0;
    c.beta = 1.0;
    c.closed_form = "(1, 1)";
  }
  return c;
}

}  // namespace georank
