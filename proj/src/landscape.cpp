#include "georank/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace georank {

namespace {

Mat pinv_cols(const Mat& Y) {
  const Mat G = Y.transpose() * Y;
  return G.llt().solve(Y.transpose());
}

EmbeddedTangent combine(const std::vector<EmbeddedTangent>& b, const Vec& w) {
  EmbeddedTangent out = tangent_axpy(-1.0, b[0], b[0]);
  for (size_t j = 0; j < b.size(); ++j) out = tangent_axpy(w(static_cast<Eigen::Index>(j)), b[j], out);
  return out;
}

FactorVector combine(const std::vector<FactorVector>& b, const Vec& w) {
  FactorVector out = 0.0 * b[0];
  for (size_t j = 0; j < b.size(); ++j) out += w(static_cast<Eigen::Index>(j)) * b[j];
  return out;
}

template <class T>
std::vector<T> mix_basis(const std::vector<T>& basis, std::uint64_t seed) {
  const Eigen::Index d = static_cast<Eigen::Index>(basis.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.5, 2.0);
  const Mat Q = qf(Mat::NullaryExpr(d, d, [&]() { return nd(rng); }));
  Mat mix = Q;
  for (Eigen::Index j = 0; j < d; ++j) mix.col(j) *= ud(rng);
  std::vector<T> out;
  for (Eigen::Index j = 0; j < d; ++j) out.push_back(combine(basis, mix.col(j)));
  return out;
}

template <class T>
SpectrumReport assemble(const std::vector<T>& basis, const std::function<double(const T&)>& quad,
                        const std::function<double(const T&, const T&)>& ip,
                        const std::function<T(const T&, double, const T&)>& axpy) {
  const Eigen::Index d = static_cast<Eigen::Index>(basis.size());
  SpectrumReport rep;
  if (d == 0) {
    rep.eigenvalues = Vec();
    return rep;
  }
  Mat H(d, d), G(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    H(i, i) = quad(basis[i]);
    G(i, i) = ip(basis[i], basis[i]);
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double qp = quad(axpy(basis[i], 1.0, basis[j]));
      const double qm = quad(axpy(basis[i], -1.0, basis[j]));
      H(i, j) = H(j, i) = 0.25 * (qp - qm);
      G(i, j) = G(j, i) = ip(basis[i], basis[j]);
    }
  }
  const Vec gev = Eigen::SelfAdjointEigenSolver<Mat>(G, Eigen::EigenvaluesOnly).eigenvalues();
  rep.gram_condition = gev.maxCoeff() / std::max(gev.minCoeff(), 1e-300);
  require(gev.minCoeff() > 0.0 && rep.gram_condition <= 1e10, ErrorCode::Conditioning,
          "basis Gram matrix is too ill-conditioned");
  rep.eigenvalues = gen_sym_eig(H, G).values;
  return rep;
}

double egrad_sigma1(const EmbeddedPoint& pt, const Objective& obj) {
  return singular_values(obj.egrad(pt.X))(0);
}

}  // namespace

EmbeddedTangent grad_embedded_from_quotient(const QuotientPoint& Z, const HorizontalVector& gh,
                                            Metric m) {
  require(gh.c.size() == Z.f.size(), ErrorCode::Dimension, "gradient does not match the point");
  const Weights w = metric_weights(Z, m);
  const auto& f = Z.f;
  Mat G;
  switch (Z.geom) {
    case Geometry::PsdQ1: {
      const Mat Yp = pinv_cols(f[0]);
      const Mat A = gh.c[0] * w.W * Yp;
      const Eigen::Index p = f[0].rows();
      G = 0.5 * (A + A.transpose() * (Mat::Identity(p, p) - f[0] * Yp));
      break;
    }
    case Geometry::PsdQ2: {
      const Mat& U = f[0];
      const Mat Binv = f[1].llt().solve(Mat::Identity(f[1].rows(), f[1].cols()));
      const Mat A = gh.c[0] * w.V * Binv * U.transpose();
      G = 0.5 * (A + A.transpose()) + U * w.W * gh.c[1] * w.W * U.transpose();
      break;
    }
    case Geometry::GenQ1: {
      const Mat Lp = pinv_cols(f[0]);
      const Mat Rp = pinv_cols(f[1]);
      const Eigen::Index p2 = f[1].rows();
      G = gh.c[0] * w.W * Rp +
          (gh.c[1] * w.V * Lp).transpose() * (Mat::Identity(p2, p2) - f[1] * Rp);
      break;
    }
    case Geometry::GenQ2: {
      const Mat& U = f[0];
      const Mat& B = f[1];
      const Mat& V = f[2];
      const Mat Binv = B.llt().solve(Mat::Identity(B.rows(), B.cols()));
      const Mat K = solve_sylvester(B, B, 2.0 * gh.c[0].transpose() * U);
      const Mat D1 = sym(Binv * gh.c[1] * Binv) + skew(K.transpose());
      const Mat GU = gh.c[0] - U * (U.transpose() * gh.c[0]);
      const Mat GV = gh.c[2] - V * (V.transpose() * gh.c[2]);
      G = GU * Binv * V.transpose() + U * D1 * V.transpose() + (GV * Binv * U.transpose()).transpose();
      break;
    }
    case Geometry::GenQ3: {
      const Mat Yp = pinv_cols(f[1]);
      G = gh.c[0] * w.V * Yp + (gh.c[1] * w.W * f[0].transpose()).transpose();
      break;
    }
    default:
      throw Error(ErrorCode::Variant, "not a quotient geometry");
  }
  return tangent_project(Z.base, G);
}

HorizontalVector grad_quotient_from_embedded(const QuotientPoint& Z, const EmbeddedTangent& grad_f,
                                             Metric m) {
  return grad_lift(Z, ambient(Z.base, grad_f), m);
}

SpectrumReport hessian_spectrum_embedded(const EmbeddedPoint& pt, const Objective& obj,
                                         std::optional<std::uint64_t> basis_seed) {
  std::vector<EmbeddedTangent> basis = tangent_basis(pt);
  if (basis_seed) basis = mix_basis(basis, *basis_seed);
  SpectrumReport rep = assemble<EmbeddedTangent>(
      basis, [&](const EmbeddedTangent& x) { return riem_hess_quad_embedded(pt, obj, x); },
      [](const EmbeddedTangent& a, const EmbeddedTangent& b) { return tangent_inner(a, b); },
      [](const EmbeddedTangent& a, double s, const EmbeddedTangent& b) { return tangent_axpy(s, b, a); });
  rep.geometry = pt.kind == Kind::Psd ? Geometry::EmbeddedPsd : Geometry::EmbeddedGeneral;
  rep.metric = Metric::Euclidean;
  rep.grad_norm = embedded_grad_norm(pt, obj);
  return rep;
}

SpectrumReport hessian_spectrum_quotient(const QuotientPoint& Z, const Objective& obj, Metric m,
                                         std::optional<std::uint64_t> basis_seed) {
  std::vector<FactorVector> basis = horizontal_basis(Z, m);
  if (basis_seed) basis = mix_basis(basis, *basis_seed);
  SpectrumReport rep = assemble<FactorVector>(
      basis, [&](const FactorVector& x) { return riem_hess_quad_quotient(Z, obj, m, x); },
      [&](const FactorVector& a, const FactorVector& b) { return metric_inner(Z, m, a, b); },
      [](const FactorVector& a, double s, const FactorVector& b) { return a + s * b; });
  rep.geometry = Z.geom;
  rep.metric = m;
  const FactorVector g = riem_grad_quotient(Z, obj, m);
  rep.grad_norm = std::sqrt(metric_inner(Z, m, g, g));
  return rep;
}

SpectrumReport hessian_spectrum(const EmbeddedPoint& pt, const Objective& obj, Geometry g, Metric m,
                                std::optional<std::uint64_t> basis_seed) {
  require(kind_of(g) == pt.kind, ErrorCode::Variant, "geometry does not match the point kind");
  if (!is_quotient(g)) {
    require(m == Metric::Euclidean, ErrorCode::Enumeration, "embedded geometries use the euclidean metric");
    return hessian_spectrum_embedded(pt, obj, basis_seed);
  }
  return hessian_spectrum_quotient(lift_point(pt, g), obj, m, basis_seed);
}

double embedded_grad_norm(const EmbeddedPoint& pt, const Objective& obj) {
  const EmbeddedTangent g = riem_grad_embedded(pt, obj);
  return std::sqrt(tangent_inner(g, g));
}

double fosp_threshold(const EmbeddedPoint& pt, const Objective& obj) {
  return 1e-8 * (1.0 + egrad_sigma1(pt, obj));
}

SandwichReport verify_sandwich(const QuotientPoint& Z, const Objective& obj, Metric m,
                               int identity_trials, std::uint64_t seed) {
  SandwichReport rep;
  rep.grad_norm = embedded_grad_norm(Z.base, obj);
  rep.fosp_tol = fosp_threshold(Z.base, obj);
  require(rep.grad_norm <= rep.fosp_tol, ErrorCode::Precondition,
          "verify_sandwich: point is not a first-order stationary point");
  rep.coefficients = spectrum_bounds(Z, m);
  const double a = rep.coefficients.alpha;
  const double b = rep.coefficients.beta;
  rep.eig_quotient = hessian_spectrum_quotient(Z, obj, m).eigenvalues;
  rep.eig_embedded = hessian_spectrum_embedded(Z.base, obj).eigenvalues;
  const Eigen::Index d = rep.eig_embedded.size();
  require(rep.eig_quotient.size() == d, ErrorCode::Dimension, "spectra lengths differ");
  const double sf = d > 0 ? rep.eig_embedded.cwiseAbs().maxCoeff() : 0.0;
  const double sh = d > 0 ? rep.eig_quotient.cwiseAbs().maxCoeff() : 0.0;
  rep.spectral_scale = std::max({sf, sh, 1e-300});
  rep.lower_margin.resize(d);
  rep.upper_margin.resize(d);
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.spectra_max_rel_diff = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double lf = rep.eig_embedded(k);
    const double lh = rep.eig_quotient(k);
    const double lo = lf >= 0.0 ? a * lf : b * lf;
    const double hi = lf >= 0.0 ? b * lf : a * lf;
    rep.lower_margin(k) = lh - lo;
    rep.upper_margin(k) = hi - lh;
    rep.min_margin = std::min({rep.min_margin, rep.lower_margin(k) / rep.spectral_scale,
                               rep.upper_margin(k) / rep.spectral_scale});
    rep.spectra_max_rel_diff = std::max(rep.spectra_max_rel_diff, std::abs(lh - lf) / rep.spectral_scale);
  }
  if (d == 0) rep.min_margin = 0.0;
  rep.sandwich_ok = rep.min_margin >= -rep.slack_tol;
  rep.spectra_equal = rep.spectra_max_rel_diff <= 1e-8;

  // Residual of an inexact stationary point enters the identity at first order.
  rep.identity_tol = 1e-8 + rep.grad_norm / std::max(sf, 1e-300);
  rep.identity_trials = identity_trials;
  std::mt19937_64 rng(seed);
  rep.identity_max_rel_err = 0.0;
  for (int t = 0; t < identity_trials; ++t) {
    const FactorVector theta = random_horizontal(Z, m, rng);
    const EmbeddedTangent xi = forward_map(Z, theta, m);
    const double hq = riem_hess_quad_quotient(Z, obj, m, theta);
    const double hf = riem_hess_quad_embedded(Z.base, obj, xi);
    const double scale = std::max(std::abs(hf), sf * tangent_inner(xi, xi));
    rep.identity_max_rel_err = std::max(rep.identity_max_rel_err, std::abs(hq - hf) / std::max(scale, 1e-300));
  }
  rep.identity_ok = rep.identity_max_rel_err <= rep.identity_tol;
  return rep;
}

StationaryClassification classify_point(const EmbeddedPoint& pt, const Objective& obj, Geometry g,
                                        Metric m, const ClassifyTolerances& tol) {
  StationaryClassification c;
  c.tolerances = tol;
  const SpectrumReport spec = hessian_spectrum(pt, obj, g, m);
  c.grad_norm = spec.grad_norm;
  c.grad_threshold = tol.tol_g * (1.0 + egrad_sigma1(pt, obj));
  c.min_eigenvalue = spec.eigenvalues.size() > 0 ? spec.eigenvalues.minCoeff() : 0.0;
  c.spectrum_scale =
      std::max(spec.eigenvalues.size() > 0 ? spec.eigenvalues.cwiseAbs().maxCoeff() : 0.0, 1e-300);
  c.is_fosp = c.grad_norm <= c.grad_threshold;
  c.is_sosp = c.is_fosp && c.min_eigenvalue >= -tol.tol_h * c.spectrum_scale;
  c.is_strict_saddle = c.is_fosp && !c.is_sosp && c.min_eigenvalue < -tol.tol_s * c.spectrum_scale;
  return c;
}

FospResult find_fosp(const Objective& obj, Geometry g, Metric m, const EmbeddedPoint& init,
                     int max_iter, double tol) {
  require(max_iter >= 0 && tol > 0.0, ErrorCode::Precondition, "find_fosp: bad step parameters");
  require(kind_of(g) == init.kind, ErrorCode::Variant, "geometry does not match the point kind");
  check_metric(g, m);
  const double L = obj.lipschitz_estimate(init.X);
  const double t0 = L > 0.0 ? 1.0 / L : 1.0;
  const double c1 = 1e-4;
  FospResult res;
  const Eigen::Index r = init.rank();

  if (!is_quotient(g)) {
    EmbeddedPoint pt = init;
    double f = obj.value(pt.X);
    for (int it = 0;; ++it) {
      const EmbeddedTangent grad = riem_grad_embedded(pt, obj);
      const double gn = std::sqrt(tangent_inner(grad, grad));
      res.trace.push_back({it, f, gn});
      res.iterations = it;
      if (gn <= tol) {
        res.converged = true;
        break;
      }
      if (it == max_iter) break;
      bool accepted = false;
      for (double t = t0; t > 1e-20; t *= 0.5) {
        try {
          EmbeddedPoint cand = retract(pt, grad, -t);
          const double fc = obj.value(cand.X);
          if (fc <= f - c1 * t * gn * gn) {
            pt = std::move(cand);
            f = fc;
            accepted = true;
            break;
          }
        } catch (const Error&) {
        }
      }
      if (!accepted) break;
    }
    res.point = pt;
    return res;
  }

  QuotientPoint Z = lift_point(init, g);
  double f = obj.value(represented(g, Z.f));
  for (int it = 0;; ++it) {
    const FactorVector grad = riem_grad_quotient(Z, obj, m);
    const double gn = std::sqrt(metric_inner(Z, m, grad, grad));
    res.trace.push_back({it, f, gn});
    res.iterations = it;
    if (gn <= tol) {
      res.converged = true;
      break;
    }
    if (it == max_iter) break;
    bool accepted = false;
    for (double t = t0; t > 1e-20; t *= 0.5) {
      try {
        QuotientPoint cand = move_along(Z, grad, -t);
        const double fc = obj.value(represented(g, cand.f));
        if (fc <= f - c1 * t * gn * gn) {
          Z = std::move(cand);
          f = fc;
          accepted = true;
          break;
        }
      } catch (const Error&) {
      }
    }
    if (!accepted) break;
  }
  res.point = truncate_point(represented(g, Z.f), r, init.kind);
  return res;
}

std::vector<EmbeddedPoint> analytic_fosps(const Objective& approx, Eigen::Index r) {
  require(approx.approx_target().has_value(), ErrorCode::Precondition,
          "analytic_fosps needs a matrix approximation objective");
  const Mat& M = *approx.approx_target();
  const Kind kind = approx.symmetric() ? Kind::Psd : Kind::General;
  Vec vals;
  Mat Ul, Vl;
  if (kind == Kind::Psd) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(M));
    vals = es.eigenvalues().reverse();
    Ul = es.eigenvectors().rowwise().reverse();
    Vl = Ul;
  } else {
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    vals = svd.singularValues();
    Ul = svd.matrixU();
    Vl = svd.matrixV();
  }
  const double top = vals.size() > 0 ? vals.cwiseAbs().maxCoeff() : 0.0;
  std::vector<Eigen::Index> usable;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals(i) > 1e-12 * top) usable.push_back(i);
  const Eigen::Index n = static_cast<Eigen::Index>(usable.size());
  require(r >= 1 && r <= n, ErrorCode::Rank, "rank exceeds the number of positive components of M");
  if (r < n) {
    for (Eigen::Index i = 0; i + 1 < n; ++i)
      require(vals(usable[i]) - vals(usable[i + 1]) > 1e-8 * top, ErrorCode::Ambiguity,
              "repeated spectrum: stationary truncations are not isolated");
  }
  std::vector<EmbeddedPoint> out;
  std::vector<Eigen::Index> pick;
  const double cert = 1e-10 * (1.0 + M.norm());
  std::function<void(Eigen::Index)> rec = [&](Eigen::Index start) {
    if (static_cast<Eigen::Index>(pick.size()) == r) {
      Mat X = Mat::Zero(M.rows(), M.cols());
      for (Eigen::Index i : pick) X += vals(i) * Ul.col(i) * Vl.col(i).transpose();
      if (kind == Kind::Psd) X = sym(X);
      EmbeddedPoint pt = embed_point(X, r, kind);
      require(embedded_grad_norm(pt, approx) <= cert, ErrorCode::Evaluation,
              "truncation failed stationarity certification");
      out.push_back(std::move(pt));
      return;
    }
    for (Eigen::Index j = start; j < n; ++j) {
      pick.push_back(usable[j]);
      rec(j + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace georank
