#include "georank/landscape.hpp"
#include "georank/runner.hpp"
#include "georank/tags.hpp"
#include "georank/transport.hpp"

#include "json.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace georank;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path config(const std::string& name) { return fs::path(GEORANK_CONFIGS) / name; }

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome run_config(const std::string& command, const std::string& name) {
  RunOptions o;
  o.base_dir = GEORANK_CONFIGS;
  o.timestamps = false;
  const RunResult r = run_experiment(command, slurp(config(name)), o);
  const auto rep = nlohmann::json::parse(r.report);
  std::ostringstream os;
  os << name << " " << rep["summary"]["passed"] << "/" << rep["summary"]["checks"];
  return {r.all_pass, os.str()};
}

Outcome run_configs(const std::string& command, std::initializer_list<const char*> names) {
  Outcome all;
  for (const char* n : names) {
    const Outcome o = run_config(command, n);
    all.pass = all.pass && o.pass;
    all.detail += (all.detail.empty() ? "" : ", ") + o.detail;
  }
  return all;
}

Mat randn(Eigen::Index m, Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  return Mat::NullaryExpr(m, n, [&]() { return nd(rng); });
}

EmbeddedPoint random_point(Kind kind, Eigen::Index p1, Eigen::Index p2, Eigen::Index r, std::mt19937_64& rng) {
  if (kind == Kind::Psd) {
    const Mat G = randn(p1, r, rng) + 2.0 * Mat::Identity(p1, r);
    return embed_point(G * G.transpose(), r, Kind::Psd);
  }
  const Mat A = randn(p1, r, rng) + 2.0 * Mat::Identity(p1, r);
  const Mat B = randn(p2, r, rng) + 2.0 * Mat::Identity(p2, r);
  return embed_point(A * B.transpose(), r, Kind::General);
}

QuotientPoint random_lift(const EmbeddedPoint& pt, Geometry g, std::mt19937_64& rng) {
  const Eigen::Index r = pt.rank();
  const Mat O = g == Geometry::GenQ1 ? Mat(Mat::Identity(r, r) + 0.3 * randn(r, r, rng)) : qf(randn(r, r, rng));
  return act(lift_point(pt, g), O);
}

Objective random_sensing(Kind kind, Eigen::Index p1, Eigen::Index p2, std::mt19937_64& rng) {
  std::vector<Mat> A;
  const Eigen::Index m = p1 * p2 + 3;
  Vec b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    A.push_back(randn(p1, p2, rng));
    b(i) = std::normal_distribution<double>()(rng);
  }
  return make_matrix_sensing(A, b, kind == Kind::Psd);
}

Outcome dims() {
  const auto t0 = Clock::now();
  Outcome o = run_configs("dims", {"dims_psd.json", "dims_general.json", "dims_psd_large.json", "dims_general_large.json"});
  // formulas against the closed-form counts
  struct Case {
    Eigen::Index p1, p2, r;
  };
  for (Case c : {Case{5, 5, 2}, Case{4, 3, 2}, Case{8, 8, 3}, Case{6, 5, 3}})
    for (Geometry g : all_geometries()) {
      const bool psd = kind_of(g) == Kind::Psd;
      if (psd && c.p1 != c.p2) continue;
      const Eigen::Index expect = psd ? c.p1 * c.r - c.r * (c.r - 1) / 2 : (c.p1 + c.p2 - c.r) * c.r;
      o.pass = o.pass && manifold_dim(g, c.p1, c.p2, c.r) == expect;
    }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.pass = o.pass && secs < 1.0;
  o.detail += ", " + std::to_string(secs) + " s";
  return o;
}

Outcome gradients() {
  const auto t0 = Clock::now();
  Outcome o = run_configs("check-gradients", {"gradients_psd.json", "gradients_general.json"});
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.pass = o.pass && secs < 30.0;
  o.detail += ", " + std::to_string(secs) + " s";
  return o;
}

Outcome conversions() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  int points = 0;
  for (Geometry g : all_geometries()) {
    if (!is_quotient(g)) continue;
    const Kind kind = kind_of(g);
    const Eigen::Index p1 = 6, p2 = kind == Kind::Psd ? 6 : 5;
    const Objective obj = random_sensing(kind, p1, p2, rng);
    for (Metric m : metrics_for(g))
      for (int t = 0; t < 50; ++t) {
        const QuotientPoint Z = random_lift(random_point(kind, p1, p2, 2, rng), g, rng);
        const HorizontalVector gq = riem_grad_quotient(Z, obj, m);
        const EmbeddedTangent ge = riem_grad_embedded(Z.base, obj);
        const EmbeddedTangent d = tangent_axpy(-1.0, ge, grad_embedded_from_quotient(Z, gq, m));
        worst = std::max(worst, std::sqrt(tangent_inner(d, d) / tangent_inner(ge, ge)));
        worst = std::max(worst, (grad_quotient_from_embedded(Z, ge, m) - gq).frob_norm() / gq.frob_norm());
        ++points;
      }
  }
  std::ostringstream os;
  os << points << " points, max rel err " << worst;
  return {worst <= 1e-10, os.str()};
}

Outcome hessian_equality() {
  std::mt19937_64 rng(404);
  double worst = 0.0;
  int fosps = 0;
  for (Kind kind : {Kind::Psd, Kind::General}) {
    const Eigen::Index p1 = 8, p2 = kind == Kind::Psd ? 8 : 7;
    Mat M = Mat::Zero(p1, p2);
    for (Eigen::Index i = 0; i < std::min(p1, p2); ++i) M(i, i) = static_cast<double>(std::min(p1, p2) - i);
    const Objective obj = make_matrix_approx(M, kind == Kind::Psd);
    for (Eigen::Index r = 1; r <= 3; ++r)
      for (const EmbeddedPoint& pt : analytic_fosps(obj, r)) {
        ++fosps;
        for (Geometry g : all_geometries()) {
          if (!is_quotient(g) || kind_of(g) != kind) continue;
          for (Metric m : metrics_for(g)) {
            const QuotientPoint Z = random_lift(pt, g, rng);
            for (int k = 0; k < 100; ++k) {
              const HorizontalVector th = random_horizontal(Z, m, rng);
              const double hq = riem_hess_quad_quotient(Z, obj, m, th);
              const EmbeddedTangent xi = forward_map(Z, th, m);
              const double he = riem_hess_quad_embedded(Z.base, obj, xi);
              worst = std::max(worst, std::abs(hq - he) / std::max({std::abs(he), tangent_inner(xi, xi), 1e-300}));
            }
          }
        }
      }
  }
  std::ostringstream os;
  os << fosps << " stationary points, max rel err " << worst;
  return {worst <= 1e-8, os.str()};
}

Outcome sandwich() {
  const auto t0 = Clock::now();
  Outcome o = run_configs("verify-sandwich", {"sandwich_psd.json", "sandwich_general.json", "sandwich_psd_diag.json",
                                              "sandwich_general_diag.json", "sandwich_from_csv.json"});
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  o.pass = o.pass && secs < 60.0;
  o.detail += ", " + std::to_string(secs) + " s";
  return o;
}

Outcome solver() {
  std::mt19937_64 rng(909);
  int ok = 0;
  double worst_grad = 0.0, worst_dist = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Kind kind = t % 2 == 0 ? Kind::Psd : Kind::General;
    const Eigen::Index p1 = 6, p2 = kind == Kind::Psd ? 6 : 5, r = 2;
    const Mat G = randn(p1, p2, rng);
    const Mat M = kind == Kind::Psd ? Mat(sym(G * G.transpose() / 6.0)) : G;
    const Objective obj = make_matrix_approx(M, kind == Kind::Psd);
    const EmbeddedPoint init = random_point(kind, p1, p2, r, rng);
    const Geometry g = kind == Kind::Psd ? Geometry::EmbeddedPsd : Geometry::EmbeddedGeneral;
    const FospResult res = find_fosp(obj, g, Metric::Euclidean, init, 20000, 1e-8);
    const double gn = embedded_grad_norm(res.point, obj);
    double dist = std::numeric_limits<double>::infinity();
    for (const EmbeddedPoint& f : analytic_fosps(obj, r)) dist = std::min(dist, (f.X - res.point.X).norm());
    worst_grad = std::max(worst_grad, gn);
    worst_dist = std::max(worst_dist, dist);
    ok += (res.converged && gn <= 1e-8 && dist <= 1e-6) ? 1 : 0;
  }
  std::ostringstream os;
  os << ok << "/20 inits, max grad " << worst_grad << ", max distance " << worst_dist;
  return {ok == 20, os.str()};
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path tmp = fs::temp_directory_path() / "georank_acceptance";
  fs::create_directories(tmp);
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"dims", "dims_psd.json"},
      {"check-gradients", "gradients_general.json"},
      {"verify-sandwich", "sandwich_general.json"},
      {"flow-compare", "flow_psd.json"},
      {"classify", "classify_psd.json"},
      {"bijection-roundtrip", "bijection_psd.json"}};
  Outcome o;
  int same = 0;
  for (const auto& [cmd, cfg] : runs) {
    std::string bodies[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path out = tmp / (cmd + "_" + std::to_string(k) + ".json");
      const int rc = shell(std::string("\"") + GEORANK_EXE + "\" " + cmd + " --config \"" + config(cfg).string() +
                           "\" --no-timestamp --out \"" + out.string() + "\"");
      if (rc != 0) o.pass = false;
      bodies[k] = slurp(out);
    }
    if (!bodies[0].empty() && bodies[0] == bodies[1]) ++same;
  }
  fs::remove_all(tmp);
  o.pass = o.pass && same == static_cast<int>(runs.size());
  o.detail = std::to_string(same) + "/" + std::to_string(runs.size()) + " commands byte-identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"dimension counts", dims},
      {"gradient oracles", gradients},
      {"gradient conversions", conversions},
      {"Hessian equality at stationary points", hessian_equality},
      {"sandwich spectra", sandwich},
      {"bijection suite", [] { return run_configs("bijection-roundtrip", {"bijection_psd.json", "bijection_general.json"}); }},
      {"stationary-point equivalence", [] { return run_configs("classify", {"classify_psd.json", "classify_general.json"}); }},
      {"flow identities", [] { return run_configs("flow-compare", {"flow_psd.json", "flow_general.json"}); }},
      {"solver sanity", solver},
      {"CLI determinism", determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
