#include "georank/runner.hpp"

#include "georank/flows.hpp"
#include "georank/landscape.hpp"
#include "georank/tags.hpp"
#include "georank/transport.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace georank {

const char* const kCommands[] = {"check-gradients", "verify-sandwich",     "flow-compare",
                                 "classify",        "dims",                "bijection-roundtrip"};
const int kCommandCount = 6;

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Tolerances {
  double gradient_fd = 1e-6;
  double conversion = 1e-10;
  double roundtrip = 1e-9;
  double sandwich_slack = 1e-8;
  double spectra_equal = 1e-8;
  double flow_identical = 1e-8;
  double flow_residual = 1e-10;
  double classify_grad = 1e-8;
  double classify_hess = 1e-6;
  double classify_saddle = 1e-6;
};

struct ProblemSpec {
  std::string kind = "approx";
  bool psd = true;
  Eigen::Index p1 = 0, p2 = 0, r = 0;
  std::string target_source;  // "synthetic", "diagonal" or the CSV path as written
  Eigen::Index target_rank = 0;
  double mask_density = 0.5;
  Eigen::Index measurements = 0;
};

struct Setup {
  std::string command;
  std::uint64_t seed = 0;
  ProblemSpec spec;
  Mat M;
  std::optional<Objective> obj;
  std::vector<Geometry> geometries;
  std::vector<std::pair<Geometry, Metric>> pairs;  // every selected (geometry, metric)
  Tolerances tol;
  int trials = 0;
  int identity_trials = 100;
  int vectors = 200;
  int max_points = -1;
  json flow;
  fs::path base_dir;
};

[[noreturn]] void bad(ErrorCode c, const std::string& msg) { throw Error(c, msg); }

Mat randn(Eigen::Index m, Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  return Mat::NullaryExpr(m, n, [&]() { return nd(rng); });
}

Mat load_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) bad(ErrorCode::Io, "cannot read matrix file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      if (b == std::string::npos) bad(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": empty field");
      const std::string tok = cell.substr(b, e - b + 1);
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size() || !std::isfinite(v))
        bad(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
      row.push_back(v);
    }
    if (!line.empty() && line.back() == ',')
      bad(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": trailing comma");
    if (!rows.empty() && row.size() != rows.front().size())
      bad(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) bad(ErrorCode::Parse, path.string() + ": no data");
  Mat M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  return M;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(ErrorCode::Parse, std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) bad(ErrorCode::Parse, "unknown field '" + it.key() + "' in " + where);
}

Tolerances parse_tolerances(const json& j) {
  Tolerances t;
  if (j.is_null()) return t;
  if (!j.is_object()) bad(ErrorCode::Parse, "tolerances must be an object");
  const std::vector<std::pair<const char*, double*>> fields = {
      {"gradient_fd", &t.gradient_fd},       {"conversion", &t.conversion},
      {"roundtrip", &t.roundtrip},           {"sandwich_slack", &t.sandwich_slack},
      {"spectra_equal", &t.spectra_equal},   {"flow_identical", &t.flow_identical},
      {"flow_residual", &t.flow_residual},   {"classify_grad", &t.classify_grad},
      {"classify_hess", &t.classify_hess},   {"classify_saddle", &t.classify_saddle}};
  std::set<std::string> known;
  for (auto& [k, p] : fields) {
    known.insert(k);
    *p = get_or<double>(j, k, *p);
    if (!(*p > 0.0)) bad(ErrorCode::Parse, std::string("tolerance '") + k + "' must be positive");
  }
  reject_unknown(j, known, "tolerances");
  return t;
}

json tolerances_json(const Tolerances& t) {
  return json{{"gradient_fd", t.gradient_fd},       {"conversion", t.conversion},
              {"roundtrip", t.roundtrip},           {"sandwich_slack", t.sandwich_slack},
              {"spectra_equal", t.spectra_equal},   {"flow_identical", t.flow_identical},
              {"flow_residual", t.flow_residual},   {"classify_grad", t.classify_grad},
              {"classify_hess", t.classify_hess},   {"classify_saddle", t.classify_saddle}};
}

// Synthetic target: Gaussian G from the seed, M = G (general) or G G^T / p (PSD), then the
// rank-k truncation of M with k = target_rank.
Mat synthetic_target(const ProblemSpec& s, std::mt19937_64& rng) {
  const Mat G = randn(s.p1, s.p2, rng);
  Mat M = s.psd ? Mat(sym(G * G.transpose() / static_cast<double>(s.p1))) : G;
  if (s.target_rank < std::min(s.p1, s.p2)) M = truncate_point(M, s.target_rank, s.psd ? Kind::Psd : Kind::General).X;
  return M;
}

void build_problem(const json& pj, Setup& st, std::mt19937_64& rng) {
  if (!pj.is_object()) bad(ErrorCode::Parse, "config needs a 'problem' object");
  reject_unknown(pj, {"kind", "type", "p", "p1", "p2", "r", "target", "diagonal", "target_rank", "mask",
                      "mask_density", "measurements"},
                 "problem");
  ProblemSpec& s = st.spec;
  s.kind = get_or<std::string>(pj, "kind", "approx");
  if (s.kind != "approx" && s.kind != "completion" && s.kind != "sensing")
    bad(ErrorCode::Variant, "problem kind must be approx, completion or sensing");
  const std::string type = get_or<std::string>(pj, "type", "psd");
  if (type != "psd" && type != "general") bad(ErrorCode::Variant, "problem type must be psd or general");
  s.psd = type == "psd";
  const auto p = get_or<Eigen::Index>(pj, "p", 0);
  s.p1 = get_or<Eigen::Index>(pj, "p1", p);
  s.p2 = get_or<Eigen::Index>(pj, "p2", s.psd ? s.p1 : p);
  s.r = get_or<Eigen::Index>(pj, "r", 0);

  const int sources = int(pj.contains("target")) + int(pj.contains("diagonal"));
  if (sources > 1) bad(ErrorCode::Parse, "give at most one of 'target' and 'diagonal'");
  if (pj.contains("target")) {
    s.target_source = get_or<std::string>(pj, "target", "");
    st.M = load_csv(st.base_dir / s.target_source);
    if (s.p1 == 0) s.p1 = st.M.rows();
    if (s.p2 == 0) s.p2 = st.M.cols();
    if (st.M.rows() != s.p1 || st.M.cols() != s.p2)
      bad(ErrorCode::Dimension, "target file shape does not match p1 x p2");
  } else if (pj.contains("diagonal")) {
    s.target_source = "diagonal";
    const auto d = get_or<std::vector<double>>(pj, "diagonal", {});
    if (s.p1 == 0) s.p1 = static_cast<Eigen::Index>(d.size());
    if (s.p2 == 0) s.p2 = s.p1;
    if (d.empty() || static_cast<Eigen::Index>(d.size()) > std::min(s.p1, s.p2))
      bad(ErrorCode::Dimension, "diagonal longer than min(p1, p2)");
    st.M = Mat::Zero(s.p1, s.p2);
    for (size_t i = 0; i < d.size(); ++i) st.M(i, i) = d[i];
  } else {
    s.target_source = "synthetic";
  }
  if (s.p1 < 1 || s.p2 < 1) bad(ErrorCode::Dimension, "p1 and p2 must be positive");
  if (s.psd && s.p1 != s.p2) bad(ErrorCode::Dimension, "psd problems need p1 == p2");
  if (s.r < 1 || s.r > std::min(s.p1, s.p2)) bad(ErrorCode::Dimension, "r must satisfy 1 <= r <= min(p1, p2)");
  if (s.psd && s.target_source != "synthetic" && (st.M - st.M.transpose()).norm() > 1e-12 * (1.0 + st.M.norm()))
    bad(ErrorCode::Symmetry, "psd problem needs a symmetric target");

  s.target_rank = get_or<Eigen::Index>(pj, "target_rank", s.kind == "approx" ? std::min(s.p1, s.p2) : s.r);
  if (s.target_rank < 1 || s.target_rank > std::min(s.p1, s.p2))
    bad(ErrorCode::Dimension, "target_rank out of range");
  if (s.target_source == "synthetic") st.M = synthetic_target(s, rng);

  if (s.kind == "approx") {
    st.obj.emplace(make_matrix_approx(st.M, s.psd));
  } else if (s.kind == "completion") {
    Mat mask;
    if (pj.contains("mask")) {
      mask = load_csv(st.base_dir / get_or<std::string>(pj, "mask", ""));
      if (mask.rows() != s.p1 || mask.cols() != s.p2) bad(ErrorCode::Dimension, "mask shape does not match p1 x p2");
    } else {
      s.mask_density = get_or<double>(pj, "mask_density", 0.5);
      if (!(s.mask_density > 0.0 && s.mask_density <= 1.0)) bad(ErrorCode::Parse, "mask_density must be in (0, 1]");
      std::bernoulli_distribution coin(s.mask_density);
      mask = Mat::Zero(s.p1, s.p2);
      for (Eigen::Index j = 0; j < s.p2; ++j)
        for (Eigen::Index i = 0; i < s.p1; ++i) {
          if (s.psd && i > j) continue;
          mask(i, j) = coin(rng) ? 1.0 : 0.0;
          if (s.psd) mask(j, i) = mask(i, j);
        }
    }
    st.obj.emplace(make_masked_completion(st.M, mask, s.psd));
  } else {
    s.measurements = get_or<Eigen::Index>(pj, "measurements", 3 * s.p1 * s.p2);
    if (s.measurements < 1) bad(ErrorCode::Parse, "measurements must be positive");
    std::vector<Mat> A;
    Vec b(s.measurements);
    const double scale = 1.0 / std::sqrt(static_cast<double>(s.measurements));
    for (Eigen::Index i = 0; i < s.measurements; ++i) {
      A.push_back(scale * randn(s.p1, s.p2, rng));
      b(i) = inner(A.back(), st.M);
    }
    st.obj.emplace(make_matrix_sensing(A, b, s.psd));
  }
}

void select_geometries(const json& cfg, Setup& st) {
  const Kind kind = st.spec.psd ? Kind::Psd : Kind::General;
  if (cfg.contains("geometries")) {
    for (const auto& name : get_or<std::vector<std::string>>(cfg, "geometries", {})) {
      const Geometry g = parse_geometry(name);
      if (kind_of(g) != kind)
        bad(ErrorCode::Variant, "geometry " + name + " does not match the problem type");
      if (std::find(st.geometries.begin(), st.geometries.end(), g) == st.geometries.end()) st.geometries.push_back(g);
    }
    if (st.geometries.empty()) bad(ErrorCode::Parse, "empty geometry list");
  } else {
    for (Geometry g : all_geometries())
      if (kind_of(g) == kind) st.geometries.push_back(g);
  }
  std::vector<std::string> names;
  if (cfg.contains("metrics")) names = get_or<std::vector<std::string>>(cfg, "metrics", {});
  std::vector<bool> used(names.size(), false);
  for (Geometry g : st.geometries) {
    for (Metric m : metrics_for(g)) {
      bool take = names.empty() || m == Metric::Euclidean;
      for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == to_string(m)) take = used[i] = true;
      if (take) st.pairs.emplace_back(g, m);
    }
  }
  for (size_t i = 0; i < names.size(); ++i)
    if (!used[i] && names[i] != "euclidean")
      bad(ErrorCode::Enumeration, "metric '" + names[i] + "' is not enumerated for any selected geometry");
}

Setup parse_setup(const std::string& command, const std::string& text, const RunOptions& opts) {
  if (std::find(kCommands, kCommands + kCommandCount, command) == kCommands + kCommandCount)
    bad(ErrorCode::Variant, "unknown command '" + command + "'");
  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(ErrorCode::Parse, std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) bad(ErrorCode::Parse, "config must be a JSON object");
  reject_unknown(cfg, {"command", "problem", "geometries", "metrics", "seed", "tolerances", "output", "trials",
                       "identity_trials", "vectors", "max_points", "flow"},
                 "config");
  Setup st;
  st.command = command;
  if (cfg.contains("command") && get_or<std::string>(cfg, "command", "") != command)
    bad(ErrorCode::Parse, "config command does not match the requested command");
  st.base_dir = opts.base_dir.empty() ? fs::path(".") : fs::path(opts.base_dir);
  st.seed = opts.seed ? *opts.seed : get_or<std::uint64_t>(cfg, "seed", 0);
  st.tol = parse_tolerances(cfg.contains("tolerances") ? cfg.at("tolerances") : json());
  const int default_trials = command == "check-gradients" ? 20 : command == "bijection-roundtrip" ? 3 : 1;
  st.trials = get_or<int>(cfg, "trials", default_trials);
  st.identity_trials = get_or<int>(cfg, "identity_trials", 100);
  st.vectors = get_or<int>(cfg, "vectors", 200);
  st.max_points = get_or<int>(cfg, "max_points", -1);
  if (st.trials < 1 || st.identity_trials < 1 || st.vectors < 1)
    bad(ErrorCode::Parse, "trials, identity_trials and vectors must be positive");
  st.flow = cfg.contains("flow") ? cfg.at("flow") : json::object();
  if (!st.flow.is_object()) bad(ErrorCode::Parse, "flow must be an object");
  std::mt19937_64 rng(st.seed);
  build_problem(cfg.contains("problem") ? cfg.at("problem") : json(), st, rng);
  select_geometries(cfg, st);
  return st;
}

// ---------------------------------------------------------------------------------------------

struct Checks {
  json list = json::array();
  bool timestamps = true;
  int passed = 0;

  void add(json c, bool pass, double seconds) {
    c["pass"] = pass;
    if (timestamps) c["seconds"] = seconds;
    passed += pass ? 1 : 0;
    list.push_back(std::move(c));
  }
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Kind problem_kind(const Setup& st) { return st.spec.psd ? Kind::Psd : Kind::General; }

EmbeddedPoint random_point(const Setup& st, std::mt19937_64& rng) {
  const Eigen::Index p1 = st.spec.p1, p2 = st.spec.p2, r = st.spec.r;
  if (st.spec.psd) {
    const Mat G = randn(p1, r, rng) + 2.0 * Mat::Identity(p1, r);
    return embed_point(G * G.transpose(), r, Kind::Psd);
  }
  const Mat A = randn(p1, r, rng) + 2.0 * Mat::Identity(p1, r);
  const Mat B = randn(p2, r, rng) + 2.0 * Mat::Identity(p2, r);
  return embed_point(A * B.transpose(), r, Kind::General);
}

Mat random_group_element(Geometry g, Eigen::Index r, std::mt19937_64& rng) {
  if (g == Geometry::GenQ1) return Mat::Identity(r, r) + 0.3 * randn(r, r, rng);
  return qf(randn(r, r, rng));
}

// A random non-canonical representative: the canonical lift moved along its fiber.
QuotientPoint random_lift(const EmbeddedPoint& pt, Geometry g, std::mt19937_64& rng) {
  return act(lift_point(pt, g), random_group_element(g, pt.rank(), rng));
}

json pair_json(Geometry g, Metric m) { return json{{"geometry", to_string(g)}, {"metric", to_string(m)}}; }

std::string coefficient_row(const SandwichCoefficients& c) {
  std::ostringstream os;
  os << to_string(c.geometry) << " | " << to_string(c.metric) << " | (alpha, beta) = " << c.closed_form;
  return os.str();
}

// ---------------------------------------------------------------------------------------------

void run_dims(const Setup& st, Checks& out) {
  std::mt19937_64 rng(st.seed + 1);
  const EmbeddedPoint pt = random_point(st, rng);
  for (auto [g, m] : st.pairs) {
    const auto t0 = Clock::now();
    const Eigen::Index formula = manifold_dim(g, st.spec.p1, st.spec.p2, st.spec.r);
    const Eigen::Index count = is_quotient(g) ? static_cast<Eigen::Index>(horizontal_basis(random_lift(pt, g, rng), m).size())
                                              : static_cast<Eigen::Index>(tangent_basis(pt).size());
    json c = pair_json(g, m);
    c["check"] = "dimension";
    c["p1"] = st.spec.p1;
    c["p2"] = st.spec.p2;
    c["r"] = st.spec.r;
    c["dimension"] = formula;
    c["basis_size"] = count;
    out.add(std::move(c), formula == count, since(t0));
  }
}

void run_check_gradients(const Setup& st, Checks& out) {
  const Objective& obj = *st.obj;
  std::mt19937_64 rng(st.seed + 2);
  for (auto [g, m] : st.pairs) {
    const auto t0 = Clock::now();
    double max_fd = 0.0, max_conv = 0.0;
    int directions = 0;
    std::string error;
    try {
      for (int t = 0; t < st.trials; ++t) {
        const EmbeddedPoint pt = random_point(st, rng);
        if (!is_quotient(g)) {
          const EmbeddedTangent grad = riem_grad_embedded(pt, obj);
          const double gn = std::sqrt(tangent_inner(grad, grad));
          for (const EmbeddedTangent& xi : tangent_basis(pt)) {
            const double h = 1e-5 / std::sqrt(tangent_inner(xi, xi));
            const double fd = (obj.value(retract(pt, xi, h).X) - obj.value(retract(pt, xi, -h).X)) / (2 * h);
            const double an = tangent_inner(grad, xi);
            const double scale = std::max(gn * std::sqrt(tangent_inner(xi, xi)), 1e-12 * (1.0 + std::abs(obj.value(pt.X))));
            max_fd = std::max(max_fd, std::abs(fd - an) / scale);
            ++directions;
          }
          continue;
        }
        const QuotientPoint Z = random_lift(pt, g, rng);
        const HorizontalVector grad = riem_grad_quotient(Z, obj, m);
        const double gn = std::sqrt(metric_inner(Z, m, grad, grad));
        for (const HorizontalVector& th : horizontal_basis(Z, m)) {
          const double tn = th.frob_norm();
          const double h = 1e-5 / tn;
          const double fd = (obj.value(represented_along(Z, th, h)) - obj.value(represented_along(Z, th, -h))) / (2 * h);
          const double an = metric_inner(Z, m, grad, th);
          const double scale = std::max(gn * std::sqrt(metric_inner(Z, m, th, th)), 1e-12 * (1.0 + std::abs(obj.value(Z.base.X))));
          max_fd = std::max(max_fd, std::abs(fd - an) / scale);
          ++directions;
        }
        // conversions between the two gradients at the same (non-stationary) point
        const EmbeddedTangent ge = riem_grad_embedded(Z.base, obj);
        const EmbeddedTangent from_q = grad_embedded_from_quotient(Z, grad, m);
        const EmbeddedTangent d1 = tangent_axpy(-1.0, ge, from_q);
        const double ge_n = std::sqrt(tangent_inner(ge, ge));
        max_conv = std::max(max_conv, std::sqrt(tangent_inner(d1, d1)) / std::max(ge_n, 1e-300));
        const HorizontalVector from_e = grad_quotient_from_embedded(Z, ge, m);
        max_conv = std::max(max_conv, (from_e - grad).frob_norm() / std::max(grad.frob_norm(), 1e-300));
      }
    } catch (const Error& e) {
      error = e.what();
    }
    json c = pair_json(g, m);
    c["check"] = "gradient";
    c["points"] = st.trials;
    c["directions"] = directions;
    c["max_fd_rel_err"] = max_fd;
    c["fd_tol"] = st.tol.gradient_fd;
    bool pass = error.empty() && max_fd <= st.tol.gradient_fd;
    if (is_quotient(g)) {
      c["max_conversion_rel_err"] = max_conv;
      c["conversion_tol"] = st.tol.conversion;
      pass = pass && max_conv <= st.tol.conversion;
    }
    if (!error.empty()) c["error"] = error;
    out.add(std::move(c), pass, since(t0));
  }
}

std::vector<EmbeddedPoint> stationary_points(const Setup& st) {
  if (st.spec.kind != "approx")
    bad(ErrorCode::Precondition, st.command + " needs a matrix approximation problem (kind approx)");
  std::vector<EmbeddedPoint> pts = analytic_fosps(*st.obj, st.spec.r);
  if (st.max_points >= 0 && static_cast<int>(pts.size()) > st.max_points) pts.resize(st.max_points);
  return pts;
}

const char* const kToleranceNote =
    "stationarity is only approximate in floating point; the Hessian identity tolerance is "
    "identity_tol = slack + grad_norm / spectral_scale and each check records grad_norm";

void run_verify_sandwich(const Setup& st, Checks& out, json& notes) {
  const std::vector<EmbeddedPoint> pts = stationary_points(st);
  notes.push_back(kToleranceNote);
  std::mt19937_64 rng(st.seed + 3);
  for (size_t i = 0; i < pts.size(); ++i) {
    for (auto [g, m] : st.pairs) {
      if (!is_quotient(g)) continue;
      const auto t0 = Clock::now();
      json c = pair_json(g, m);
      c["check"] = "sandwich";
      c["point"] = i;
      bool pass = false;
      try {
        const QuotientPoint Z = random_lift(pts[i], g, rng);
        const SandwichReport rep = verify_sandwich(Z, *st.obj, m, st.identity_trials, st.seed + 1000 * i + 7);
        const bool unit = rep.coefficients.alpha == 1.0 && rep.coefficients.beta == 1.0;
        c["alpha"] = rep.coefficients.alpha;
        c["beta"] = rep.coefficients.beta;
        c["coefficient_row"] = coefficient_row(rep.coefficients);
        c["eigenvalues_quotient"] = vec_json(rep.eig_quotient);
        c["eigenvalues_embedded"] = vec_json(rep.eig_embedded);
        c["lower_margin"] = vec_json(rep.lower_margin);
        c["upper_margin"] = vec_json(rep.upper_margin);
        c["spectral_scale"] = rep.spectral_scale;
        c["min_margin"] = rep.min_margin;
        c["slack_tol"] = st.tol.sandwich_slack;
        c["grad_norm"] = rep.grad_norm;
        c["fosp_tol"] = rep.fosp_tol;
        c["identity_trials"] = rep.identity_trials;
        c["identity_max_rel_err"] = rep.identity_max_rel_err;
        c["identity_tol"] = rep.identity_tol;
        c["spectra_max_rel_diff"] = rep.spectra_max_rel_diff;
        pass = rep.min_margin >= -st.tol.sandwich_slack && rep.identity_ok;
        if (unit) {
          c["spectra_equal_tol"] = st.tol.spectra_equal;
          pass = pass && rep.spectra_max_rel_diff <= st.tol.spectra_equal;
        }
      } catch (const Error& e) {
        c["error"] = e.what();
      }
      out.add(std::move(c), pass, since(t0));
    }
  }
}

std::string label(const StationaryClassification& s) {
  if (!s.is_fosp) return "not-stationary";
  if (s.is_sosp) return "sosp";
  if (s.is_strict_saddle) return "strict-saddle";
  return "degenerate";
}

void run_classify(const Setup& st, Checks& out) {
  const std::vector<EmbeddedPoint> pts = stationary_points(st);
  const ClassifyTolerances ct{st.tol.classify_grad, st.tol.classify_hess, st.tol.classify_saddle};
  size_t best = 0;
  for (size_t i = 1; i < pts.size(); ++i)
    if (st.obj->value(pts[i].X) < st.obj->value(pts[best].X)) best = i;
  for (size_t i = 0; i < pts.size(); ++i) {
    const auto t0 = Clock::now();
    json c;
    c["check"] = "classification";
    c["point"] = i;
    c["objective"] = st.obj->value(pts[i].X);
    c["expected"] = i == best ? "sosp" : "strict-saddle";
    json per = json::array();
    bool agree = true, expected = true;
    std::string first;
    for (auto [g, m] : st.pairs) {
      json e = pair_json(g, m);
      try {
        const StationaryClassification s = classify_point(pts[i], *st.obj, g, m, ct);
        const std::string l = label(s);
        e["label"] = l;
        e["min_eigenvalue"] = s.min_eigenvalue;
        e["grad_norm"] = s.grad_norm;
        if (first.empty()) first = l;
        agree = agree && l == first;
        expected = expected && l == c["expected"].get<std::string>();
      } catch (const Error& err) {
        e["error"] = err.what();
        agree = expected = false;
      }
      per.push_back(std::move(e));
    }
    c["geometries"] = std::move(per);
    c["agree"] = agree;
    c["matches_expected"] = expected;
    out.add(std::move(c), agree && expected, since(t0));
  }
}

void run_bijection(const Setup& st, Checks& out) {
  std::mt19937_64 rng(st.seed + 4);
  for (auto [g, m] : st.pairs) {
    if (!is_quotient(g)) continue;
    const auto t0 = Clock::now();
    json c = pair_json(g, m);
    c["check"] = "bijection";
    double max_inv_fwd = 0.0, max_fwd_inv = 0.0, min_lower = std::numeric_limits<double>::infinity(),
           min_upper = std::numeric_limits<double>::infinity();
    std::string error;
    json coeff = json::array();
    try {
      for (int t = 0; t < st.trials; ++t) {
        const QuotientPoint Z = random_lift(random_point(st, rng), g, rng);
        const SandwichCoefficients sc = spectrum_bounds(Z, m);
        coeff.push_back(json{{"alpha", sc.alpha}, {"beta", sc.beta}, {"coefficient_row", coefficient_row(sc)}});
        for (int k = 0; k < st.vectors; ++k) {
          const HorizontalVector th = random_horizontal(Z, m, rng);
          const EmbeddedTangent xi = forward_map(Z, th, m);
          max_inv_fwd = std::max(max_inv_fwd, (inverse_map(Z, xi, m) - th).frob_norm() / th.frob_norm());
          const EmbeddedTangent eta = tangent_project(Z.base, randn(st.spec.p1, st.spec.p2, rng));
          const EmbeddedTangent back = forward_map(Z, inverse_map(Z, eta, m), m);
          const EmbeddedTangent d = tangent_axpy(-1.0, eta, back);
          max_fwd_inv = std::max(max_fwd_inv, std::sqrt(tangent_inner(d, d) / tangent_inner(eta, eta)));
          const double n2 = tangent_inner(xi, xi);
          const double g2 = metric_inner(Z, m, th, th);
          min_lower = std::min(min_lower, (n2 - sc.alpha * g2) / n2);
          min_upper = std::min(min_upper, (sc.beta * g2 - n2) / n2);
        }
      }
    } catch (const Error& e) {
      error = e.what();
    }
    c["points"] = st.trials;
    c["vectors_per_point"] = st.vectors;
    c["coefficients"] = std::move(coeff);
    c["max_inverse_forward_residual"] = max_inv_fwd;
    c["max_forward_inverse_residual"] = max_fwd_inv;
    c["min_lower_slack"] = min_lower;
    c["min_upper_slack"] = min_upper;
    c["tol"] = st.tol.roundtrip;
    const bool pass = error.empty() && max_inv_fwd <= st.tol.roundtrip && max_fwd_inv <= st.tol.roundtrip &&
                      min_lower >= -st.tol.roundtrip && min_upper >= -st.tol.roundtrip;
    if (!error.empty()) c["error"] = error;
    out.add(std::move(c), pass, since(t0));
  }
}

FlowSource parse_source(const json& j) {
  if (!j.is_object() || !j.contains("geometry")) bad(ErrorCode::Parse, "flow source needs a geometry");
  FlowSource s;
  s.geometry = parse_geometry(get_or<std::string>(j, "geometry", ""));
  s.metric = parse_metric(s.geometry, get_or<std::string>(j, "metric", is_quotient(s.geometry) ? "" : "euclidean"));
  if (!is_supported_flow_source(s))
    bad(ErrorCode::Enumeration, "no flow for " + to_string(s.geometry) + " with metric " + to_string(s.metric));
  return s;
}

bool identical_fields(const FlowSource& a, const FlowSource& b) {
  auto unit = [](const FlowSource& s) {
    return !is_quotient(s.geometry) || s.metric == Metric::Q2TwoBSqId || s.metric == Metric::G3GramId;
  };
  return unit(a) && unit(b);
}

bool q1_pair(const FlowSource& a, const FlowSource& b) {
  return !is_quotient(a.geometry) && (b.geometry == Geometry::PsdQ1 || b.geometry == Geometry::GenQ1);
}

void run_flow_compare(const Setup& st, Checks& out, json& notes) {
  reject_unknown(st.flow, {"T", "dt", "pairs", "trace_csv"}, "flow");
  const double T = get_or<double>(st.flow, "T", 5.0);
  const double dt = get_or<double>(st.flow, "dt", 1e-3);
  if (!(T > 0.0) || !(dt > 0.0)) bad(ErrorCode::Parse, "flow T and dt must be positive");
  std::vector<std::pair<FlowSource, FlowSource>> pairs;
  if (st.flow.contains("pairs")) {
    const json& pj = st.flow.at("pairs");
    if (!pj.is_array()) bad(ErrorCode::Parse, "flow pairs must be an array");
    for (const json& p : pj) {
      if (!p.is_array() || p.size() != 2) bad(ErrorCode::Parse, "each flow pair is [source, source]");
      pairs.emplace_back(parse_source(p[0]), parse_source(p[1]));
      if (kind_of(pairs.back().first.geometry) != problem_kind(st) || kind_of(pairs.back().second.geometry) != problem_kind(st))
        bad(ErrorCode::Variant, "flow sources must match the problem type");
    }
  } else if (st.spec.psd) {
    pairs = {{{Geometry::EmbeddedPsd, Metric::Euclidean}, {Geometry::PsdQ2, Metric::Q2TwoBSqId}},
             {{Geometry::EmbeddedPsd, Metric::Euclidean}, {Geometry::PsdQ1, Metric::Q1TwoGram}}};
  } else {
    pairs = {{{Geometry::EmbeddedGeneral, Metric::Euclidean}, {Geometry::GenQ3, Metric::G3GramId}},
             {{Geometry::EmbeddedGeneral, Metric::Euclidean}, {Geometry::GenQ1, Metric::G1CrossGrams}}};
  }
  const std::string csv = get_or<std::string>(st.flow, "trace_csv", "");
  notes.push_back("q1 pairs are not expected to coincide; their trajectory deviation is reported, and the check "
                  "compares the field difference with the residual term along the embedded trace");
  std::mt19937_64 rng(st.seed + 5);
  const EmbeddedPoint X0 = random_point(st, rng);
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto& [a, b] = pairs[i];
    const auto t0 = Clock::now();
    json c;
    c["check"] = "flow";
    c["a"] = pair_json(a.geometry, a.metric);
    c["b"] = pair_json(b.geometry, b.metric);
    c["T"] = T;
    c["dt"] = dt;
    bool pass = false;
    try {
      const FlowTrace ta = integrate_flow(X0, *st.obj, a, T, dt);
      const FlowTrace tb = integrate_flow(X0, *st.obj, b, T, dt);
      double dev = 0.0;
      const size_t n = std::min(ta.states.size(), tb.states.size());
      for (size_t k = 0; k < n; ++k) dev = std::max(dev, (ta.states[k] - tb.states[k]).norm());
      const bool degenerate = ta.degenerate || tb.degenerate;
      c["steps"] = n - 1;
      c["degenerate"] = degenerate;
      c["max_deviation"] = dev;
      c["f_initial"] = st.obj->value(ta.states.front());
      c["f_final_a"] = st.obj->value(ta.states.back());
      c["f_final_b"] = st.obj->value(tb.states.back());
      if (!csv.empty()) {
        for (const auto& [tr, tag] : {std::pair{&ta, "a"}, std::pair{&tb, "b"}}) {
          const fs::path path = st.base_dir / (csv + "_" + std::to_string(i) + "_" + tag + ".csv");
          std::ofstream os(path);
          if (!os) bad(ErrorCode::Io, "cannot write " + path.string());
          write_trace_csv(*tr, os);
        }
      }
      if (identical_fields(a, b)) {
        c["relation"] = "identical";
        c["tol"] = st.tol.flow_identical;
        pass = !degenerate && dev <= st.tol.flow_identical;
      } else if (q1_pair(a, b) || q1_pair(b, a)) {
        const bool fwd = q1_pair(a, b);
        const FlowTrace& emb = fwd ? ta : tb;
        const FieldDifference fd = field_difference_along(emb, *st.obj, fwd ? a : b, fwd ? b : a);
        double max_diff = 0.0, max_res = 0.0;
        for (size_t k = 0; k < fd.diff_norm.size(); ++k) {
          max_diff = std::max(max_diff, fd.diff_norm[k]);
          max_res = std::max(max_res, fd.residual_norm[k]);
        }
        c["relation"] = "residual";
        c["max_difference_field_norm"] = max_diff;
        c["max_residual_norm"] = max_res;
        c["max_mismatch"] = fd.max_mismatch;
        c["tol"] = st.tol.flow_residual;
        pass = !emb.degenerate && fd.max_mismatch <= st.tol.flow_residual;
      } else {
        c["relation"] = "reported";
        pass = !degenerate;
      }
    } catch (const Error& e) {
      c["error"] = e.what();
    }
    out.add(std::move(c), pass, since(t0));
  }
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

RunResult run_experiment(const std::string& command, const std::string& config_json, const RunOptions& opts) {
  const auto t0 = Clock::now();
  Setup st = parse_setup(command, config_json, opts);

  Checks checks;
  checks.timestamps = opts.timestamps;
  json notes = json::array();
  if (command == "dims") run_dims(st, checks);
  else if (command == "check-gradients") run_check_gradients(st, checks);
  else if (command == "verify-sandwich") run_verify_sandwich(st, checks, notes);
  else if (command == "classify") run_classify(st, checks);
  else if (command == "bijection-roundtrip") run_bijection(st, checks);
  else run_flow_compare(st, checks, notes);

  const int total = static_cast<int>(checks.list.size());
  const bool all_pass = total > 0 && checks.passed == total;
  json rep;
  rep["schema"] = "georank-report/1";
  rep["command"] = command;
  rep["seed"] = st.seed;
  json prob;
  prob["kind"] = st.spec.kind;
  prob["type"] = st.spec.psd ? "psd" : "general";
  prob["p1"] = st.spec.p1;
  prob["p2"] = st.spec.p2;
  prob["r"] = st.spec.r;
  prob["target"] = st.spec.target_source;
  if (st.spec.target_source == "synthetic") {
    prob["target_rank"] = st.spec.target_rank;
    prob["recipe"] = st.spec.psd ? "G ~ N(0,1)^{p x p} from mt19937_64(seed); M = trunc_k(G G^T / p)"
                                 : "G ~ N(0,1)^{p1 x p2} from mt19937_64(seed); M = trunc_k(G)";
  }
  if (st.spec.kind == "completion") prob["mask_density"] = st.spec.mask_density;
  if (st.spec.kind == "sensing") prob["measurements"] = st.spec.measurements;
  rep["problem"] = std::move(prob);
  rep["tolerances"] = tolerances_json(st.tol);
  rep["checks"] = std::move(checks.list);
  rep["summary"] = json{{"checks", total}, {"passed", checks.passed}, {"failed", total - checks.passed}, {"all_pass", all_pass}};
  if (!notes.empty()) rep["notes"] = std::move(notes);
  if (opts.timestamps) {
    rep["generated_at"] = utc_now();
    rep["timings"] = json{{"total_seconds", since(t0)}};
  }
  return {rep.dump(2) + "\n", all_pass};
}

}  // namespace georank
