#include "georank/georank.h"

#include "georank/landscape.hpp"
#include "georank/runner.hpp"
#include "georank/tags.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct georank_objective {
  georank::Objective obj;
};

struct georank_point {
  georank::EmbeddedPoint pt;
};

namespace {

thread_local std::string last_error;

georank_status fail(georank_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <typename F>
georank_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return GEORANK_OK;
  } catch (const georank::Error& e) {
    return fail(static_cast<georank_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GEORANK_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GEORANK_E_INTERNAL, e.what());
  }
}

georank::Mat from_buffer(const double* data, int64_t p1, int64_t p2) {
  return Eigen::Map<const georank::Mat>(data, p1, p2);
}

void need(bool ok, const char* msg) {
  if (!ok) throw georank::Error(georank::ErrorCode::Precondition, msg);
}


}  // namespace

extern "C" {

const char* georank_last_error(void) { return last_error.c_str(); }

const char* georank_status_name(georank_status s) {
  switch (s) {
    case GEORANK_OK: return "ok";
    case GEORANK_E_DIMENSION: return "dimension";
    case GEORANK_E_RANK: return "rank";
    case GEORANK_E_SYMMETRY: return "symmetry";
    case GEORANK_E_PRECONDITION: return "precondition";
    case GEORANK_E_SINGULAR: return "singular";
    case GEORANK_E_CONDITIONING: return "conditioning";
    case GEORANK_E_VARIANT: return "variant";
    case GEORANK_E_EVALUATION: return "evaluation";
    case GEORANK_E_ENUMERATION: return "enumeration";
    case GEORANK_E_PARSE: return "parse";
    case GEORANK_E_IO: return "io";
    case GEORANK_E_AMBIGUITY: return "ambiguity";
    case GEORANK_E_ARGUMENT: return "argument";
    case GEORANK_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* georank_version(void) { return "1.0.0"; }

georank_status georank_objective_approx(const double* M, int64_t p1, int64_t p2, int symmetric,
                                        georank_objective** out) {
  if (!M || !out || p1 < 1 || p2 < 1) return fail(GEORANK_E_ARGUMENT, "null pointer or empty shape");
  *out = nullptr;
  return guarded([&] { *out = new georank_objective{georank::make_matrix_approx(from_buffer(M, p1, p2), symmetric != 0)}; });
}

georank_status georank_objective_value(const georank_objective* obj, const double* X, double* out) {
  if (!obj || !X || !out) return fail(GEORANK_E_ARGUMENT, "null pointer");
  return guarded([&] { *out = obj->obj.value(from_buffer(X, obj->obj.rows(), obj->obj.cols())); });
}

void georank_objective_free(georank_objective* obj) { delete obj; }

georank_status georank_point_embed(const double* X, int64_t p1, int64_t p2, int64_t r, int psd,
                                   georank_point** out) {
  if (!X || !out || p1 < 1 || p2 < 1) return fail(GEORANK_E_ARGUMENT, "null pointer or empty shape");
  *out = nullptr;
  return guarded([&] {
    *out = new georank_point{georank::embed_point(from_buffer(X, p1, p2), r,
                                                  psd ? georank::Kind::Psd : georank::Kind::General)};
  });
}

void georank_point_free(georank_point* pt) { delete pt; }

georank_status georank_manifold_dim(const char* geometry, int64_t p1, int64_t p2, int64_t r, int64_t* out) {
  if (!geometry || !out) return fail(GEORANK_E_ARGUMENT, "null pointer");
  return guarded([&] { *out = georank::manifold_dim(georank::parse_geometry(geometry), p1, p2, r); });
}

georank_status georank_grad_norm(const georank_point* pt, const georank_objective* obj, const char* geometry,
                                 const char* metric, double* out) {
  if (!pt || !obj || !geometry || !metric || !out) return fail(GEORANK_E_ARGUMENT, "null pointer");
  return guarded([&] {
    const georank::Geometry g = georank::parse_geometry(geometry);
    const georank::Metric m = georank::parse_metric(g, metric);
    need(georank::kind_of(g) == pt->pt.kind, "geometry kind does not match the point");
    if (!georank::is_quotient(g)) {
      *out = georank::embedded_grad_norm(pt->pt, obj->obj);
      return;
    }
    const georank::QuotientPoint Z = georank::lift_point(pt->pt, g);
    const georank::HorizontalVector grad = georank::riem_grad_quotient(Z, obj->obj, m);
    *out = std::sqrt(georank::metric_inner(Z, m, grad, grad));
  });
}

georank_status georank_hessian_spectrum(const georank_point* pt, const georank_objective* obj,
                                        const char* geometry, const char* metric, double* values,
                                        int64_t capacity, int64_t* count) {
  if (!pt || !obj || !geometry || !metric || !count || (capacity > 0 && !values))
    return fail(GEORANK_E_ARGUMENT, "null pointer");
  return guarded([&] {
    const georank::Geometry g = georank::parse_geometry(geometry);
    const georank::Metric m = georank::parse_metric(g, metric);
    need(georank::kind_of(g) == pt->pt.kind, "geometry kind does not match the point");
    const georank::SpectrumReport rep = georank::hessian_spectrum(pt->pt, obj->obj, g, m);
    *count = rep.eigenvalues.size();
    for (int64_t i = 0; i < std::min<int64_t>(capacity, *count); ++i) values[i] = rep.eigenvalues(i);
  });
}

georank_status georank_spectrum_bounds(const georank_point* pt, const char* geometry, const char* metric,
                                       double* alpha, double* beta) {
  if (!pt || !geometry || !metric || !alpha || !beta) return fail(GEORANK_E_ARGUMENT, "null pointer");
  return guarded([&] {
    const georank::Geometry g = georank::parse_geometry(geometry);
    const georank::Metric m = georank::parse_metric(g, metric);
    need(georank::is_quotient(g), "sandwich coefficients are defined for quotient geometries");
    need(georank::kind_of(g) == pt->pt.kind, "geometry kind does not match the point");
    const georank::SandwichCoefficients c = georank::spectrum_bounds(georank::lift_point(pt->pt, g), m);
    *alpha = c.alpha;
    *beta = c.beta;
  });
}

georank_status georank_classify(const georank_point* pt, const georank_objective* obj, const char* geometry,
                                const char* metric, int* is_fosp, int* is_sosp, int* is_strict_saddle) {
  if (!pt || !obj || !geometry || !metric || !is_fosp || !is_sosp || !is_strict_saddle)
    return fail(GEORANK_E_ARGUMENT, "null pointer");
  return guarded([&] {
    const georank::Geometry g = georank::parse_geometry(geometry);
    const georank::Metric m = georank::parse_metric(g, metric);
    need(georank::kind_of(g) == pt->pt.kind, "geometry kind does not match the point");
    const georank::StationaryClassification c = georank::classify_point(pt->pt, obj->obj, g, m);
    *is_fosp = c.is_fosp;
    *is_sosp = c.is_sosp;
    *is_strict_saddle = c.is_strict_saddle;
  });
}

georank_status georank_run(const char* command, const char* config_json, const char* base_dir, uint64_t seed,
                           int has_seed, int timestamps, char** report, int* all_pass) {
  if (!command || !config_json || !report || !all_pass) return fail(GEORANK_E_ARGUMENT, "null pointer");
  *report = nullptr;
  return guarded([&] {
    georank::RunOptions opts;
    if (base_dir) opts.base_dir = base_dir;
    if (has_seed) opts.seed = seed;
    opts.timestamps = timestamps != 0;
    const georank::RunResult res = georank::run_experiment(command, config_json, opts);
    char* buf = static_cast<char*>(std::malloc(res.report.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, res.report.c_str(), res.report.size() + 1);
    *report = buf;
    *all_pass = res.all_pass ? 1 : 0;
  });
}

void georank_string_free(char* s) { std::free(s); }

}  // extern "C"
