#include "wbc/wbc.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <optional>
#include <string>

#include "wbc/compare.hpp"
#include "wbc/datagen.hpp"
#include "wbc/free_support.hpp"
#include "wbc/io.hpp"
#include "wbc/simplex.hpp"
#include "wbc/solver.hpp"

struct wbc_instance {
  wbc::BarycenterInstance instance;
};

struct wbc_options {
  wbc::SolverConfig config;
  wbc::FreeSupportOptions free;
};

struct wbc_result {
  wbc::PrimalSolution primal;
  wbc::SolveReport report;
  std::optional<wbc::Matrix> supports;
};

namespace {

thread_local std::string last_error;

wbc_status fail(wbc_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs fn, mapping exceptions to status codes.
template <typename Fn>
wbc_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return WBC_OK;
  } catch (const wbc::ShapeMismatch& e) {
    return fail(WBC_ERR_SHAPE, e.what());
  } catch (const wbc::InvalidArgument& e) {
    return fail(WBC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const wbc::ParseError& e) {
    return fail(WBC_ERR_PARSE, e.what());
  } catch (const wbc::NumericalInstability& e) {
    return fail(WBC_ERR_NUMERICAL, e.what());
  } catch (const wbc::SizeLimitExceeded& e) {
    return fail(WBC_ERR_SIZE_LIMIT, e.what());
  } catch (const wbc::Error& e) {
    const std::string msg = e.what();
    const bool io = msg.rfind("cannot open", 0) == 0 || msg.rfind("failed writing", 0) == 0;
    return fail(io ? WBC_ERR_IO : WBC_ERR_INTERNAL, msg);
  } catch (const std::bad_alloc&) {
    return fail(WBC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(WBC_ERR_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* name) {
  if (!p) throw wbc::InvalidArgument(std::string(name) + " must not be NULL");
}

double parse_double(const std::string& key, const char* value) {
  char* end = nullptr;
  const double x = std::strtod(value, &end);
  if (end == value || *end != '\0' || !std::isfinite(x))
    throw wbc::InvalidArgument("option " + key + ": '" + value + "' is not a number");
  return x;
}

std::size_t parse_count(const std::string& key, const char* value) {
  char* end = nullptr;
  const long long x = std::strtoll(value, &end, 10);
  if (end == value || *end != '\0' || x < 0)
    throw wbc::InvalidArgument("option " + key + ": '" + value + "' is not a non-negative integer");
  return static_cast<std::size_t>(x);
}

bool parse_flag(const std::string& key, const char* value) {
  const std::string v = value;
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw wbc::InvalidArgument("option " + key + ": '" + v + "' is not a boolean");
}

void only_for(const wbc_options* opts, wbc::Method method, const std::string& key) {
  if (opts->config.method != method)
    throw wbc::InvalidArgument("option " + key + " applies to method " + wbc::to_string(method) +
                               ", not " + wbc::to_string(opts->config.method));
}

void set_option(wbc_options* o, const std::string& key, const char* value) {
  using wbc::Method;
  auto& c = o->config;
  if (key == "tol") {
    const double v = parse_double(key, value);
    c.sgs.tol = c.ibp.tol = c.badmm.tol = v;
  } else if (key == "max_iter") {
    const std::size_t v = parse_count(key, value);
    c.sgs.max_iter = c.ibp.max_iter = c.badmm.max_iter = v;
    c.lp.max_pivots = v > 0 ? v : c.lp.max_pivots;
  } else if (key == "threads") {
    const int v = static_cast<int>(parse_count(key, value));
    c.sgs.threads = c.ibp.threads = c.badmm.threads = v;
  } else if (key == "presolve") {
    c.presolve = parse_flag(key, value);
  } else if (key == "trace") {
    const bool v = parse_flag(key, value);
    c.sgs.record_trace = c.ibp.record_trace = c.badmm.record_trace = v;
  } else if (key == "beta0") {
    only_for(o, Method::Sgs, key);
    c.sgs.beta0 = parse_double(key, value);
  } else if (key == "tau") {
    only_for(o, Method::Sgs, key);
    c.sgs.tau = parse_double(key, value);
  } else if (key == "check_every") {
    only_for(o, Method::Sgs, key);
    c.sgs.check_every = parse_count(key, value);
  } else if (key == "penalty_update") {
    only_for(o, Method::Sgs, key);
    c.sgs.penalty_update = parse_flag(key, value);
  } else if (key == "scaling") {
    only_for(o, Method::Sgs, key);
    c.sgs.scaling = parse_flag(key, value);
  } else if (key == "epsilon") {
    only_for(o, Method::Ibp, key);
    c.ibp.epsilon = parse_double(key, value);
  } else if (key == "ibp_mode") {
    only_for(o, Method::Ibp, key);
    c.ibp.mode = wbc::parse_ibp_mode(value);
  } else if (key == "ibp_init") {
    only_for(o, Method::Ibp, key);
    c.ibp.init = wbc::parse_ibp_init(value);
  } else if (key == "normalize_costs") {
    only_for(o, Method::Ibp, key);
    c.ibp.normalize_costs = parse_flag(key, value);
  } else if (key == "rho") {
    only_for(o, Method::Badmm, key);
    c.badmm.rho = parse_double(key, value);
  } else if (key == "w_rule") {
    only_for(o, Method::Badmm, key);
    c.badmm.w_rule = wbc::parse_w_rule(value);
  } else if (key == "m") {
    o->free.m = parse_count(key, value);
  } else if (key == "seed") {
    o->free.seed = parse_count(key, value);
  } else if (key == "outer_tol") {
    o->free.tol = parse_double(key, value);
  } else if (key == "max_outer") {
    o->free.max_outer = parse_count(key, value);
  } else if (key == "inner_max_iter") {
    o->free.inner_max_iter = parse_count(key, value);
  } else if (key == "warm_start") {
    o->free.warm_start = parse_flag(key, value);
  } else {
    throw wbc::InvalidArgument("unknown option '" + key + "'");
  }
}

std::vector<wbc::DiscreteDistribution> distributions_of(const wbc::BarycenterInstance& inst) {
  const auto& supports = inst.distribution_supports();
  if (supports.size() != inst.num_distributions())
    throw wbc::InvalidArgument("free support needs an instance with support points");
  std::vector<wbc::DiscreteDistribution> out;
  for (std::size_t t = 0; t < supports.size(); ++t) out.push_back({inst.marginal(t), supports[t]});
  return out;
}

}  // namespace

extern "C" {

const char* wbc_last_error(void) { return last_error.c_str(); }

const char* wbc_status_name(wbc_status status) {
  switch (status) {
    case WBC_OK: return "ok";
    case WBC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case WBC_ERR_SHAPE: return "shape mismatch";
    case WBC_ERR_PARSE: return "parse error";
    case WBC_ERR_NUMERICAL: return "numerical instability";
    case WBC_ERR_SIZE_LIMIT: return "size limit exceeded";
    case WBC_ERR_IO: return "i/o error";
    case WBC_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* wbc_version(void) { return "1.0.0"; }

void wbc_string_free(char* s) { std::free(s); }

wbc_status wbc_instance_load(const char* path, wbc_instance** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new wbc_instance{wbc::load_instance(path)};
  });
}

wbc_status wbc_instance_parse(const char* json, wbc_instance** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new wbc_instance{wbc::parse_instance(json)};
  });
}

wbc_status wbc_instance_from_costs(size_t N, size_t m, const size_t* m_t,
                                   const double* const* costs, const double* const* marginals,
                                   const double* gammas, wbc_instance** out) {
  return guarded([&] {
    require(out, "out");
    if (N == 0 || m == 0) throw wbc::InvalidArgument("N and m must be positive");
    require(m_t, "m_t");
    require(costs, "costs");
    require(marginals, "marginals");
    wbc::MatrixList D;
    wbc::VectorList a;
    for (size_t t = 0; t < N; ++t) {
      require(costs[t], "costs[t]");
      require(marginals[t], "marginals[t]");
      const auto cols = static_cast<Eigen::Index>(m_t[t]);
      D.push_back(Eigen::Map<const wbc::Matrix>(costs[t], Eigen::Index(m), cols));
      a.push_back(Eigen::Map<const wbc::Vector>(marginals[t], cols));
    }
    wbc::Vector g;
    if (gammas) g = Eigen::Map<const wbc::Vector>(gammas, Eigen::Index(N));
    *out = new wbc_instance{wbc::BarycenterInstance::from_costs(std::move(D), std::move(a), g)};
  });
}

wbc_status wbc_instance_generate(const char* kind, const wbc_generate_params* p,
                                 wbc_instance** out) {
  return guarded([&] {
    require(kind, "kind");
    require(p, "params");
    require(out, "out");
    const std::string k = kind;
    wbc::BarycenterInstance inst;
    if (k == "1")
      inst = wbc::gen_case1(p->N, p->m, p->m_prime, p->d, p->seed);
    else if (k == "2")
      inst = wbc::gen_case2(p->N, p->m, p->m_prime, p->sparsity, p->d, p->seed);
    else if (k == "3")
      inst = wbc::gen_case3(p->N, p->m, p->d, p->seed);
    else if (k == "gauss-pair")
      inst = wbc::gaussian_pair_instance(p->n).instance;
    else
      throw wbc::InvalidArgument("unknown case '" + k + "' (expected 1, 2, 3 or gauss-pair)");
    *out = new wbc_instance{std::move(inst)};
  });
}

wbc_status wbc_gaussian_pair_truth(size_t n, double* out, size_t len) {
  return guarded([&] {
    require(out, "out");
    if (len != n) throw wbc::ShapeMismatch("output length must equal n");
    const auto pair = wbc::gaussian_pair_instance(n);
    std::memcpy(out, pair.true_barycenter.data(), n * sizeof(double));
  });
}

wbc_status wbc_instance_dims(const wbc_instance* inst, size_t* N, size_t* m) {
  return guarded([&] {
    require(inst, "instance");
    if (N) *N = inst->instance.num_distributions();
    if (m) *m = inst->instance.support_size();
  });
}

wbc_status wbc_instance_marginal_size(const wbc_instance* inst, size_t t, size_t* m_t) {
  return guarded([&] {
    require(inst, "instance");
    require(m_t, "m_t");
    if (t >= inst->instance.num_distributions())
      throw wbc::InvalidArgument("distribution index out of range");
    *m_t = inst->instance.marginal_size(t);
  });
}

wbc_status wbc_instance_to_json(const wbc_instance* inst, int indent, char** out) {
  return guarded([&] {
    require(inst, "instance");
    require(out, "out");
    *out = duplicate(wbc::instance_to_json(inst->instance, indent));
  });
}

wbc_status wbc_instance_save(const wbc_instance* inst, const char* path) {
  return guarded([&] {
    require(inst, "instance");
    require(path, "path");
    wbc::write_text_file(path, wbc::instance_to_json(inst->instance));
  });
}

void wbc_instance_free(wbc_instance* inst) { delete inst; }

wbc_status wbc_options_create(const char* method, wbc_options** out) {
  return guarded([&] {
    require(method, "method");
    require(out, "out");
    auto* o = new wbc_options;
    try {
      o->config.method = wbc::parse_method(method);
    } catch (...) {
      delete o;
      throw;
    }
    *out = o;
  });
}

wbc_status wbc_options_set(wbc_options* opts, const char* key, const char* value) {
  return guarded([&] {
    require(opts, "options");
    require(key, "key");
    require(value, "value");
    set_option(opts, key, value);
  });
}

void wbc_options_free(wbc_options* opts) { delete opts; }

wbc_status wbc_solve(const wbc_instance* inst, const wbc_options* opts, wbc_result** out) {
  return guarded([&] {
    require(inst, "instance");
    require(opts, "options");
    require(out, "out");
    auto outcome = wbc::solve(inst->instance, opts->config);
    *out = new wbc_result{std::move(outcome.primal), std::move(outcome.report), std::nullopt};
  });
}

wbc_status wbc_free_support(const wbc_instance* inst, const wbc_options* opts, wbc_result** out) {
  return guarded([&] {
    require(inst, "instance");
    require(opts, "options");
    require(out, "out");
    wbc::FreeSupportOptions fs = opts->free;
    fs.inner = opts->config;
    auto res = wbc::solve_free(distributions_of(inst->instance), inst->instance.gammas(), fs);
    wbc::PrimalSolution primal{res.barycenter.weights, std::move(res.plans)};
    *out = new wbc_result{std::move(primal), std::move(res.report), res.barycenter.supports};
  });
}

wbc_status wbc_result_summary(const wbc_result* res, wbc_summary* out) {
  return guarded([&] {
    require(res, "result");
    require(out, "out");
    const auto& r = res->report;
    const auto& t = r.termination_residuals;
    out->converged = r.converged ? 1 : 0;
    out->iterations = r.iterations;
    out->objective = r.objective;
    out->eta_feas = r.residuals.eta_feas;
    out->max_residual = std::max({t.eta_P, t.eta_D, t.eta_gap});
    out->wall_time = r.wall_time;
  });
}

wbc_status wbc_result_weights(const wbc_result* res, double* out, size_t len) {
  return guarded([&] {
    require(res, "result");
    require(out, "out");
    if (len != static_cast<size_t>(res->primal.w.size()))
      throw wbc::ShapeMismatch("weights have length " + std::to_string(res->primal.w.size()));
    std::memcpy(out, res->primal.w.data(), len * sizeof(double));
  });
}

wbc_status wbc_result_plan(const wbc_result* res, size_t t, double* out, size_t len) {
  return guarded([&] {
    require(res, "result");
    require(out, "out");
    if (t >= res->primal.plans.size()) throw wbc::InvalidArgument("plan index out of range");
    const auto& P = res->primal.plans[t];
    if (len != static_cast<size_t>(P.size()))
      throw wbc::ShapeMismatch("plan has " + std::to_string(P.size()) + " entries");
    std::memcpy(out, P.data(), len * sizeof(double));
  });
}

wbc_status wbc_result_supports(const wbc_result* res, size_t* d, double* out, size_t len) {
  return guarded([&] {
    require(res, "result");
    if (!res->supports) throw wbc::InvalidArgument("result has no support points");
    const auto& X = *res->supports;
    if (d) *d = static_cast<size_t>(X.rows());
    if (!out) return;
    if (len != static_cast<size_t>(X.size()))
      throw wbc::ShapeMismatch("supports have " + std::to_string(X.size()) + " entries");
    std::memcpy(out, X.data(), len * sizeof(double));
  });
}

wbc_status wbc_result_report_json(const wbc_result* res, char** out) {
  return guarded([&] {
    require(res, "result");
    require(out, "out");
    *out = duplicate(wbc::report_to_json(res->report));
  });
}

wbc_status wbc_result_solution_json(const wbc_result* res, int emit_plans, char** out) {
  return guarded([&] {
    require(res, "result");
    require(out, "out");
    if (res->supports) {
      wbc::DiscreteDistribution bary{res->primal.w, *res->supports};
      *out = duplicate(wbc::distribution_to_json(bary));
    } else {
      *out = duplicate(wbc::solution_to_json(res->primal, res->report, emit_plans != 0));
    }
  });
}

wbc_status wbc_result_trace_csv(const wbc_result* res, char** out) {
  return guarded([&] {
    require(res, "result");
    require(out, "out");
    *out = duplicate(res->report.trace.to_csv());
  });
}

void wbc_result_free(wbc_result* res) { delete res; }

wbc_status wbc_compare(const wbc_instance* const* instances, size_t instance_count,
                       const wbc_options* const* methods, const char* const* labels,
                       size_t method_count, int parallel_methods, char** csv,
                       char** markdown) {
  return guarded([&] {
    require(instances, "instances");
    require(methods, "methods");
    std::vector<wbc::BarycenterInstance> insts;
    for (size_t k = 0; k < instance_count; ++k) {
      require(instances[k], "instances[k]");
      insts.push_back(instances[k]->instance);
    }
    std::vector<wbc::CompareEntry> entries;
    for (size_t k = 0; k < method_count; ++k) {
      require(methods[k], "methods[k]");
      const std::string label = labels && labels[k] ? labels[k]
                                                    : wbc::to_string(methods[k]->config.method);
      entries.push_back({label, methods[k]->config});
    }
    const auto table = wbc::compare_methods(insts, entries, {}, parallel_methods != 0);
    if (csv) *csv = duplicate(table.to_csv());
    if (markdown) *markdown = duplicate(table.to_markdown());
  });
}

wbc_status wbc_bench_scaling(const size_t* Ns, size_t count, size_t m, size_t m_prime, size_t d,
                             uint64_t seed, const wbc_options* opts, size_t repeats, char** csv,
                             double* slope) {
  return guarded([&] {
    require(Ns, "Ns");
    require(opts, "options");
    if (opts->config.method != wbc::Method::Sgs)
      throw wbc::InvalidArgument("bench times the sgs method");
    const std::vector<std::size_t> list(Ns, Ns + count);
    const auto res = wbc::bench_scaling(list, m, m_prime, d, seed, opts->config.sgs, repeats);
    if (csv) *csv = duplicate(res.to_csv());
    if (slope) *slope = res.slope.value_or(std::numeric_limits<double>::quiet_NaN());
  });
}

wbc_status wbc_project_simplex(const double* v, size_t n, double* out) {
  return guarded([&] {
    require(v, "v");
    require(out, "out");
    if (n == 0) throw wbc::InvalidArgument("empty vector");
    const wbc::Vector x = wbc::project_simplex(Eigen::Map<const wbc::Vector>(v, Eigen::Index(n)));
    std::memcpy(out, x.data(), n * sizeof(double));
  });
}

}  // extern "C"
