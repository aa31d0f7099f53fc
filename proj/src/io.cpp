#include "wbc/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wbc {

using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line and column.
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("JSON parse error at line " + std::to_string(line) + ", column " +
                     std::to_string(column) + " (byte " + std::to_string(e.byte) + "): " +
                     e.what());
  }
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object()) throw ParseError(std::string("expected an object holding '") + key + "'");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ParseError(what + ": expected a number");
  return v.get<double>();
}

Vector to_vector(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw ParseError(what + ": expected an array");
  Vector out(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i)
    out[Eigen::Index(i)] = number(arr[i], what + "[" + std::to_string(i) + "]");
  return out;
}

// Array of rows -> rows x cols matrix.
Matrix rows_to_matrix(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw ParseError(what + ": expected an array of rows");
  if (arr.empty()) return Matrix(0, 0);
  const std::size_t cols = arr[0].is_array() ? arr[0].size() : 0;
  Matrix out(static_cast<Eigen::Index>(arr.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < arr.size(); ++r) {
    const std::string row_what = what + "[" + std::to_string(r) + "]";
    if (!arr[r].is_array() || arr[r].size() != cols)
      throw ParseError(row_what + ": rows must be arrays of equal length");
    for (std::size_t c = 0; c < cols; ++c)
      out(Eigen::Index(r), Eigen::Index(c)) = number(arr[r][c], row_what);
  }
  return out;
}

// Array of points -> d x count matrix.
Matrix points_to_matrix(const json& arr, const std::string& what) {
  return rows_to_matrix(arr, what).transpose();
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json rows_json(const Matrix& M) {
  json out = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

json points_json(const Matrix& M) { return rows_json(M.transpose()); }

// JSON has no NaN or infinity.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json residuals_json(const ResidualReport& r) {
  json out;
  for (int k = 0; k < 8; ++k) out["eta" + std::to_string(k + 1)] = finite_or_null(r.eta[k]);
  out["eta_P"] = finite_or_null(r.eta_P);
  out["eta_D"] = finite_or_null(r.eta_D);
  out["eta_gap"] = finite_or_null(r.eta_gap);
  out["eta_feas"] = finite_or_null(r.eta_feas);
  out["obj_P"] = finite_or_null(r.obj_P);
  out["obj_D"] = finite_or_null(r.obj_D);
  return out;
}

json report_json(const SolveReport& report) {
  json out;
  out["method"] = report.method;
  out["status"] = report.status;
  out["converged"] = report.converged;
  out["objective"] = finite_or_null(report.objective);
  out["iterations"] = report.iterations;
  out["wall_time"] = report.wall_time;
  out["residuals"] = residuals_json(report.residuals);
  out["termination_residuals"] = residuals_json(report.termination_residuals);
  json params;
  if (report.method == "sgs") {
    params["beta_initial"] = report.beta_initial;
    params["beta_final"] = report.beta_final;
    params["kappa"] = report.kappa;
  } else if (report.method == "ibp") {
    params["epsilon"] = report.epsilon;
    params["cost_scale"] = report.kappa;
  } else if (report.method == "badmm") {
    params["rho"] = report.rho;
  }
  out["parameters"] = params;
  out["notes"] = report.notes;
  return out;
}

std::vector<DiscreteDistribution> parse_distributions(const json& doc) {
  const json& arr = field(doc, "distributions");
  if (!arr.is_array() || arr.empty()) throw ParseError("'distributions' must be a non-empty array");
  std::vector<DiscreteDistribution> dists;
  for (std::size_t t = 0; t < arr.size(); ++t) {
    const std::string what = "distributions[" + std::to_string(t) + "]";
    DiscreteDistribution d;
    d.weights = to_vector(field(arr[t], "weights"), what + ".weights");
    d.supports = points_to_matrix(field(arr[t], "supports"), what + ".supports");
    if (d.supports.cols() == 0) d.supports.resize(0, d.weights.size());
    try {
      d.validate();
    } catch (const Error& e) {
      throw ParseError(what + ": " + e.what());
    }
    dists.push_back(std::move(d));
  }
  return dists;
}

Vector optional_gammas(const json& doc) {
  const auto it = doc.find("gammas");
  if (it == doc.end() || it->is_null()) return {};
  return to_vector(*it, "gammas");
}

void check_count(const json& doc, const char* key, std::size_t actual) {
  const auto it = doc.find(key);
  if (it == doc.end()) return;
  if (!it->is_number_integer() || it->get<long long>() != static_cast<long long>(actual))
    throw ParseError(std::string("'") + key + "' does not match the data (" +
                     std::to_string(actual) + ")");
}

}  // namespace

BarycenterInstance parse_instance(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("instance file must hold a JSON object");
  const Vector gammas = optional_gammas(doc);
  BarycenterInstance inst;
  if (doc.contains("cost_matrices")) {
    const json& mats = field(doc, "cost_matrices");
    const json& margs = field(doc, "marginals");
    if (!mats.is_array() || !margs.is_array()) throw ParseError("cost_matrices/marginals must be arrays");
    MatrixList costs;
    VectorList marginals;
    for (std::size_t t = 0; t < mats.size(); ++t)
      costs.push_back(rows_to_matrix(mats[t], "cost_matrices[" + std::to_string(t) + "]"));
    for (std::size_t t = 0; t < margs.size(); ++t)
      marginals.push_back(to_vector(margs[t], "marginals[" + std::to_string(t) + "]"));
    inst = BarycenterInstance::from_costs(std::move(costs), std::move(marginals), gammas);
  } else {
    const auto dists = parse_distributions(doc);
    const Matrix bary = points_to_matrix(field(doc, "barycenter_supports"), "barycenter_supports");
    double p = 2.0;
    if (doc.contains("p")) p = number(doc["p"], "p");
    inst = BarycenterInstance::from_distributions(dists, bary, p, gammas);
  }
  check_count(doc, "N", inst.num_distributions());
  check_count(doc, "m", inst.support_size());
  return inst;
}

BarycenterInstance load_instance(const std::string& path) {
  try {
    return parse_instance(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::vector<DiscreteDistribution> load_distributions(const std::string& path, Vector* gammas) {
  try {
    const json doc = parse_json(read_text_file(path));
    if (gammas) *gammas = optional_gammas(doc);
    return parse_distributions(doc);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string instance_to_json(const BarycenterInstance& instance, int indent) {
  json doc;
  doc["N"] = instance.num_distributions();
  doc["m"] = instance.support_size();
  doc["gammas"] = vector_json(instance.gammas());
  const bool has_points = instance.barycenter_supports().has_value() &&
                          instance.distribution_supports().size() == instance.num_distributions();
  if (has_points) {
    doc["p"] = instance.p();
    json dists = json::array();
    for (std::size_t t = 0; t < instance.num_distributions(); ++t) {
      json d;
      d["weights"] = vector_json(instance.marginal(t));
      d["supports"] = points_json(instance.distribution_supports()[t]);
      dists.push_back(std::move(d));
    }
    doc["distributions"] = std::move(dists);
    doc["barycenter_supports"] = points_json(*instance.barycenter_supports());
  } else {
    json mats = json::array();
    json margs = json::array();
    for (std::size_t t = 0; t < instance.num_distributions(); ++t) {
      mats.push_back(rows_json(instance.cost(t)));
      margs.push_back(vector_json(instance.marginal(t)));
    }
    doc["cost_matrices"] = std::move(mats);
    doc["marginals"] = std::move(margs);
  }
  return doc.dump(indent);
}

std::string report_to_json(const SolveReport& report, int indent) {
  return report_json(report).dump(indent);
}

std::string solution_to_json(const PrimalSolution& solution, const SolveReport& report,
                             bool emit_plans, int indent) {
  json doc;
  doc["method"] = report.method;
  doc["status"] = report.status;
  doc["w"] = vector_json(solution.w);
  doc["objective"] = finite_or_null(report.objective);
  doc["residuals"] = residuals_json(report.residuals);
  if (emit_plans) {
    json plans = json::array();
    for (const auto& P : solution.plans) plans.push_back(rows_json(P));
    doc["plans"] = std::move(plans);
  }
  return doc.dump(indent);
}

PrimalSolution parse_solution(const std::string& text) {
  const json doc = parse_json(text);
  PrimalSolution sol;
  sol.w = to_vector(field(doc, "w"), "w");
  if (doc.contains("plans")) {
    const json& plans = doc["plans"];
    if (!plans.is_array()) throw ParseError("'plans' must be an array");
    for (std::size_t t = 0; t < plans.size(); ++t)
      sol.plans.push_back(rows_to_matrix(plans[t], "plans[" + std::to_string(t) + "]"));
  }
  return sol;
}

std::string distribution_to_json(const DiscreteDistribution& distribution, int indent) {
  json doc;
  doc["weights"] = vector_json(distribution.weights);
  doc["supports"] = points_json(distribution.supports);
  return doc.dump(indent);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace wbc
