#include "pimex/tableau.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pimex {

namespace {

using json = nlohmann::json;

const std::set<std::string> kRequiredKeys = {"s", "r", "p", "q", "lambda", "c", "A",
                                             "Ahat", "U", "B", "Bhat", "V", "family"};
const std::set<std::string> kOptionalKeys = {"W", "What"};

json matrix_to_json(const Matrix<double>& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix<double> matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array()) throw TableauError("schema violation: " + name + " must be a nested array");
  const Index rows = Index(j.size());
  Index cols = 0;
  if (rows > 0) {
    if (!j[0].is_array()) throw TableauError("schema violation: " + name + " rows must be arrays");
    cols = Index(j[0].size());
  }
  Matrix<double> m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[std::size_t(i)];
    if (!row.is_array() || Index(row.size()) != cols)
      throw TableauError("schema violation: " + name + " is ragged");
    for (Index k = 0; k < cols; ++k) {
      const json& v = row[std::size_t(k)];
      if (!v.is_number()) throw TableauError("schema violation: " + name + " has a non-number");
      m(i, k) = v.get<double>();
    }
  }
  return m;
}

int int_field(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number_integer()) throw TableauError(std::string("schema violation: ") + key +
                                                 " must be an integer");
  return v.get<int>();
}

bool all_finite(const Matrix<double>& m) { return m.allFinite(); }

}  // namespace

void validate_tableau(const ImexGlmTableau& t) {
  check_dimensions(t);
  if (!std::isfinite(t.lambda) || !t.c.allFinite())
    throw TableauError("invariant violated: non-finite entries");
  for (const auto* m : {&t.A, &t.Ahat, &t.U, &t.B, &t.Bhat, &t.V, &t.W, &t.What})
    if (!all_finite(*m)) throw TableauError("invariant violated: non-finite entries");
  try {
    require_distinct(t.c, "validate_tableau");
  } catch (const std::invalid_argument&) {
    throw TableauError("invariant violated: abscissae must be distinct");
  }
  if ((t.W.col(0) - t.What.col(0)).cwiseAbs().maxCoeff() > 1e-14 * (1.0 + t.W.col(0).cwiseAbs().maxCoeff()))
    throw TableauError("invariant violated: first columns of W and What differ");

  if (t.family == Family::external) return;

  if (!t.has_parallel_structure(1e-14)) throw TableauError("parallel structure violated");
  if (t.p != t.s || t.q != t.s || t.r != t.s)
    throw TableauError("invariant violated: constructed families need p = q = r = s");
  const Matrix<double> eye = Matrix<double>::Identity(t.s, t.s);
  if ((t.U - eye).cwiseAbs().maxCoeff() > 1e-14)
    throw TableauError("invariant violated: constructed families need U = I");
  if (t.family == Family::ensemble) {
    if ((t.V - eye).cwiseAbs().maxCoeff() > 1e-14)
      throw TableauError("invariant violated: ensemble methods need V = I");
  } else {
    Eigen::JacobiSVD<Matrix<double>> svd(t.V);
    const auto& sv = svd.singularValues();
    if (sv.size() > 1 && sv(1) > 1e-8 * sv(0))
      throw TableauError("invariant violated: DIMSIM V must have rank one");
  }
}

std::string write_tableau(const ImexGlmTableau& t) {
  json doc;
  doc["family"] = std::string(to_string(t.family));
  doc["s"] = t.s;
  doc["r"] = t.r;
  doc["p"] = t.p;
  doc["q"] = t.q;
  doc["lambda"] = t.lambda;
  json c = json::array();
  for (Index i = 0; i < t.c.size(); ++i) c.push_back(t.c(i));
  doc["c"] = c;
  doc["A"] = matrix_to_json(t.A);
  doc["Ahat"] = matrix_to_json(t.Ahat);
  doc["U"] = matrix_to_json(t.U);
  doc["B"] = matrix_to_json(t.B);
  doc["Bhat"] = matrix_to_json(t.Bhat);
  doc["V"] = matrix_to_json(t.V);
  doc["W"] = matrix_to_json(t.W);
  doc["What"] = matrix_to_json(t.What);
  return doc.dump(2) + "\n";
}

ImexGlmTableau read_tableau(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw TableauError(std::string("schema violation: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw TableauError("schema violation: top level must be an object");
  for (const auto& key : kRequiredKeys)
    if (!doc.contains(key)) throw TableauError("schema violation: missing field '" + key + "'");
  for (const auto& [key, _] : doc.items())
    if (!kRequiredKeys.count(key) && !kOptionalKeys.count(key))
      throw TableauError("schema violation: unknown field '" + key + "'");
  if (doc.contains("W") != doc.contains("What"))
    throw TableauError("schema violation: W and What must be given together");

  ImexGlmTableau t;
  if (!doc["family"].is_string()) throw TableauError("schema violation: family must be a string");
  t.family = parse_family(doc["family"].get<std::string>());
  t.s = int_field(doc, "s");
  t.r = int_field(doc, "r");
  t.p = int_field(doc, "p");
  t.q = int_field(doc, "q");
  if (!doc["lambda"].is_number()) throw TableauError("schema violation: lambda must be a number");
  t.lambda = doc["lambda"].get<double>();
  const json& c = doc["c"];
  if (!c.is_array()) throw TableauError("schema violation: c must be an array");
  t.c.resize(Index(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c[i].is_number()) throw TableauError("schema violation: c has a non-number");
    t.c(Index(i)) = c[i].get<double>();
  }
  t.A = matrix_from_json(doc["A"], "A");
  t.Ahat = matrix_from_json(doc["Ahat"], "Ahat");
  t.U = matrix_from_json(doc["U"], "U");
  t.B = matrix_from_json(doc["B"], "B");
  t.Bhat = matrix_from_json(doc["Bhat"], "Bhat");
  t.V = matrix_from_json(doc["V"], "V");
  if (t.family != Family::external && t.r != t.s)
    throw TableauError("invariant violated: constructed families need r = s");
  if (doc.contains("W")) {
    t.W = matrix_from_json(doc["W"], "W");
    t.What = matrix_from_json(doc["What"], "What");
  } else {
    if (t.c.size() != t.s) throw TableauError("dimension mismatch: c must have s entries");
    detail::require_shape(t.A, t.s, t.s, "A");
    detail::require_shape(t.Ahat, t.s, t.s, "Ahat");
    detail::require_shape(t.U, t.s, t.r, "U");
    recompute_taylor_weights(t);
  }
  validate_tableau(t);
  return t;
}

ImexGlmTableau load_tableau(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TableauError("cannot open tableau file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return read_tableau(buffer.str());
}

void save_tableau(const std::string& path, const ImexGlmTableau& t) {
  std::ofstream out(path);
  if (!out) throw TableauError("cannot write tableau file '" + path + "'");
  out << write_tableau(t);
}

}  // namespace pimex
