#include "systems_io.hpp"

#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace hamidx {

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  fail(ErrorCode::config, "schema: " + where + ": " + what);
}

const Json& field_of(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + "." + key, "missing required field");
  return *it;
}

double number_of(const Json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where, "expected a number");
  return v.get<double>();
}

std::vector<double> numbers_of(const Json& v, const std::string& where) {
  if (!v.is_array()) schema_error(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number_of(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Mat matrix_of(const Json& v, int dim, const std::string& where) {
  const auto values = numbers_of(v, where);
  if (static_cast<int>(values.size()) != dim * dim) {
    schema_error(where, "expected " + std::to_string(dim * dim) + " row-major entries, got " + std::to_string(values.size()));
  }
  Mat m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = values[static_cast<std::size_t>(i * dim + j)];
  return m;
}

TermMode mode_of(const Json& v, const std::string& where) {
  if (!v.is_string()) schema_error(where, "expected a string");
  try {
    return term_mode_from_name(v.get<std::string>());
  } catch (const Error&) {
    schema_error(where, "unknown mode '" + v.get<std::string>() + "'");
  }
}

Json matrix_json(const Mat& m) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Json numbers_json(const std::vector<double>& v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

SymmetricField parse_at(const Json& doc, const std::string& where) {
  if (!doc.is_object()) schema_error(where, "expected an object");
  std::string name = "system";
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) schema_error(where + ".name", "expected a string");
    name = it->get<std::string>();
  }
  const Json& dv = field_of(doc, "d", where);
  if (!dv.is_number_integer()) schema_error(where + ".d", "expected an integer");
  const int d = dv.get<int>();
  if (d < 1 || d > kMaxHalfDim) schema_error(where + ".d", "must lie in [1, 4]");
  const int dim = 2 * d;
  const double bound = number_of(field_of(doc, "K", where), where + ".K");

  Structure st;
  if (auto it = doc.find("structure"); it != doc.end()) {
    const std::string sw = where + ".structure";
    const Json& sj = *it;
    const Json& kv = field_of(sj, "kind", sw);
    if (!kv.is_string()) schema_error(sw + ".kind", "expected a string");
    const std::string kind = kv.get<std::string>();
    if (kind == "generic") {
      st.kind = StructureKind::generic;
    } else if (kind == "periodic") {
      st.kind = StructureKind::periodic;
      st.period = number_of(field_of(sj, "period", sw), sw + ".period");
      if (!(st.period > 0.0)) schema_error(sw + ".period", "must be positive");
    } else if (kind == "quasi_periodic") {
      st.kind = StructureKind::quasi_periodic;
      const std::string tw = sw + ".torus";
      const Json& tj = field_of(sj, "torus", sw);
      TorusField tf;
      const Json& mv = field_of(tj, "m", tw);
      if (!mv.is_number_integer() || mv.get<int>() < 1) schema_error(tw + ".m", "expected a positive integer");
      tf.torus_dim = mv.get<int>();
      tf.base_point = numbers_of(field_of(tj, "p", tw), tw + ".p");
      tf.frequency = numbers_of(field_of(tj, "q", tw), tw + ".q");
      if (static_cast<int>(tf.base_point.size()) != tf.torus_dim) schema_error(tw + ".p", "length must equal m");
      if (static_cast<int>(tf.frequency.size()) != tf.torus_dim) schema_error(tw + ".q", "length must equal m");
      tf.step = number_of(field_of(tj, "u", tw), tw + ".u");
      if (!(tf.step > 0.0)) schema_error(tw + ".u", "must be positive");
      const Json& terms = field_of(tj, "surface_terms", tw);
      if (!terms.is_array()) schema_error(tw + ".surface_terms", "expected an array");
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string ew = tw + ".surface_terms[" + std::to_string(i) + "]";
        TorusTerm term;
        term.matrix = matrix_of(field_of(terms[i], "matrix", ew), dim, ew + ".matrix");
        term.mode = mode_of(field_of(terms[i], "mode", ew), ew + ".mode");
        if (term.mode == TermMode::gaussian) schema_error(ew + ".mode", "gaussian is not allowed on the torus");
        if (auto fit = terms[i].find("frequency"); fit != terms[i].end()) {
          term.wavevector = numbers_of(*fit, ew + ".frequency");
        } else {
          term.wavevector.assign(static_cast<std::size_t>(tf.torus_dim), 0.0);
        }
        if (static_cast<int>(term.wavevector.size()) != tf.torus_dim) schema_error(ew + ".frequency", "length must equal m");
        tf.surface.push_back(std::move(term));
      }
      st.torus = std::move(tf);
    } else if (kind == "asymptotic_periodic") {
      st.kind = StructureKind::asymptotic_periodic;
      auto limit = parse_at(field_of(sj, "limit", sw), sw + ".limit");
      if (!limit.is_periodic()) schema_error(sw + ".limit", "limit field must be periodic");
      st.limit = std::make_shared<const SymmetricField>(std::move(limit));
    } else {
      schema_error(sw + ".kind", "unknown kind '" + kind + "'");
    }
  }

  std::vector<Term> terms;
  if (auto it = doc.find("terms"); it != doc.end()) {
    if (!it->is_array()) schema_error(where + ".terms", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& tj = (*it)[i];
      const std::string ew = where + ".terms[" + std::to_string(i) + "]";
      Term term;
      term.matrix = matrix_of(field_of(tj, "matrix", ew), dim, ew + ".matrix");
      term.mode = mode_of(field_of(tj, "mode", ew), ew + ".mode");
      if (auto fit = tj.find("frequency"); fit != tj.end()) term.frequency = number_of(*fit, ew + ".frequency");
      if (auto oit = tj.find("offset"); oit != tj.end()) term.offset = number_of(*oit, ew + ".offset");
      if (st.kind == StructureKind::quasi_periodic && term.mode != TermMode::constant) {
        schema_error(ew + ".mode", "quasi-periodic fields take time dependence from surface_terms only");
      }
      terms.push_back(std::move(term));
    }
  }
  return SymmetricField::from_terms(std::move(name), d, bound, std::move(st), std::move(terms));
}

}  // namespace

SymmetricField system_from_json(const Json& doc) { return parse_at(doc, "$"); }

SymmetricField parse_system(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    fail(ErrorCode::config, "malformed JSON at line " + std::to_string(line) + ": " + e.what());
  }
  return system_from_json(doc);
}

SymmetricField parse_system_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::config, "cannot open system file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str());
}

Json system_to_json(const SymmetricField& field) {
  require(field.serializable(), ErrorCode::config,
          "field '" + field.name() + "' is defined by a closed-form evaluator and has no document form");
  Json doc;
  doc["name"] = field.name();
  doc["d"] = field.dim_half();
  doc["K"] = field.bound();
  const auto& st = field.structure();
  Json sj;
  sj["kind"] = structure_kind_name(st.kind);
  if (st.kind == StructureKind::periodic) sj["period"] = st.period;
  if (st.torus) {
    const auto& tf = *st.torus;
    Json tj;
    tj["m"] = tf.torus_dim;
    tj["p"] = numbers_json(tf.base_point);
    tj["q"] = numbers_json(tf.frequency);
    tj["u"] = tf.step;
    Json terms = Json::array();
    for (const auto& term : tf.surface) {
      Json e;
      e["matrix"] = matrix_json(term.matrix);
      e["mode"] = term_mode_name(term.mode);
      e["frequency"] = numbers_json(term.wavevector);
      terms.push_back(std::move(e));
    }
    tj["surface_terms"] = std::move(terms);
    sj["torus"] = std::move(tj);
  }
  if (st.limit) sj["limit"] = system_to_json(*st.limit);
  doc["structure"] = std::move(sj);
  Json terms = Json::array();
  for (const auto& term : *field.terms()) {
    Json e;
    e["matrix"] = matrix_json(term.matrix);
    e["mode"] = term_mode_name(term.mode);
    e["frequency"] = term.frequency;
    if (term.offset != 0.0) e["offset"] = term.offset;
    terms.push_back(std::move(e));
  }
  doc["terms"] = std::move(terms);
  return doc;
}

std::string serialize_system(const SymmetricField& field) { return dump_json(system_to_json(field)); }

}  // namespace hamidx
