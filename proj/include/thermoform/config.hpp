#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace thermoform {

enum class value_type { string, integer, number, list, flag };

struct key_spec {
  value_type type;
  std::vector<std::string> choices;  // for strings; empty accepts any
  std::string help;
};

inline const std::vector<std::string>& operation_names() {
  static const std::vector<std::string> v = {"pressure", "gibbs",  "sigma2", "ldrate", "code",    "cover",
                                             "frink",    "blowup", "cohom",  "statlab", "selftest"};
  return v;
}

namespace detail {

inline void potential_keys(std::map<std::string, key_spec>& s, const std::string& p) {
  s[p + ".kind"] = {value_type::string, {"zero", "constant", "table", "first_symbol", "formula"}, "potential kind"};
  s[p + ".depth"] = {value_type::integer, {}, "table depth"};
  s[p + ".table"] = {value_type::list, {}, "table values, first symbol most significant"};
  s[p + ".formula"] = {value_type::string, {"cos2pi", "sin2pi", "identity"}, "builtin formula"};
  s[p + ".amplitude"] = {value_type::number, {}, "formula amplitude"};
  s[p + ".value"] = {value_type::number, {}, "constant value"};
}

inline void observable_keys(std::map<std::string, key_spec>& s, const std::string& p) {
  s[p + ".name"] = {value_type::string, {"zero", "constant", "cos2pi", "sin2pi", "re", "abs2"}, "observable on X"};
  s[p + ".amplitude"] = {value_type::number, {}, "observable amplitude"};
  s[p + ".coboundary"] = {value_type::flag, {}, "replace u by u o f - u"};
  s[p + ".lipschitz"] = {value_type::number, {}, "Lipschitz constant"};
}

}  // namespace detail

/// Accepted manifest keys. Dotted prefixes group the system, potentials and observables.
inline const std::map<std::string, key_spec>& manifest_schema() {
  static const std::map<std::string, key_spec> s = [] {
    std::map<std::string, key_spec> m;
    m["operation"] = {value_type::string, operation_names(), "operation to run"};
    m["seed"] = {value_type::integer, {}, "random seed"};
    m["output"] = {value_type::string, {}, "JSON report path"};
    m["csv"] = {value_type::string, {}, "CSV path"};
    m["system.name"] = {value_type::string, {}, "circle_d, circle_perturbed, quadratic_julia, local_model"};
    m["system.d"] = {value_type::integer, {}, "degree"};
    m["system.eps"] = {value_type::number, {}, "perturbation size"};
    m["system.c_re"] = {value_type::number, {}, "Julia parameter, real part"};
    m["system.c_im"] = {value_type::number, {}, "Julia parameter, imaginary part"};
    m["system.lambda"] = {value_type::number, {}, "local model expansion"};
    detail::potential_keys(m, "potential");
    detail::potential_keys(m, "observable");
    detail::potential_keys(m, "observable2");
    detail::observable_keys(m, "eta");
    detail::observable_keys(m, "eta2");
    m["d"] = {value_type::integer, {}, "alphabet size"};
    m["depth"] = {value_type::integer, {}, "operator depth or coding depth"};
    m["tol"] = {value_type::number, {}, "tolerance"};
    m["word"] = {value_type::list, {}, "symbols"};
    m["t"] = {value_type::list, {}, "tilt values"};
    m["law"] = {value_type::string, {"clt", "lil", "edc", "ld"}, "statistical law"};
    m["n"] = {value_type::integer, {}, "Birkhoff length"};
    m["N"] = {value_type::integer, {}, "sample count"};
    m["n_max"] = {value_type::integer, {}, "LIL horizon"};
    m["lags"] = {value_type::list, {}, "EDC lags"};
    m["mode"] = {value_type::string, {"auto", "direct", "importance"}, "LD estimator"};
    m["ks_tol"] = {value_type::number, {}, "CLT KS threshold"};
    m["kmax"] = {value_type::integer, {}, "largest period"};
    m["levels"] = {value_type::integer, {}, "cover levels"};
    m["M"] = {value_type::integer, {}, "Frink block length (0 chooses)"};
    m["points"] = {value_type::integer, {}, "sample points"};
    m["grid"] = {value_type::integer, {}, "coverage grid size"};
    m["cover.input"] = {value_type::string, {}, "JSON document with points and an initial cover"};
    m["blowup.lambda"] = {value_type::number, {}, "radial expansion"};
    m["blowup.dloc"] = {value_type::integer, {}, "local degree"};
    m["blowup.ambient_degree"] = {value_type::integer, {}, "ambient degree (0: dloc)"};
    m["blowup.n_trunc"] = {value_type::integer, {}, "grand-orbit truncation"};
    m["blowup.c"] = {value_type::number, {}, "copy weight"};
    m["blowup.k0"] = {value_type::integer, {}, "outer radius exponent"};
    return m;
  }();
  return s;
}

/// Validated key-value experiment record. Values are stored in canonical text form,
/// so text -> manifest -> JSON -> manifest is the identity.
class Manifest {
 public:
  bool has(const std::string& k) const { return values_.count(k) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  void set(const std::string& key, const std::string& raw, int line = 0) {
    auto& schema = manifest_schema();
    auto it = schema.find(key);
    std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
    if (it == schema.end()) throw input_error(where + "unknown key '" + key + "'");
    values_[key] = canonical(it->second, raw, where + "key '" + key + "'");
  }

  std::string str(const std::string& k, const std::string& def = "") const {
    auto it = values_.find(k);
    return it == values_.end() ? def : it->second;
  }
  long integer(const std::string& k, long def) const { return has(k) ? std::stol(values_.at(k)) : def; }
  double number(const std::string& k, double def) const { return has(k) ? std::stod(values_.at(k)) : def; }
  bool flag(const std::string& k) const { return str(k) == "true"; }
  std::vector<double> list(const std::string& k, std::vector<double> def = {}) const {
    if (!has(k)) return def;
    return parse_list(values_.at(k), k);
  }

  std::string to_text() const {
    std::string out;
    for (auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    auto& schema = manifest_schema();
    for (auto& [k, v] : values_) {
      nlohmann::ordered_json* node = &j;
      std::size_t start = 0, dot;
      while ((dot = k.find('.', start)) != std::string::npos) {
        node = &(*node)[k.substr(start, dot - start)];
        start = dot + 1;
      }
      auto& leaf = (*node)[k.substr(start)];
      switch (schema.at(k).type) {
        case value_type::integer: leaf = std::stol(v); break;
        case value_type::number: leaf = std::stod(v); break;
        case value_type::flag: leaf = v == "true"; break;
        case value_type::list: leaf = parse_list(v, k); break;
        case value_type::string: leaf = v; break;
      }
    }
    return j;
  }

  bool operator==(const Manifest&) const = default;

  static std::vector<double> parse_list(std::string s, const std::string& what) {
    for (char& c : s)
      if (c == '[' || c == ']' || c == ',') c = ' ';
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_number(tok, what));
    return out;
  }

 private:
  std::map<std::string, std::string> values_;

  static double parse_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw input_error(what + ": '" + s + "' is not a number");
    }
    if (used != s.size()) throw input_error(what + ": '" + s + "' is not a number");
    return v;
  }

  static std::string number_text(double v) { return nlohmann::json(v).dump(); }

  static std::string canonical(const key_spec& spec, const std::string& raw, const std::string& what) {
    switch (spec.type) {
      case value_type::integer: {
        std::size_t used = 0;
        long v;
        try {
          v = std::stol(raw, &used);
        } catch (const std::exception&) {
          throw input_error(what + ": '" + raw + "' is not an integer");
        }
        if (used != raw.size()) throw input_error(what + ": '" + raw + "' is not an integer");
        return std::to_string(v);
      }
      case value_type::number: return number_text(parse_number(raw, what));
      case value_type::flag:
        if (raw == "true" || raw == "1") return "true";
        if (raw == "false" || raw == "0") return "false";
        throw input_error(what + ": expected true or false, got '" + raw + "'");
      case value_type::list: {
        auto v = parse_list(raw, what);
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + number_text(v[i]);
        return out + "]";
      }
      case value_type::string:
        if (raw.empty()) throw input_error(what + ": empty value");
        if (!spec.choices.empty() && std::find(spec.choices.begin(), spec.choices.end(), raw) == spec.choices.end()) {
          std::string all;
          for (auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
          throw input_error(what + ": '" + raw + "' is not one of " + all);
        }
        return raw;
    }
    return raw;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline void flatten_json(const nlohmann::json& j, const std::string& prefix, Manifest& m) {
  if (j.is_object()) {
    for (auto& [k, v] : j.items()) flatten_json(v, prefix.empty() ? k : prefix + "." + k, m);
    return;
  }
  if (prefix.empty()) throw input_error("JSON manifest must be an object");
  std::string raw;
  if (j.is_string())
    raw = j.get<std::string>();
  else if (j.is_array()) {
    for (auto& x : j) {
      if (!x.is_number()) throw input_error("key '" + prefix + "': list entries must be numbers");
      raw += (raw.empty() ? "" : ",") + x.dump();
    }
    raw = "[" + raw + "]";
  } else if (j.is_boolean() || j.is_number())
    raw = j.dump();
  else
    throw input_error("key '" + prefix + "': unsupported JSON value");
  m.set(prefix, raw);
}

}  // namespace detail

/// key = value lines; '#' starts a comment line.
inline Manifest parse_manifest_text(const std::string& text) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw input_error("line " + std::to_string(no) + ": expected key = value");
    auto key = detail::trim(s.substr(0, eq));
    if (m.has(key)) throw input_error("line " + std::to_string(no) + ": duplicate key '" + key + "'");
    m.set(key, detail::trim(s.substr(eq + 1)), no);
  }
  return m;
}

inline Manifest parse_manifest_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw input_error(std::string("invalid JSON manifest: ") + e.what());
  }
  Manifest m;
  detail::flatten_json(j, "", m);
  return m;
}

/// Reads a manifest file; JSON when the first non-blank character is '{'.
inline Manifest load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw input_error("cannot read manifest '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_manifest_json(text);
  return parse_manifest_text(text);
}

}  // namespace thermoform
