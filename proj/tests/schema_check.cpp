#include "schema_check.hpp"

#include <regex>

namespace cgs::test {

namespace {

using nlohmann::json;

bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (t == "number") return v.is_number();
  return false;
}

void walk(const json& root, const json& s, const json& v, const std::string& path, std::vector<std::string>& errs) {
  if (s.contains("$ref")) {
    const std::string ref = s["$ref"];
    const std::string prefix = "#/$defs/";
    if (ref.rfind(prefix, 0) != 0) {
      errs.push_back(path + ": unsupported $ref " + ref);
      return;
    }
    walk(root, root["$defs"][ref.substr(prefix.size())], v, path, errs);
    return;
  }
  if (s.contains("type")) {
    bool ok = false;
    if (s["type"].is_array()) {
      for (const auto& t : s["type"]) ok = ok || has_type(v, t);
    } else {
      ok = has_type(v, s["type"]);
    }
    if (!ok) {
      errs.push_back(path + ": wrong type");
      return;
    }
  }
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s["enum"]) found = found || e == v;
    if (!found) errs.push_back(path + ": value not in enum");
  }
  if (s.contains("const") && s["const"] != v) errs.push_back(path + ": value differs from const");
  if (s.contains("minimum") && v.is_number() && v.get<double>() < s["minimum"].get<double>()) {
    errs.push_back(path + ": below minimum");
  }
  if (s.contains("pattern") && v.is_string() &&
      !std::regex_search(v.get<std::string>(), std::regex(s["pattern"].get<std::string>()))) {
    errs.push_back(path + ": pattern mismatch");
  }
  if (v.is_object()) {
    if (s.contains("required")) {
      for (const auto& r : s["required"]) {
        if (!v.contains(r.get<std::string>())) errs.push_back(path + ": missing " + r.get<std::string>());
      }
    }
    const json props = s.value("properties", json::object());
    for (const auto& [key, val] : v.items()) {
      if (props.contains(key)) {
        walk(root, props[key], val, path + "/" + key, errs);
      } else if (s.contains("additionalProperties") && s["additionalProperties"] == false) {
        errs.push_back(path + ": unexpected key " + key);
      }
    }
  }
  if (v.is_array() && s.contains("items")) {
    for (std::size_t i = 0; i < v.size(); ++i) walk(root, s["items"], v[i], path + "/" + std::to_string(i), errs);
  }
}

}  // namespace

std::vector<std::string> validate_schema(const json& schema, const json& doc) {
  std::vector<std::string> errs;
  walk(schema, schema, doc, "", errs);
  return errs;
}

}  // namespace cgs::test
