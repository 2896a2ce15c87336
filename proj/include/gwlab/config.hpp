#pragma once

// Model configuration files (JSON, comments allowed). Type indices in files
// are 1-based. Example:
//
//   {
//     "name": "zoo2",
//     "types": 2,
//     "laws": [
//       {"type": 1, "kind": "product",
//        "children": [{"type": 1, "family": "geometric", "mean": 1},
//                     {"type": 2, "family": "poisson", "mean": 1}]},
//       {"type": 2, "kind": "table",
//        "outcomes": [{"counts": [0], "p": 0.5}, {"counts": [2], "p": 0.5}]}
//     ]
//   }
//
// Optional top-level "critical_tolerance" widens the |m_ii - 1| check.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gwlab/errors.hpp"
#include "gwlab/model.hpp"

namespace gwlab {

struct ModelConfig {
  std::string name;
  ProcessSpec spec;
  ValidationOptions validation;
};

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

class JsonReader {
 public:
  static const nlohmann::json& member(const nlohmann::json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) throw ConfigError(path, 0, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(join(path, key), 0, "missing required field");
    return *it;
  }

  static double number(const nlohmann::json& obj, const std::string& path, const char* key) {
    const auto& v = member(obj, path, key);
    if (!v.is_number()) throw ConfigError(join(path, key), 0, "expected a number");
    return v.get<double>();
  }

  static long long integer(const nlohmann::json& obj, const std::string& path, const char* key) {
    const auto& v = member(obj, path, key);
    if (!v.is_number_integer()) throw ConfigError(join(path, key), 0, "expected an integer");
    return v.get<long long>();
  }

  static std::string string(const nlohmann::json& obj, const std::string& path, const char* key) {
    const auto& v = member(obj, path, key);
    if (!v.is_string()) throw ConfigError(join(path, key), 0, "expected a string");
    return v.get<std::string>();
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

inline Family parse_family(const nlohmann::json& j, const std::string& path) {
  const std::string fam = JsonReader::string(j, path, "family");
  if (fam == "geometric") return Geometric{JsonReader::number(j, path, "mean")};
  if (fam == "poisson") return Poisson{JsonReader::number(j, path, "mean")};
  if (fam == "bernoulli") return Bernoulli{JsonReader::number(j, path, "p")};
  if (fam == "point_mass") return PointMass{JsonReader::integer(j, path, "k")};
  throw ConfigError(path + ".family", 0,
                    "unknown family '" + fam + "' (expected geometric, poisson, bernoulli or point_mass)");
}

}  // namespace detail

inline ModelConfig parse_model_config(const std::string& text) {
  using detail::JsonReader;
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", detail::line_of_offset(text, e.byte), e.what());
  }

  ModelConfig cfg;
  if (root.contains("name")) cfg.name = JsonReader::string(root, "", "name");
  const long long n = JsonReader::integer(root, "", "types");
  if (n < 1) throw ConfigError("types", 0, "must be >= 1");
  if (root.contains("critical_tolerance")) {
    cfg.validation.critical_tolerance = JsonReader::number(root, "", "critical_tolerance");
    if (!(cfg.validation.critical_tolerance >= 0.0)) throw ConfigError("critical_tolerance", 0, "must be >= 0");
  }

  const auto& laws_json = JsonReader::member(root, "", "laws");
  if (!laws_json.is_array()) throw ConfigError("laws", 0, "expected a list");
  if (static_cast<long long>(laws_json.size()) != n)
    throw ConfigError("laws", 0, "expected " + std::to_string(n) + " laws, found " + std::to_string(laws_json.size()));

  std::vector<OffspringLaw> laws(static_cast<std::size_t>(n));
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<std::size_t> file_index(static_cast<std::size_t>(n), 0);
  for (std::size_t idx = 0; idx < laws_json.size(); ++idx) {
    const auto& lj = laws_json[idx];
    const std::string path = "laws[" + std::to_string(idx) + "]";
    const long long type = JsonReader::integer(lj, path, "type");
    if (type < 1 || type > n) throw ConfigError(path + ".type", 0, "type out of range 1.." + std::to_string(n));
    const auto i = static_cast<std::size_t>(type - 1);
    if (seen[i]) throw ConfigError(path + ".type", 0, "duplicate law for type " + std::to_string(type));
    seen[i] = true;
    file_index[i] = idx;

    OffspringLaw law;
    law.parent_type = i;
    const std::string kind = JsonReader::string(lj, path, "kind");
    if (kind == "product") {
      ProductForm pf;
      const auto& ch = JsonReader::member(lj, path, "children");
      if (!ch.is_array()) throw ConfigError(path + ".children", 0, "expected a list");
      for (std::size_t c = 0; c < ch.size(); ++c) {
        const std::string cpath = path + ".children[" + std::to_string(c) + "]";
        const long long j = JsonReader::integer(ch[c], cpath, "type");
        if (j < type || j > n)
          throw ConfigError(cpath + ".type", 0,
                            "child type must lie in " + std::to_string(type) + ".." + std::to_string(n));
        pf.children.emplace_back(static_cast<std::size_t>(j - 1), detail::parse_family(ch[c], cpath));
      }
      law.body = std::move(pf);
    } else if (kind == "table") {
      FiniteTable table;
      const auto& out = JsonReader::member(lj, path, "outcomes");
      if (!out.is_array()) throw ConfigError(path + ".outcomes", 0, "expected a list");
      for (std::size_t r = 0; r < out.size(); ++r) {
        const std::string rpath = path + ".outcomes[" + std::to_string(r) + "]";
        TableEntry e;
        e.p = JsonReader::number(out[r], rpath, "p");
        const auto& counts = JsonReader::member(out[r], rpath, "counts");
        if (!counts.is_array()) throw ConfigError(rpath + ".counts", 0, "expected a list of integers");
        for (const auto& c : counts) {
          if (!c.is_number_integer()) throw ConfigError(rpath + ".counts", 0, "expected a list of integers");
          e.counts.push_back(c.get<long long>());
        }
        table.entries.push_back(std::move(e));
      }
      law.body = std::move(table);
    } else {
      throw ConfigError(path + ".kind", 0, "unknown kind '" + kind + "' (expected product or table)");
    }
    laws[i] = std::move(law);
  }
  try {
    cfg.spec = ProcessSpec(std::move(laws));
  } catch (const ConfigError& e) {
    // structural checks index laws by type; report the position in the file
    const std::string& f = e.field();
    if (f.rfind("laws[", 0) != 0) throw;
    const auto close = f.find(']');
    const auto type = static_cast<std::size_t>(std::stoull(f.substr(5, close - 5)));
    throw ConfigError("laws[" + std::to_string(file_index[type]) + "]" + f.substr(close + 1), 0, e.reason());
  }
  return cfg;
}

inline ModelConfig load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot read model config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  ModelConfig cfg = parse_model_config(ss.str());
  if (cfg.name.empty()) {
    const auto slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dot = base.find_last_of('.');
    cfg.name = dot == std::string::npos ? base : base.substr(0, dot);
  }
  return cfg;
}

}  // namespace gwlab
