#pragma once

#include <cstdint>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakdep/cli.hpp"
#include "weakdep/rates.hpp"

namespace weakdep::config_detail {

using nlohmann::json;

// Field access with a dotted path for diagnostics.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
  const json& raw(const std::string& key) const {
    if (!has(key)) throw ConfigError(at(key), "required field is missing");
    return obj_.at(key);
  }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }
  std::size_t count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const auto v = integer(key);
    if (v < 0) throw ConfigError(at(key), "expected a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  std::string text(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  // A scalar or an array of scalars of the same kind.
  std::vector<std::int64_t> integers(const std::string& key) const {
    const json& v = raw(key);
    std::vector<std::int64_t> out;
    if (v.is_number_integer()) return {v.get<std::int64_t>()};
    if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected an integer or a non-empty integer array");
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw ConfigError(at(key), "expected an integer array");
      out.push_back(e.get<std::int64_t>());
    }
    return out;
  }
  std::vector<std::string> texts(const std::string& key) const {
    const json& v = raw(key);
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a string or a non-empty string array");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError(at(key), "expected a string array");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  void only(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj_.items()) {
      if (!ok.count(k)) throw ConfigError(at(k), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
};

template <class F>
auto with_field(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const PreconditionError& e) {
    throw PreconditionError(field + ": " + e.what());
  }
}

inline InnovationLaw law_field(const Fields& f, const std::string& fallback) {
  const std::string name = f.text("innovation", fallback);
  return with_field(f.at("innovation"), [&] { return InnovationLaw{innovation_kind_from_string(name)}; });
}

inline std::vector<std::int64_t> grid_field(const Fields& f, const std::string& key, int lo, int hi) {
  if (!f.has(key)) return dyadic_n_grid(lo, hi);
  const json& g = f.raw(key);
  if (g.is_object()) {
    const Fields gf(g, f.at(key));
    gf.only({"lo", "hi"});
    return with_field(f.at(key), [&] {
      return dyadic_n_grid(static_cast<int>(gf.integer("lo")), static_cast<int>(gf.integer("hi")));
    });
  }
  return f.integers(key);
}

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw PreconditionError(field + ": " + what);
}

}  // namespace weakdep::config_detail
