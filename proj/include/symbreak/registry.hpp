#pragma once

// Named code instances loaded from a JSON registry. Matrix files referenced
// by the registry are resolved relative to the registry file.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "symbreak/codes.hpp"

#ifndef SYMBREAK_DEFAULT_REGISTRY
#define SYMBREAK_DEFAULT_REGISTRY "data/registry.json"
#endif

namespace symbreak {

class RegistryError : public Error {
 public:
  using Error::Error;
};

struct RegistryEntry {
  std::string label;
  nlohmann::json spec;
  std::size_t n = 0;
  std::size_t k = 0;
  std::optional<std::size_t> distance;
  bool verified = true;
};

class Registry {
 public:
  /// SYMBREAK_REGISTRY wins over the compiled-in default.
  static std::filesystem::path default_path() {
    if (const char* env = std::getenv("SYMBREAK_REGISTRY"); env != nullptr && *env) return env;
    return SYMBREAK_DEFAULT_REGISTRY;
  }

  static Registry load(const std::filesystem::path& path = default_path()) {
    std::ifstream in(path);
    if (!in) throw RegistryError("cannot open registry: " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw RegistryError("registry parse error in " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw RegistryError("registry must be a JSON object");
    Registry r;
    r.base_ = path.parent_path();
    for (auto it = j.begin(); it != j.end(); ++it) {
      RegistryEntry e;
      e.label = it.key();
      e.spec = it.value();
      e.n = e.spec.value("n", std::size_t{0});
      e.k = e.spec.value("k", std::size_t{0});
      if (e.spec.contains("d")) e.distance = e.spec["d"].get<std::size_t>();
      e.verified = e.spec.value("verified", true);
      r.entries_.emplace(e.label, std::move(e));
    }
    return r;
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& [label, _] : entries_) out.push_back(label);
    return out;
  }

  bool contains(const std::string& label) const { return entries_.count(label) != 0; }

  const RegistryEntry& entry(const std::string& label) const {
    auto it = entries_.find(label);
    if (it == entries_.end()) throw RegistryError("unknown code label: " + label);
    return it->second;
  }

  CssCode build(const std::string& label) const {
    const RegistryEntry& e = entry(label);
    const auto& s = e.spec;
    const std::string family = s.at("family").get<std::string>();
    CssCode c;
    if (family == "bb") {
      const auto l = s.at("l").get<std::size_t>(), m = s.at("m").get<std::size_t>();
      c = make_bb_code(MonomialSum(l, m, terms(s.at("a"))), MonomialSum(l, m, terms(s.at("b"))), label);
    } else if (family == "gb") {
      c = make_gb_code(s.at("a").get<std::vector<long>>(), s.at("b").get<std::vector<long>>(),
                       s.at("l").get<std::size_t>(), label);
    } else if (family == "hp") {
      c = make_hp_code(read_matrix(s.at("h1")), read_matrix(s.at("h2")), label);
    } else if (family == "css") {
      c = make_css_code(label, read_matrix(s.at("hx")), read_matrix(s.at("hz")));
    } else {
      throw RegistryError("unknown family '" + family + "' for " + label);
    }
    c.claimed_distance = e.distance;
    return c;
  }

 private:
  static std::vector<std::pair<long, long>> terms(const nlohmann::json& j) {
    std::vector<std::pair<long, long>> out;
    for (const auto& t : j) out.emplace_back(t.at(0).get<long>(), t.at(1).get<long>());
    return out;
  }

  BinMatrix read_matrix(const nlohmann::json& rel) const {
    const auto path = base_ / rel.get<std::string>();
    std::ifstream in(path);
    if (!in) throw RegistryError("cannot open matrix file: " + path.string());
    return read_alist(in);
  }

  std::filesystem::path base_;
  std::map<std::string, RegistryEntry> entries_;
};

}  // namespace symbreak
