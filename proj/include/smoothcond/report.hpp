#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "smoothcond/error.hpp"
#include "smoothcond/matrix.hpp"
#include "smoothcond/random.hpp"

namespace smoothcond {

using Json = nlohmann::ordered_json;

// One checked inequality (or identity) with both sides recorded.
struct Verdict {
  std::string name;
  double lhs = 0.0;
  std::string relation;  // "<=", ">=", "=="
  double rhs = 0.0;
  bool pass = false;
  std::string detail;
};

inline Json to_json(const Verdict& v) {
  return Json{{"name", v.name}, {"lhs", v.lhs},   {"relation", v.relation},
              {"rhs", v.rhs},   {"pass", v.pass}, {"detail", v.detail}};
}

// Every report is a pure function of its config (which embeds the seed), so
// rerunning the config reproduces it byte for byte.
struct ExperimentReport {
  std::string command;
  Json config = Json::object();
  Json results = Json::object();
  std::vector<Verdict> verdicts;

  bool all_pass() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }

  std::size_t failures() const {
    std::size_t f = 0;
    for (const auto& v : verdicts) f += v.pass ? 0 : 1;
    return f;
  }

  Json to_json() const {
    Json vs = Json::array();
    for (const auto& v : verdicts) vs.push_back(smoothcond::to_json(v));
    return Json{{"tool", "smoothcond"}, {"command", command},   {"config", config},
                {"results", results},   {"verdicts", vs},       {"all_pass", all_pass()}};
  }
};

inline Json seed_json(Seed s) { return Json{{"master", s.master}, {"stream_index", s.stream_index}}; }

// Stream derived from a human-readable tag (FNV-1a of the tag text).
inline Seed tagged(Seed base, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return base.child(h);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace smoothcond
