#include "rkf/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rkf {

namespace {

using nlohmann::json;

Mat parse_matrix(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw InputError("scenario: field \"" + name + "\" must be a nested array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw InputError("scenario: field \"" + name + "\" has ragged rows");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) {
        throw InputError("scenario: field \"" + name + "\" must contain numbers");
      }
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

const json& require_field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) {
    throw InputError(std::string("scenario: missing required field \"") + name + "\"");
  }
  return *it;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("scenario: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw InputError("scenario: top-level JSON value must be an object");

  Scenario sc;
  sc.model.A = parse_matrix(require_field(j, "A"), "A");
  sc.model.B = parse_matrix(require_field(j, "B"), "B");
  sc.model.C = parse_matrix(require_field(j, "C"), "C");
  sc.model.D = parse_matrix(require_field(j, "D"), "D");
  sc.model.P0 = parse_matrix(require_field(j, "P0"), "P0");

  const json& c = require_field(j, "c");
  if (c.is_string() && c.get<std::string>() == "auto") {
    sc.c_auto = true;
  } else if (c.is_number()) {
    sc.c = c.get<double>();
    if (!(sc.c > 0.0)) throw InputError("scenario: c must be positive or \"auto\"");
  } else {
    throw InputError("scenario: c must be a positive number or \"auto\"");
  }

  const json& horizon = require_field(j, "T");
  if (!horizon.is_number_integer() || horizon.get<long long>() < 1) {
    throw InputError("scenario: T must be an integer >= 1");
  }
  sc.horizon = horizon.get<int>();

  if (j.contains("rho_grid")) {
    if (!j["rho_grid"].is_number_integer() || j["rho_grid"].get<long long>() < 1) {
      throw InputError("scenario: rho_grid must be an integer >= 1");
    }
    sc.rho_grid = j["rho_grid"].get<int>();
  }
  if (j.contains("c_bracket")) {
    const json& b = j["c_bracket"];
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
      throw InputError("scenario: c_bracket must be [lo, hi]");
    }
    sc.c_bracket_lo = b[0].get<double>();
    sc.c_bracket_hi = b[1].get<double>();
  }
  if (j.contains("c_probes")) {
    if (!j["c_probes"].is_number_integer() || j["c_probes"].get<long long>() < 1) {
      throw InputError("scenario: c_probes must be an integer >= 1");
    }
    sc.c_probes = j["c_probes"].get<int>();
  }
  if (j.contains("mc")) {
    const json& mc = j["mc"];
    if (!mc.is_object()) throw InputError("scenario: mc must be an object {N, T, seed}");
    const json& n = require_field(mc, "N");
    const json& t = require_field(mc, "T");
    const json& seed = require_field(mc, "seed");
    if (!n.is_number_integer() || n.get<long long>() < 2) {
      throw InputError("scenario: mc.N must be an integer >= 2");
    }
    if (!t.is_number_integer() || t.get<long long>() < 1) {
      throw InputError("scenario: mc.T must be an integer >= 1");
    }
    if (!seed.is_number_integer() || seed.get<long long>() < 0) {
      throw InputError("scenario: mc.seed must be a nonnegative integer");
    }
    sc.has_mc = true;
    sc.mc_trajectories = n.get<int>();
    sc.mc_horizon = t.get<int>();
    sc.mc_seed = seed.get<std::uint64_t>();
  }
  if (j.contains("outputs")) {
    if (!j["outputs"].is_string()) throw InputError("scenario: outputs must be a string path");
    sc.outputs = j["outputs"].get<std::string>();
  }

  sc.hash = fnv1a_hex(json_text);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("scenario: cannot open file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace rkf
