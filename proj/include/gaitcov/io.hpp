// Copyright 2026 The gaitcov Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef GAITCOV_IO_HPP_
#define GAITCOV_IO_HPP_

/**
 * @file
 * @brief JSON conversions for the library types and a small CSV table.
 *
 * Doubles are written with 17 significant digits so every file reads back
 * bit-identical.
 */

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitcov/coverage.hpp"
#include "gaitcov/dynamics.hpp"
#include "gaitcov/errors.hpp"
#include "gaitcov/gait.hpp"
#include "gaitcov/liegroup.hpp"
#include "gaitcov/optimizer.hpp"

namespace gaitcov {

using json = nlohmann::json;

namespace detail {

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidConfiguration(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidConfiguration(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T optional_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidConfiguration(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Group elements.
// ---------------------------------------------------------------------------

/// Poses are [x, y, theta]; {"x", "y", "theta"} objects are accepted on input.
inline void to_json(json& j, const Pose2& p) { j = json::array({p.x, p.y, p.theta}); }
inline void from_json(const json& j, Pose2& p) {
  if (j.is_array()) {
    if (j.size() != 3) throw InvalidConfiguration("a pose needs exactly three numbers [x, y, theta]");
    try {
      p = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    } catch (const json::exception& e) {
      throw InvalidConfiguration(std::string("bad pose: ") + e.what());
    }
    return;
  }
  p = {detail::required<double>(j, "x"), detail::required<double>(j, "y"), detail::required<double>(j, "theta")};
}

inline void to_json(json& j, const Twist2& t) { j = json{{"vx", t.vx}, {"vy", t.vy}, {"omega", t.omega}}; }
inline void from_json(const json& j, Twist2& t) {
  t = {detail::required<double>(j, "vx"), detail::required<double>(j, "vy"), detail::required<double>(j, "omega")};
}

// ---------------------------------------------------------------------------
// Gaits.
// ---------------------------------------------------------------------------

inline void to_json(json& j, const JointParams& p) {
  j = json{{"c", p.c}, {"b", p.b}, {"a", p.a}, {"u", std::vector<double>(p.u.begin(), p.u.end())}};
}
inline void from_json(const json& j, JointParams& p) {
  p.c = detail::required<double>(j, "c");
  p.b = detail::required<double>(j, "b");
  p.a = detail::required<double>(j, "a");
  const auto u = detail::optional_or<std::vector<double>>(j, "u", std::vector<double>(kBumpCount, 0.0));
  if (u.size() != static_cast<std::size_t>(kBumpCount))
    throw InvalidConfiguration("joint 'u' needs " + std::to_string(kBumpCount) + " bump weights");
  std::copy(u.begin(), u.end(), p.u.begin());
}

inline void to_json(json& j, const GaitParams& g) { j = json{{"omega", g.omega}, {"joints", g.joints}}; }
inline void from_json(const json& j, GaitParams& g) {
  g.joints = detail::required<std::vector<JointParams>>(j, "joints");
  g.omega = detail::optional_or<double>(j, "omega", 1.0);
  if (!(g.omega > 0.0)) throw InvalidConfiguration("gait omega must be positive");
}

inline json lock_to_json(const LockMask& m) {
  json j = json::array();
  for (const auto& v : m) j.push_back(v ? json(*v) : json(nullptr));
  return j;
}
inline LockMask lock_from_json(const json& j) {
  LockMask m;
  for (const auto& v : j) m.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
  return m;
}

// ---------------------------------------------------------------------------
// Models.
// ---------------------------------------------------------------------------

inline json model_to_json(const ConnectionModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PurcellChain>) {
          return {{"kind", "purcell_chain"}, {"n_joints", m.n_joints}, {"c_t", m.c_t}, {"c_n", m.c_n},
                  {"joint_limit", m.joint_limit}};
        } else if constexpr (std::is_same_v<T, TwoSlider>) {
          return {{"kind", "two_slider"}, {"d", m.d}, {"input_rotation", m.input_rotation},
                  {"min_extension", m.min_extension}, {"max_extension", m.max_extension}};
        } else {
          return {{"kind", "three_branch"}, {"circumradius", m.circumradius}, {"link_length", m.link_length},
                  {"static_length", m.static_length}, {"c_t", m.c_t}, {"c_n", m.c_n}, {"joint_limit", m.joint_limit}};
        }
      },
      model.variant());
}

/// Model from {"kind": ..., field overrides}; missing fields keep their defaults.
inline ConnectionModel model_from_json(const json& j) {
  const auto kind = detail::required<std::string>(j, "kind");
  if (kind == "purcell_chain") {
    PurcellChain m;
    m.n_joints = detail::optional_or(j, "n_joints", m.n_joints);
    m.c_t = detail::optional_or(j, "c_t", m.c_t);
    m.c_n = detail::optional_or(j, "c_n", m.c_n);
    m.joint_limit = detail::optional_or(j, "joint_limit", m.joint_limit);
    if (!(m.joint_limit > 0.0)) throw InvalidConfiguration("joint_limit must be positive");
    if (!(m.c_t > 0.0 && m.c_n > 0.0)) throw InvalidConfiguration("drag coefficients must be positive");
    return ConnectionModel(m);
  }
  if (kind == "two_slider") {
    TwoSlider m;
    m.d = detail::optional_or(j, "d", m.d);
    m.input_rotation = detail::optional_or(j, "input_rotation", m.input_rotation);
    m.min_extension = detail::optional_or(j, "min_extension", m.min_extension);
    m.max_extension = detail::optional_or(j, "max_extension", m.max_extension);
    if (!(m.min_extension > 0.0 && m.max_extension > m.min_extension))
      throw InvalidConfiguration("two_slider extensions need 0 < min_extension < max_extension");
    return ConnectionModel(m);
  }
  if (kind == "three_branch") {
    ThreeBranch m;
    m.circumradius = detail::optional_or(j, "circumradius", m.circumradius);
    m.link_length = detail::optional_or(j, "link_length", m.link_length);
    m.static_length = detail::optional_or(j, "static_length", m.static_length);
    m.c_t = detail::optional_or(j, "c_t", m.c_t);
    m.c_n = detail::optional_or(j, "c_n", m.c_n);
    m.joint_limit = detail::optional_or(j, "joint_limit", m.joint_limit);
    if (!(m.joint_limit > 0.0)) throw InvalidConfiguration("joint_limit must be positive");
    if (!(m.c_t > 0.0 && m.c_n > 0.0)) throw InvalidConfiguration("drag coefficients must be positive");
    return ConnectionModel(m);
  }
  throw InvalidConfiguration("unknown model kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Goal sets.
// ---------------------------------------------------------------------------

inline json goals_to_json(const GoalSet& g) {
  return {{"kind", "explicit"}, {"goals", g.goals()}, {"weights", g.weights()}};
}

/**
 * Goal set from a grid spec:
 *   {"kind": "standard"}            125 points, theta in {-pi, -pi/2, 0, pi/2, pi}
 *   {"kind": "quarter_turn"}        125 points, theta in {-pi/2, -pi/4, 0, pi/4, pi/2}
 *   {"kind": "uniform", "x": [...], "y": [...], "theta": [...]}
 *   {"kind": "explicit", "goals": [{x, y, theta}...], "weights": [...]}
 */
inline GoalSet goals_from_json(const json& j) {
  const auto kind = detail::optional_or<std::string>(j, "kind", "standard");
  if (kind == "standard") return standard_grid();
  if (kind == "quarter_turn") return quarter_turn_grid();
  if (kind == "uniform") {
    const auto x = detail::required<std::vector<double>>(j, "x");
    const auto y = detail::required<std::vector<double>>(j, "y");
    const auto t = detail::required<std::vector<double>>(j, "theta");
    try {
      return make_uniform_grid(x, y, t);
    } catch (const InvalidInput& e) {
      throw InvalidConfiguration(e.what());
    }
  }
  if (kind == "explicit") {
    auto goals = detail::required<std::vector<Pose2>>(j, "goals");
    auto weights = detail::optional_or<std::vector<double>>(j, "weights", std::vector<double>(goals.size(), 1.0));
    try {
      return GoalSet(std::move(goals), std::move(weights));
    } catch (const InvalidInput& e) {
      throw InvalidConfiguration(e.what());
    }
  }
  throw InvalidConfiguration("unknown grid kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Optimizer state.
// ---------------------------------------------------------------------------

inline void to_json(json& j, const HistoryEntry& e) {
  j = json{{"iteration", e.iteration}, {"h", e.h},           {"displacements", e.displacements},
           {"accepted", e.accepted},   {"stalled", e.stalled}, {"radius", e.radius},
           {"event", e.event}};
}
inline void from_json(const json& j, HistoryEntry& e) {
  e.iteration = detail::required<int>(j, "iteration");
  e.h = detail::required<double>(j, "h");
  e.displacements = detail::required<std::vector<Pose2>>(j, "displacements");
  e.accepted = detail::optional_or(j, "accepted", true);
  e.stalled = detail::optional_or(j, "stalled", false);
  e.radius = detail::optional_or(j, "radius", 0.0);
  e.event = detail::optional_or<std::string>(j, "event", "step");
}

inline json state_to_json(const OptState& s) {
  json locks = json::array();
  for (const auto& l : s.locks) locks.push_back(lock_to_json(l));
  json j{{"iteration", s.iteration}, {"gaits", s.gaits},   {"locks", locks},
         {"h", s.h},                 {"displacements", s.displacements}, {"radius", s.radius},
         {"history", s.history}};
  j["prelock_gaits"] = s.prelock_gaits ? json(*s.prelock_gaits) : json(nullptr);
  j["locked_joint"] = s.locked_joint ? json(*s.locked_joint) : json(nullptr);
  return j;
}

inline OptState state_from_json(const json& j) {
  OptState s;
  s.iteration = detail::required<int>(j, "iteration");
  s.gaits = detail::required<std::vector<GaitParams>>(j, "gaits");
  for (const auto& l : j.at("locks")) s.locks.push_back(lock_from_json(l));
  if (s.locks.size() != s.gaits.size()) throw InvalidConfiguration("checkpoint: one lock mask per gait expected");
  s.h = detail::required<double>(j, "h");
  s.displacements = detail::required<std::vector<Pose2>>(j, "displacements");
  s.radius = detail::required<double>(j, "radius");
  s.history = detail::optional_or<std::vector<HistoryEntry>>(j, "history", {});
  if (j.contains("prelock_gaits") && !j.at("prelock_gaits").is_null())
    s.prelock_gaits = j.at("prelock_gaits").get<std::vector<GaitParams>>();
  if (j.contains("locked_joint") && !j.at("locked_joint").is_null()) s.locked_joint = j.at("locked_joint").get<int>();
  return s;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfiguration("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidConfiguration("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidConfiguration("cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// CSV.
// ---------------------------------------------------------------------------

/// Shortest decimal text that reads back to the same double (at most 17 digits).
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// Header plus rows of text cells. Cells may not contain commas, quotes or newlines.
class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) { check_cells(header_); }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
      throw InvalidInput("CsvTable: row has " + std::to_string(cells.size()) + " cells, header has " +
                         std::to_string(header_.size()));
    check_cells(cells);
    rows_.push_back(std::move(cells));
  }

  void add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(format_double(v));
    add_row(std::move(cells));
  }

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
      if (header_[i] == name) return i;
    throw InvalidInput("CsvTable: no column '" + name + "'");
  }

  std::vector<double> column(const std::string& name) const {
    const std::size_t c = column_index(name);
    std::vector<double> out;
    for (const auto& r : rows_) {
      // strtod, unlike stod, accepts subnormals.
      char* end = nullptr;
      const double v = std::strtod(r[c].c_str(), &end);
      if (r[c].empty() || end != r[c].c_str() + r[c].size())
        throw InvalidInput("CsvTable: '" + r[c] + "' in column '" + name + "' is not a number");
      out.push_back(v);
    }
    return out;
  }

  void write(std::ostream& os) const {
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidConfiguration("cannot write '" + path + "'");
    write(out);
  }

  static CsvTable read(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidInput("CsvTable: empty input");
    CsvTable t(split(line));
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      t.add_row(split(line));
    }
    return t;
  }

  static CsvTable read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    return read(in);
  }

 private:
  static void check_cells(const std::vector<std::string>& cells) {
    for (const auto& c : cells)
      if (c.find_first_of(",\"\n\r") != std::string::npos) throw InvalidInput("CsvTable: cell '" + c + "' needs quoting");
  }

  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }

  static std::vector<std::string> split(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      out.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Per-iteration h and letter displacements (x, y, theta per gait).
inline CsvTable history_table(const OptState& s) {
  std::vector<std::string> header{"iteration", "h", "accepted", "event"};
  const std::size_t n = s.gaits.size();
  for (std::size_t g = 0; g < n; ++g)
    for (const char* c : {"x", "y", "theta"}) header.push_back("g" + std::to_string(g) + "_" + c);
  CsvTable t(header);
  for (const auto& e : s.history) {
    std::vector<std::string> row{std::to_string(e.iteration), format_double(e.h), e.accepted ? "1" : "0", e.event};
    for (std::size_t g = 0; g < n; ++g) {
      const Pose2 d = g < e.displacements.size() ? e.displacements[g] : Pose2::identity();
      for (double v : {d.x, d.y, d.theta}) row.push_back(format_double(v));
    }
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace gaitcov

#endif  // GAITCOV_IO_HPP_
