#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dyadic/error.hpp"
#include "dyadic/filtered_space.hpp"
#include "dyadic/paths.hpp"

namespace dyadic::io {

using nlohmann::json;

/// Shortest decimal that round-trips.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline json space_to_json(const FilteredSpace& space) {
  json parts = json::array();
  for (std::size_t k = 0; k < space.num_times(); ++k) {
    std::vector<std::size_t> labels(space.num_outcomes());
    for (std::size_t w = 0; w < space.num_outcomes(); ++w) labels[w] = space.partition(k).block_of(w);
    parts.push_back(labels);
  }
  return {{"master_level", space.master_level()},
          {"weights", std::vector<double>(space.weights().begin(), space.weights().end())},
          {"partitions", std::move(parts)}};
}

/// {"master_level": N, "weights": [...], "partitions": [[block label per outcome] per grid time]}
inline SpacePtr space_from_json(const json& j) {
  try {
    const int level = j.at("master_level").get<int>();
    auto weights = j.at("weights").get<std::vector<double>>();
    std::vector<Partition> partitions;
    for (const auto& labels : j.at("partitions")) {
      const auto l = labels.get<std::vector<std::size_t>>();
      if (l.size() != weights.size())
        throw Error(ErrorCode::BadPartition, "partition label count differs from outcome count");
      partitions.push_back(Partition::from_labels(l));
    }
    return build_filtered_space(DyadicGrid(level), std::move(weights), std::move(partitions));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("space: ") + e.what());
  }
}

/// Rows per grid time, one value per outcome.
inline json process_to_json(const ProcessPaths& p) {
  json rows = json::array();
  for (std::size_t k = 0; k < p.num_times(); ++k) {
    const auto r = p.row_view(k);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

inline ProcessPaths process_from_json(const SpacePtr& space, const json& j) {
  try {
    std::vector<RandomVariable> rows;
    for (const auto& r : j) rows.emplace_back(r.get<std::vector<double>>());
    if (rows.size() != space->num_times())
      throw Error(ErrorCode::BadConfig, "process needs one row per grid time");
    for (const auto& r : rows)
      if (r.size() != space->num_outcomes())
        throw Error(ErrorCode::BadConfig, "process row needs one value per outcome");
    return ProcessPaths(space, rows);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("process: ") + e.what());
  }
}

/// Outcome -> time, or "inf".
inline json stopping_time_to_json(const GridStoppingTime& tau) {
  json out = json::array();
  for (std::size_t w = 0; w < tau.size(); ++w) {
    if (tau.finite(w))
      out.push_back(tau.time(w));
    else
      out.push_back("inf");
  }
  return out;
}

inline GridStoppingTime stopping_time_from_json(const SpacePtr& space, const json& j) {
  try {
    std::vector<std::size_t> idx;
    for (const auto& v : j) {
      if (v.is_string()) {
        if (v.get<std::string>() != "inf") throw Error(ErrorCode::BadConfig, "stopping time value must be a time or \"inf\"");
        idx.push_back(kInfinity);
      } else {
        idx.push_back(space->grid().index_of(v.get<double>()));
      }
    }
    if (idx.size() != space->num_outcomes())
      throw Error(ErrorCode::BadConfig, "stopping time needs one value per outcome");
    return GridStoppingTime::checked(space, std::move(idx));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("stopping time: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write to " + path + " failed");
}

inline json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadConfig, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace dyadic::io
