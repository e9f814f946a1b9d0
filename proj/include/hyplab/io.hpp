#ifndef HYPLAB_IO_HPP
#define HYPLAB_IO_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "params.hpp"
#include "spectral_core.hpp"

namespace hyplab {

inline constexpr const char* kVersion = "0.3.1";

/** \brief %.17g, the round-trip format used in every emitted file. */
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string hex64(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/**
 * \brief [section] / key = value configuration. Sections used: model,
 * grids, experiment, output.
 */
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_file(const std::string& path) {
    RunConfig c;
    try {
      boost::property_tree::ini_parser::read_ini(path, c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw DomainError(std::string("config: ") + e.what());
    }
    return c;
  }
  static RunConfig from_string(const std::string& text) {
    RunConfig c;
    std::istringstream is(text);
    try {
      boost::property_tree::ini_parser::read_ini(is, c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw DomainError(std::string("config: ") + e.what());
    }
    return c;
  }

  template <class T>
  T get(const std::string& key, const T& fallback) const {
    // the defaulted ptree getter swallows malformed values, so only absence falls back
    if (!tree_.get_optional<std::string>(key)) return fallback;
    try {
      return tree_.get<T>(key);
    } catch (const boost::property_tree::ptree_bad_data&) {
      throw DomainError("config: bad value for " + key);
    }
  }
  bool has(const std::string& key) const { return static_cast<bool>(tree_.get_optional<std::string>(key)); }
  void set(const std::string& key, const std::string& value) { tree_.put(key, value); }

  /** \brief Comma-separated list of doubles. */
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const {
    auto s = tree_.get_optional<std::string>(key);
    if (!s) return fallback;
    std::vector<double> out;
    std::stringstream ss(*s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw DomainError("config: bad list entry in " + key);
      }
    }
    return out;
  }

  ModelParams model() const {
    ModelParams p;
    p.n = get<int>("model.n", 3);
    p.sigma = get<double>("model.sigma", 0.5);
    p.lambda = get<double>("model.lambda", 0.0);
    p.beta = get<double>("model.beta", 1.0);
    p.gamma = get<double>("model.gamma", 2.0);
    p.validate();
    return p;
  }

  GridSpec grids() const {
    GridSpec g = get<std::string>("grids.preset", "default") == "coarse" ? GridSpec::coarse() : GridSpec();
    g.rMax = get<double>("grids.rMax", g.rMax);
    g.rPanel = get<double>("grids.rPanel", g.rPanel);
    g.rNodes = get<int>("grids.rNodes", g.rNodes);
    g.rGraded = get<int>("grids.rGraded", g.rGraded);
    g.xiMax = get<double>("grids.xiMax", g.xiMax);
    g.xiPanel = get<double>("grids.xiPanel", g.xiPanel);
    g.xiNodes = get<int>("grids.xiNodes", g.xiNodes);
    g.xiGraded = get<int>("grids.xiGraded", g.xiGraded);
    if (!(g.rMax > 0 && g.xiMax > 0 && g.rPanel > 0 && g.xiPanel > 0 && g.rNodes > 1 && g.xiNodes > 1 &&
          g.rGraded >= 0 && g.xiGraded >= 0))
      throw DomainError("grids: panel sizes, truncations and node counts must be positive");
    return g;
  }

  /** \brief Canonical "section.key=value" lines, sorted. */
  std::string canonical() const {
    std::map<std::string, std::string> flat;
    for (const auto& sec : tree_) {
      if (sec.second.empty()) flat[sec.first] = sec.second.data();
      for (const auto& kv : sec.second) flat[sec.first + "." + kv.first] = kv.second.data();
    }
    std::string out;
    for (const auto& [k, v] : flat) out += k + "=" + v + "\n";
    return out;
  }

  std::uint64_t hash() const {
    Crc64 crc;
    std::string c = canonical();
    crc.process_bytes(c.data(), c.size());
    return crc.checksum();
  }

 private:
  boost::property_tree::ptree tree_;
};

/** \brief Header comment carried by every CSV and JSON-lines file. */
inline std::string provenance_header(std::uint64_t configHash, std::uint64_t seed, const std::string& prefix = "# ") {
  return prefix + "hyplab " + kVersion + " config=" + hex64(configHash) + " seed=" + std::to_string(seed) + "\n";
}

/** \brief CSV rows with fixed formatting; strings pass through unquoted. */
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& columns, std::uint64_t configHash, std::uint64_t seed)
      : os_(os) {
    os_ << provenance_header(configHash, seed);
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << "\n";
  }
  CsvWriter& cell(const std::string& s) {
    sep();
    os_ << s;
    return *this;
  }
  CsvWriter& cell(double v) {
    sep();
    os_ << fmt17(v);
    return *this;
  }
  CsvWriter& cell(long long v) {
    sep();
    os_ << v;
    return *this;
  }
  void end_row() {
    os_ << "\n";
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) os_ << ",";
    first_ = false;
  }
  std::ostream& os_;
  bool first_ = true;
};

inline std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::string path = dir.empty() ? name : dir + "/" + name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

}  // namespace hyplab

#endif  // HYPLAB_IO_HPP
