#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace conelab {

/// Shortest decimal representation that round-trips the exact double.
std::string double_to_string(double v);

std::uint64_t fnv1a(const std::string& data);
std::string hex64(std::uint64_t v);

/// Digest of a JSON document, invariant under key reordering.
std::string canonical_digest(const nlohmann::json& j);

/// Deterministic CSV artifact: fixed header, explicit rows, '\n' line ends.
class Csv {
  public:
    explicit Csv(std::string header) : header_(std::move(header)) {}

    void row(const std::vector<std::string>& cells);
    const std::string& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    void save(const std::string& path) const;

  private:
    std::string header_;
    std::vector<std::string> rows_;
};

struct CheckResult {
    std::string name;
    std::string verdict;  // pass | fail | skipped | precondition-failed
    double value = 0;
    std::string detail;
};

struct ArtifactInfo {
    std::string path;
    std::string header;
    std::size_t rows = 0;
};

struct RunManifest {
    std::string tool;
    std::string command;
    std::string config_digest;
    std::uint64_t seed = 0;
    bool paper_factors = false;
    std::vector<CheckResult> checks;
    std::vector<ArtifactInfo> artifacts;
    std::map<std::string, double> durations_ms;
    int exit_code = 0;

    void add(const std::string& name, bool pass, double value, const std::string& detail = "");
    void add_precondition_failure(const std::string& name, const std::string& detail);
    bool all_pass() const;

    nlohmann::json to_json() const;
    void save(const std::string& path) const;
};

}  // namespace conelab
