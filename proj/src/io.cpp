#include "conelab/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace conelab {

std::string double_to_string(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc())
        throw std::runtime_error("double_to_string: conversion failed");
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string canonical_digest(const nlohmann::json& j) {
    // nlohmann objects iterate in key order, so dump() is canonical already
    return hex64(fnv1a(j.dump()));
}

void Csv::row(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    rows_.push_back(std::move(line));
}

std::string Csv::str() const {
    std::string out = header_;
    out += '\n';
    for (const std::string& r : rows_) {
        out += r;
        out += '\n';
    }
    return out;
}

void Csv::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << str();
}

void RunManifest::add(const std::string& name, bool pass, double value,
                      const std::string& detail) {
    checks.push_back({name, pass ? "pass" : "fail", value, detail});
}

void RunManifest::add_precondition_failure(const std::string& name, const std::string& detail) {
    checks.push_back({name, "precondition-failed", 0.0, detail});
}

bool RunManifest::all_pass() const {
    for (const CheckResult& c : checks)
        if (c.verdict == "fail" || c.verdict == "precondition-failed") return false;
    return true;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["tool"] = tool;
    j["command"] = command;
    j["config_digest"] = config_digest;
    j["seed"] = seed;
    j["paper_factors"] = paper_factors;
    j["exit_code"] = exit_code;
    nlohmann::json cl = nlohmann::json::array();
    for (const CheckResult& c : checks) {
        nlohmann::json e;
        e["name"] = c.name;
        e["verdict"] = c.verdict;
        e["value"] = c.value;
        if (!c.detail.empty()) e["detail"] = c.detail;
        cl.push_back(e);
    }
    j["checks"] = cl;
    nlohmann::json al = nlohmann::json::array();
    for (const ArtifactInfo& a : artifacts) {
        nlohmann::json e;
        e["path"] = a.path;
        e["header"] = a.header;
        e["rows"] = a.rows;
        al.push_back(e);
    }
    j["artifacts"] = al;
    j["durations_ms"] = durations_ms;
    return j;
}

void RunManifest::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << to_json().dump(2) << '\n';
}

}  // namespace conelab
