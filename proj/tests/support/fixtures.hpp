#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#ifndef GC_FIXTURE_DIR
#error "GC_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace groundchat::testing {

inline std::string fixture_path(const std::string& name) { return std::string(GC_FIXTURE_DIR) + "/" + name; }

inline std::string read_fixture(const std::string& name) {
    std::ifstream in(fixture_path(name), std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace groundchat::testing

namespace groundchat::testing {

inline std::string read_golden(const std::string& name) {
    std::ifstream in(std::string(GC_GOLDEN_DIR) + "/" + name, std::ios::binary);
    if (!in) throw std::runtime_error("missing golden file " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string s = ss.str();
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace groundchat::testing
