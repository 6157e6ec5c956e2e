#pragma once

#include <string>
#include <utility>
#include <vector>

namespace diffcomp::harness {

// Minimal structured-text configuration format used by scenario and suite
// files:
//
//   # comment to end of line
//   key value            value is a bare word or number
//   key [1, 2.5, 3]      numeric list
//   key { ... }          nested block of further pairs
//
// Keys may repeat (suites list one `scenario` entry per file). Pairs may
// share a line; newlines are just whitespace.
struct ConfigValue;
using ConfigBlock = std::vector<std::pair<std::string, ConfigValue>>;

struct ConfigValue {
    enum class Kind { Scalar, List, Block };
    Kind kind = Kind::Scalar;
    std::string scalar;
    std::vector<double> list;
    ConfigBlock block;
};

ConfigBlock parse_config(const std::string& text, const std::string& origin);
ConfigBlock parse_config_file(const std::string& path);

// Lookup helpers; the `origin` string feeds error messages. The require_*
// forms throw SpecError when the key is absent or has the wrong shape.
const ConfigValue* find_key(const ConfigBlock& block, const std::string& key);
std::string require_string(const ConfigBlock& block, const std::string& key,
                           const std::string& origin);
double require_number(const ConfigBlock& block, const std::string& key,
                      const std::string& origin);
std::vector<double> require_list(const ConfigBlock& block, const std::string& key,
                                 const std::string& origin);
const ConfigBlock& require_block(const ConfigBlock& block, const std::string& key,
                                 const std::string& origin);

std::string get_string(const ConfigBlock& block, const std::string& key,
                       const std::string& fallback);
double get_number(const ConfigBlock& block, const std::string& key, double fallback);
bool get_bool(const ConfigBlock& block, const std::string& key, bool fallback);

} // namespace diffcomp::harness
