// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linwalk/ensemble.hpp"
#include "linwalk/test_function.hpp"

namespace linwalk {

/// Flat `key = value` text config: '#' comments, blank lines ignored,
/// later assignments override earlier ones. Vectors are space-separated
/// numbers; matrices separate rows with ';'.
class KeyValueConfig {
  public:
    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig from_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    std::vector<double> get_vector(const std::string& key) const;
    Matrix get_matrix(const std::string& key) const;

    std::string get_string_or(const std::string& key, const std::string& dflt) const;
    double get_double_or(const std::string& key, double dflt) const;
    std::int64_t get_int_or(const std::string& key, std::int64_t dflt) const;

    /// Flag-style overrides: assignments applied on top of the file.
    void set(const std::string& key, const std::string& value);

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    [[noreturn]] void missing(const std::string& key) const;

    std::map<std::string, std::string> entries_;
    std::map<std::string, int> lines_;
    std::string origin_;
};

/// Ensemble description under `<prefix>`: kind, dim, scale, and the
/// kind-specific fields (atom.0.., weights | gains | epsilon).
EnsembleSpec parse_ensemble_spec(const KeyValueConfig& cfg, const std::string& prefix = "ensemble.");

/// Product test function under `<prefix>`: phi = one|overlap|distance with
/// its data, psi.knots / psi.values.
TestFunction parse_test_function(const KeyValueConfig& cfg, const std::string& prefix = "h.");

} // namespace linwalk
