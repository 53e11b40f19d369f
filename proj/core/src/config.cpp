// SPDX-License-Identifier: Apache-2.0
#include "linwalk/config.hpp"

#include <fstream>
#include <sstream>

namespace linwalk {

namespace {

std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_numbers(const std::string& text, const std::string& key)
{
    std::vector<double> out;
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(token, &used));
            if (used != token.size()) {
                throw std::invalid_argument(token);
            }
        } catch (const std::exception&) {
            throw_error(ErrorKind::ConfigError, "field '" + key + "': bad number '" + token + "'");
        }
    }
    return out;
}

} // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw_error(ErrorKind::ConfigError, "cannot open config file " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str(), path);
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text, const std::string& origin)
{
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw_error(ErrorKind::ConfigError,
                        origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw_error(ErrorKind::ConfigError,
                        origin + ":" + std::to_string(line_no) + ": empty key");
        }
        cfg.entries_[key] = value;
        cfg.lines_[key] = line_no;
    }
    return cfg;
}

bool KeyValueConfig::has(const std::string& key) const
{
    return entries_.count(key) > 0;
}

void KeyValueConfig::missing(const std::string& key) const
{
    throw_error(ErrorKind::ConfigError, origin_ + ": missing field '" + key + "'");
}

std::string KeyValueConfig::get_string(const std::string& key) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        missing(key);
    }
    return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const
{
    const std::vector<double> v = parse_numbers(get_string(key), key);
    if (v.size() != 1) {
        throw_error(ErrorKind::ConfigError, "field '" + key + "': expected one number");
    }
    return v[0];
}

std::int64_t KeyValueConfig::get_int(const std::string& key) const
{
    const double d = get_double(key);
    const auto i = static_cast<std::int64_t>(d);
    if (static_cast<double>(i) != d) {
        throw_error(ErrorKind::ConfigError, "field '" + key + "': expected an integer");
    }
    return i;
}

std::vector<double> KeyValueConfig::get_vector(const std::string& key) const
{
    return parse_numbers(get_string(key), key);
}

Matrix KeyValueConfig::get_matrix(const std::string& key) const
{
    const std::string text = get_string(key);
    std::vector<std::vector<double>> rows;
    std::string row_text;
    std::istringstream in(text);
    while (std::getline(in, row_text, ';')) {
        rows.push_back(parse_numbers(row_text, key));
        if (rows.back().empty()) {
            throw_error(ErrorKind::ConfigError, "field '" + key + "': empty matrix row");
        }
        if (rows.back().size() != rows.front().size()) {
            throw_error(ErrorKind::ConfigError, "field '" + key + "': ragged matrix rows");
        }
    }
    if (rows.empty()) {
        throw_error(ErrorKind::ConfigError, "field '" + key + "': empty matrix");
    }
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows.front().size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

std::string KeyValueConfig::get_string_or(const std::string& key, const std::string& dflt) const
{
    return has(key) ? get_string(key) : dflt;
}

double KeyValueConfig::get_double_or(const std::string& key, double dflt) const
{
    return has(key) ? get_double(key) : dflt;
}

std::int64_t KeyValueConfig::get_int_or(const std::string& key, std::int64_t dflt) const
{
    return has(key) ? get_int(key) : dflt;
}

void KeyValueConfig::set(const std::string& key, const std::string& value)
{
    entries_[key] = value;
    lines_[key] = -1;
}

EnsembleSpec parse_ensemble_spec(const KeyValueConfig& cfg, const std::string& prefix)
{
    EnsembleSpec spec;
    spec.dim = static_cast<int>(cfg.get_int(prefix + "dim"));
    spec.scale = cfg.get_double_or(prefix + "scale", 1.0);
    spec.name = cfg.get_string_or(prefix + "name", "");
    const std::string kind = cfg.get_string(prefix + "kind");
    if (kind == "discrete") {
        spec.kind = EnsembleKind::Discrete;
        const std::vector<double> weights = cfg.get_vector(prefix + "weights");
        for (std::size_t i = 0; i < weights.size(); ++i) {
            spec.atoms.push_back(cfg.get_matrix(prefix + "atom." + std::to_string(i)));
        }
        spec.weights = weights;
    } else if (kind == "rotation-diagonal") {
        spec.kind = EnsembleKind::RotationDiagonal;
        const std::vector<double> gains = cfg.get_vector(prefix + "gains");
        spec.gains = Eigen::Map<const Vector>(gains.data(), static_cast<Eigen::Index>(gains.size()));
    } else if (kind == "gaussian-perturbed") {
        spec.kind = EnsembleKind::GaussianPerturbed;
        spec.epsilon = cfg.get_double(prefix + "epsilon");
    } else {
        throw_error(ErrorKind::ConfigError, "unknown ensemble kind '" + kind + "'");
    }
    return spec;
}

TestFunction parse_test_function(const KeyValueConfig& cfg, const std::string& prefix)
{
    const std::string phi_kind = cfg.get_string_or(prefix + "phi", "one");
    PhiFunction phi = PhiFunction::one();
    if (phi_kind == "overlap" || phi_kind == "distance") {
        const std::vector<double> u = cfg.get_vector(prefix + "phi.u");
        const Vector uv = Eigen::Map<const Vector>(u.data(), static_cast<Eigen::Index>(u.size()));
        phi = phi_kind == "overlap" ? PhiFunction::overlap(uv)
                                    : PhiFunction::distance_to(ProjPoint(uv));
    } else if (phi_kind != "one") {
        throw_error(ErrorKind::ConfigError, "unknown phi kind '" + phi_kind + "'");
    }
    const std::vector<double> knots = cfg.get_vector(prefix + "psi.knots");
    const std::vector<double> values = cfg.get_vector(prefix + "psi.values");
    return TestFunction{phi, PiecewiseLinear(knots, values)};
}

} // namespace linwalk
