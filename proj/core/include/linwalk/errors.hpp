// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace linwalk {

/// Error categories raised by the library. Each maps to one failure mode of
/// the public operations; see the message for instance-specific detail.
enum class ErrorKind {
    InvalidPoint,
    DimensionError,
    IllConditioned,
    InfiniteDelta,
    SingularAtom,
    WeightError,
    NotConverged,
    TooLarge,
    MomentOverflow,
    InfinitePerturbation,
    ConfigError,
    MissingRun,
};

inline const char* to_string(ErrorKind kind)
{
    switch (kind) {
        case ErrorKind::InvalidPoint: return "InvalidPoint";
        case ErrorKind::DimensionError: return "DimensionError";
        case ErrorKind::IllConditioned: return "IllConditioned";
        case ErrorKind::InfiniteDelta: return "InfiniteDelta";
        case ErrorKind::SingularAtom: return "SingularAtom";
        case ErrorKind::WeightError: return "WeightError";
        case ErrorKind::NotConverged: return "NotConverged";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::MomentOverflow: return "MomentOverflow";
        case ErrorKind::InfinitePerturbation: return "InfinitePerturbation";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::MissingRun: return "MissingRun";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

} // namespace linwalk
