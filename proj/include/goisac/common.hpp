#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace goisac {

using Point = Eigen::Vector2d;
using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLightspeed = 299792458.0;

/// A UE position coincides with an AP center, so range and direction are undefined.
class SingularGeometry : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The Fisher information does not allow the position to be recovered.
class Unidentifiable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The achievable rate is zero, so no number of REs delivers the payload.
class Undeliverable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string &field, const std::string &what)
        : std::invalid_argument(field + ": " + what), field_(field) {}

    const std::string &field() const noexcept { return field_; }

private:
    std::string field_;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return 1e-3 * db_to_linear(dbm); }

} // namespace goisac
