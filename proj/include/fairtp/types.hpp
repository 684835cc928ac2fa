#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace fairtp {

using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using IntVector = Eigen::Matrix<int, Eigen::Dynamic, 1>;

using SensorId = int;
using RegionId = int;

/// Rejected input: a caller violated an operation precondition.
struct invalid_input : std::runtime_error {
    explicit invalid_input(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent external data (CSV/JSON files).
struct data_error : std::runtime_error {
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad run configuration (schema violations, unknown fields, invalid values).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss.
struct divergence_error : std::runtime_error {
    explicit divergence_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fairtp
