// Copyright (C) 2026 thzsim contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef THZ_TYPES_HPP
#define THZ_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace thz {

using cdouble = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kSpeedOfLight = 299792458.0;   // m/s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kVacuumPermeability = 4.0e-7 * kPi;        // H/m
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;    // F/m
inline constexpr double kFreeSpaceImpedance = 377.0;               // Ohm, Z_0

/// Invalid or inconsistent configuration (violated invariant, bad field).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Mismatched matrix/vector dimensions between cooperating arguments.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure inside an iterative routine; carries the iteration index.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline double db_from_linear(double x) { return 10.0 * std::log10(x); }
inline double linear_from_db(double x) { return std::pow(10.0, x / 10.0); }

}  // namespace thz

#endif  // THZ_TYPES_HPP
