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

#ifndef THZ_IO_HPP
#define THZ_IO_HPP

#include <string>
#include <vector>

#include "thz/config.hpp"
#include "thz/estimation.hpp"
#include "thz/types.hpp"

namespace thz {

// Plain-text complex matrix format: a header line
//   # cmatrix <rows> <cols>
// followed by rows*cols lines "re im" in row-major order.
void write_cmatrix(const std::string& path, const CMat& m);
CMat read_cmatrix(const std::string& path);

/// Materials table: whitespace-separated columns
///   name  sigma_r_mm  xi_cm  n
/// '#' starts a comment.
std::vector<Material> load_materials(const std::string& path);

/// Absorption table with rows "frequency_hz mu_abs_per_m", linearly
/// interpolated between samples and clamped at the ends.
class AbsorptionTable {
 public:
  static AbsorptionTable load(const std::string& path);
  double at(double frequency_hz) const;

 private:
  std::vector<double> freq_, mu_;
};

/// Convergence trace as CSV: iteration,gamma_delta_sq,evidence.
void write_trace_csv(const std::string& path, const std::vector<ConvergenceTraceRow>& trace);

}  // namespace thz

#endif  // THZ_IO_HPP
