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

#include "thz/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace thz {

void write_cmatrix(const std::string& path, const CMat& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# cmatrix " << m.rows() << " " << m.cols() << "\n";
  char buf[80];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", m(r, c).real(), m(r, c).imag());
      out << buf;
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

CMat read_cmatrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string hash, tag;
  Eigen::Index rows = 0, cols = 0;
  in >> hash >> tag >> rows >> cols;
  if (hash != "#" || tag != "cmatrix" || rows < 0 || cols < 0) {
    throw IoError("bad cmatrix header in " + path);
  }
  CMat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double re = 0.0, im = 0.0;
      if (!(in >> re >> im)) throw IoError("truncated cmatrix body in " + path);
      m(r, c) = cdouble(re, im);
    }
  }
  return m;
}

std::vector<Material> load_materials(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open materials table: " + path);
  std::vector<Material> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Material m;
    if (!(ls >> m.name >> m.roughness_std_mm >> m.absorption_coeff_cm >> m.refractive_index)) {
      continue;  // blank or comment-only line
    }
    m.validate();
    out.push_back(std::move(m));
  }
  if (out.empty()) throw IoError("materials table is empty: " + path);
  return out;
}

AbsorptionTable AbsorptionTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open absorption table: " + path);
  AbsorptionTable t;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double f = 0.0, mu = 0.0;
    if (!(ls >> f >> mu)) continue;
    t.freq_.push_back(f);
    t.mu_.push_back(mu);
  }
  if (t.freq_.empty()) throw IoError("absorption table is empty: " + path);
  if (!std::is_sorted(t.freq_.begin(), t.freq_.end())) {
    throw IoError("absorption table must be sorted by frequency: " + path);
  }
  return t;
}

double AbsorptionTable::at(double frequency_hz) const {
  if (frequency_hz <= freq_.front()) return mu_.front();
  if (frequency_hz >= freq_.back()) return mu_.back();
  const auto it = std::upper_bound(freq_.begin(), freq_.end(), frequency_hz);
  const std::size_t i = static_cast<std::size_t>(it - freq_.begin());
  const double w = (frequency_hz - freq_[i - 1]) / (freq_[i] - freq_[i - 1]);
  return (1.0 - w) * mu_[i - 1] + w * mu_[i];
}

void write_trace_csv(const std::string& path, const std::vector<ConvergenceTraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "iteration,gamma_delta_sq,evidence\n";
  char buf[96];
  for (const auto& row : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", row.iteration, row.gamma_delta_sq,
                  row.evidence);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace thz
