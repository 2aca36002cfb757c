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

#ifndef THZ_SRC_DSP_HPP
#define THZ_SRC_DSP_HPP

#include <vector>

#include <unsupported/Eigen/FFT>

#include "thz/types.hpp"

namespace thz::dsp {

// Unitary DFT conventions: fft_u scales the forward transform by 1/sqrt(N)
// so white noise keeps its covariance across the transform; the channel
// frequency response stays the plain (unscaled) DFT of the taps and the
// circular-convolution theorem reads FFT_u(h (*) g)[k] = H[k] * G_u[k].

inline CVec fft_unitary(const CVec& x) {
  Eigen::FFT<double> fft;
  const int n = static_cast<int>(x.size());
  std::vector<cdouble> in(x.data(), x.data() + n), out(n);
  fft.fwd(out, in);
  CVec y(n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) y(i) = out[i] * s;
  return y;
}

inline CVec ifft_unitary(const CVec& x) {
  Eigen::FFT<double> fft;
  const int n = static_cast<int>(x.size());
  std::vector<cdouble> in(x.data(), x.data() + n), out(n);
  fft.inv(out, in);  // includes the 1/N factor
  CVec y(n);
  const double s = std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) y(i) = out[i] * s;
  return y;
}

/// Row-wise unitary FFT of a matrix (transform along columns index).
inline CMat fft_unitary_rows(const CMat& m) {
  CMat out(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r) {
    out.row(r) = fft_unitary(m.row(r).transpose()).transpose();
  }
  return out;
}

inline CMat ifft_unitary_rows(const CMat& m) {
  CMat out(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r) {
    out.row(r) = ifft_unitary(m.row(r).transpose()).transpose();
  }
  return out;
}

}  // namespace thz::dsp

#endif  // THZ_SRC_DSP_HPP
