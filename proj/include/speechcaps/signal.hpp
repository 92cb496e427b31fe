// Copyright 2026 The speechcaps-forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPEECHCAPS_SIGNAL_HPP_
#define SPEECHCAPS_SIGNAL_HPP_

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace speechcaps {

template <typename Scalar>
using Signal = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Mono sample sequence plus its rate.
template <typename Scalar>
struct BasicWaveform {
  Signal<Scalar> samples;
  int sample_rate_hz = 0;

  Eigen::Index size() const { return samples.size(); }
  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

using Waveform = BasicWaveform<float>;

/// Number of output samples when resampling n input samples.
inline Eigen::Index resampled_length(Eigen::Index n, int from_hz, int to_hz) {
  if (from_hz == to_hz) return n;
  return static_cast<Eigen::Index>(
      std::llround(static_cast<double>(n) * static_cast<double>(to_hz) / from_hz));
}

/// Linear-interpolation resampler. Output sample j is read at input position
/// j * from/to; positions past the last sample hold the last value.
template <typename Derived>
Signal<typename Derived::Scalar> resample_linear(const Eigen::MatrixBase<Derived>& in, int from_hz,
                                                 int to_hz) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = in.size();
  if (from_hz == to_hz || n == 0) return in;
  const Eigen::Index m = resampled_length(n, from_hz, to_hz);
  Signal<Scalar> out(m);
  const double step = static_cast<double>(from_hz) / to_hz;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double pos = static_cast<double>(j) * step;
    const auto i0 = static_cast<Eigen::Index>(pos);
    if (i0 >= n - 1) {
      out[j] = in[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out[j] = static_cast<Scalar>((1.0 - frac) * in[i0] + frac * in[i0 + 1]);
  }
  return out;
}

template <typename Derived>
typename Derived::Scalar peak_abs(const Eigen::MatrixBase<Derived>& x) {
  return x.size() == 0 ? typename Derived::Scalar(0) : x.cwiseAbs().maxCoeff();
}

}  // namespace speechcaps

#endif  // SPEECHCAPS_SIGNAL_HPP_
