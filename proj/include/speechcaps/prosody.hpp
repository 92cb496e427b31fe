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

#ifndef SPEECHCAPS_PROSODY_HPP_
#define SPEECHCAPS_PROSODY_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "speechcaps/corpus.hpp"
#include "speechcaps/error.hpp"
#include "speechcaps/lexicon.hpp"
#include "speechcaps/signal.hpp"

namespace speechcaps {

struct FrameConfig {
  double frame_s = 0.040;
  double hop_s = 0.010;
};

struct Framing {
  Eigen::Index length = 0;
  Eigen::Index hop = 0;
  Eigen::Index count = 0;
};

/// Frames of `frame_s` every `hop_s`. A signal shorter than one frame is a
/// single frame spanning the whole signal.
inline Framing make_framing(Eigen::Index n, int rate_hz, const FrameConfig& cfg = {}) {
  Framing f;
  f.length = std::max<Eigen::Index>(1, std::llround(cfg.frame_s * rate_hz));
  f.hop = std::max<Eigen::Index>(1, std::llround(cfg.hop_s * rate_hz));
  if (n < f.length) {
    f.length = n;
    f.count = n > 0 ? 1 : 0;
  } else {
    f.count = 1 + (n - f.length) / f.hop;
  }
  return f;
}

inline double amplitude_to_db(double a) { return 20.0 * std::log10(a); }

struct PitchOptions {
  FrameConfig frames;
  double min_hz = 50.0;
  double max_hz = 500.0;
  double voicing_threshold = 0.30;
  double silence_gate_db = -45.0;
  // A candidate peak must reach this fraction of the frame's best correlation;
  // the shortest such lag wins, which suppresses octave-down errors.
  double peak_ratio = 0.9;
};

struct PitchEstimate {
  std::optional<double> pitch_hz;  // median over voiced frames
  double voiced_fraction = 0.0;
};

struct EnergyOptions {
  FrameConfig frames;
  double floor_db = -60.0;
};

namespace detail {

/// Pitch of one frame, or nullopt when unvoiced.
template <typename Derived>
std::optional<double> frame_pitch(const Eigen::MatrixBase<Derived>& frame, int rate_hz,
                                  const PitchOptions& opt) {
  using Vec = Eigen::VectorXd;
  const Vec f = frame.template cast<double>();
  const Eigen::Index len = f.size();
  if (len < 4) return std::nullopt;
  const double rms = std::sqrt(f.squaredNorm() / static_cast<double>(len));
  if (rms <= 0.0 || amplitude_to_db(rms) < opt.silence_gate_db) return std::nullopt;

  const Eigen::Index lag_min =
      std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::floor(rate_hz / opt.max_hz)));
  const Eigen::Index lag_max = std::min<Eigen::Index>(
      len - 2, static_cast<Eigen::Index>(std::ceil(rate_hz / opt.min_hz)));
  if (lag_max < lag_min) return std::nullopt;

  Vec energy(len + 1);  // energy[k] = sum of squares of the first k samples
  energy[0] = 0.0;
  for (Eigen::Index i = 0; i < len; ++i) energy[i + 1] = energy[i] + f[i] * f[i];

  // r[lag] for lag in [lag_min - 1, lag_max + 1].
  const Eigen::Index lo = lag_min - 1;
  const Eigen::Index hi = std::min<Eigen::Index>(lag_max + 1, len - 1);
  Vec r = Vec::Zero(hi - lo + 1);
  for (Eigen::Index lag = lo; lag <= hi; ++lag) {
    const Eigen::Index m = len - lag;
    const double denom = std::sqrt(energy[m] * (energy[len] - energy[lag]));
    if (denom > 0.0) r[lag - lo] = f.head(m).dot(f.segment(lag, m)) / denom;
  }
  auto at = [&](Eigen::Index lag) { return r[lag - lo]; };

  double best = -1.0;
  for (Eigen::Index lag = lag_min; lag <= lag_max; ++lag) best = std::max(best, at(lag));
  if (best < opt.voicing_threshold) return std::nullopt;

  Eigen::Index chosen = -1;
  for (Eigen::Index lag = lag_min; lag <= lag_max; ++lag) {
    const double v = at(lag);
    const bool local_max = v >= at(lag - 1) && (lag + 1 > hi || v >= at(lag + 1));
    if (local_max && v >= opt.peak_ratio * best) {
      chosen = lag;
      break;
    }
  }
  if (chosen < 0) {
    for (Eigen::Index lag = lag_min; lag <= lag_max; ++lag) {
      if (at(lag) == best) {
        chosen = lag;
        break;
      }
    }
  }

  double offset = 0.0;
  if (chosen + 1 <= hi) {
    const double a = at(chosen - 1), b = at(chosen), c = at(chosen + 1);
    const double curvature = a - 2.0 * b + c;
    if (curvature < 0.0) offset = std::clamp(0.5 * (a - c) / curvature, -0.5, 0.5);
  }
  const double hz = rate_hz / (static_cast<double>(chosen) + offset);
  return std::clamp(hz, opt.min_hz, opt.max_hz);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Autocorrelation pitch tracker. A frame is voiced when its peak normalized
/// autocorrelation over the 50-500 Hz lag range reaches the voicing threshold
/// and its RMS is at least the silence gate.
template <typename Derived>
PitchEstimate estimate_pitch(const Eigen::MatrixBase<Derived>& samples, int rate_hz,
                             const PitchOptions& opt = {}) {
  if (samples.size() == 0) throw Error(ErrorCode::kEmptySignal, "estimate_pitch: empty signal");
  if (rate_hz < 8000) throw Error(ErrorCode::kInvalidArgument, "estimate_pitch: rate below 8 kHz");
  const Framing fr = make_framing(samples.size(), rate_hz, opt.frames);
  std::vector<double> f0;
  for (Eigen::Index k = 0; k < fr.count; ++k) {
    if (auto hz = detail::frame_pitch(samples.segment(k * fr.hop, fr.length), rate_hz, opt)) {
      f0.push_back(*hz);
    }
  }
  PitchEstimate est;
  est.voiced_fraction = static_cast<double>(f0.size()) / static_cast<double>(fr.count);
  if (!f0.empty()) est.pitch_hz = detail::median(std::move(f0));
  return est;
}

/// Mean per-frame RMS over frames above the floor, in dBFS. Returns the floor
/// when no frame clears it.
template <typename Derived>
double compute_energy(const Eigen::MatrixBase<Derived>& samples, int rate_hz,
                      const EnergyOptions& opt = {}) {
  if (samples.size() == 0) throw Error(ErrorCode::kEmptySignal, "compute_energy: empty signal");
  const Framing fr = make_framing(samples.size(), rate_hz, opt.frames);
  double sum = 0.0;
  std::size_t kept = 0;
  for (Eigen::Index k = 0; k < fr.count; ++k) {
    const double ms =
        samples.segment(k * fr.hop, fr.length).template cast<double>().squaredNorm() /
        static_cast<double>(fr.length);
    const double rms = std::sqrt(ms);
    if (rms > 0.0 && amplitude_to_db(rms) > opt.floor_db) {
      sum += rms;
      ++kept;
    }
  }
  if (kept == 0) return opt.floor_db;
  return amplitude_to_db(sum / static_cast<double>(kept));
}

inline PitchEstimate estimate_pitch(const Waveform& w, const PitchOptions& opt = {}) {
  return estimate_pitch(w.samples, w.sample_rate_hz, opt);
}

inline double compute_energy(const Waveform& w, const EnergyOptions& opt = {}) {
  return compute_energy(w.samples, w.sample_rate_hz, opt);
}

struct ProsodyMeasurement {
  std::string utterance_id;
  std::optional<double> pitch_hz;
  double energy_db = 0.0;
  double speaking_rate_pps = 0.0;
  double voiced_fraction = 0.0;
  // Carried along for grouping; not measured.
  std::string speaker_id;
  Gender gender = Gender::kFemale;
  int phoneme_count = 0;

  std::optional<double> value(ProsodicAttribute a) const;
  bool operator==(const ProsodyMeasurement&) const = default;
};

struct ProsodyOptions {
  PitchOptions pitch;
  EnergyOptions energy;
};

ProsodyMeasurement measure(const UtteranceRecord& record, const Waveform& wave,
                           const PhonemeLexicon& lexicon, const ProsodyOptions& opt = {});

/// Order-preserving batch measurement, optionally on several threads.
std::vector<ProsodyMeasurement> measure_batch(const Manifest& manifest, const PhonemeLexicon& lexicon,
                                              std::size_t workers = 1,
                                              const ProsodyOptions& opt = {});

Json to_json(const ProsodyMeasurement& m);
ProsodyMeasurement measurement_from_json(const Json& j);
std::vector<ProsodyMeasurement> load_measurements(const std::filesystem::path& path);
void save_measurements(const std::filesystem::path& path, std::span<const ProsodyMeasurement> ms);

}  // namespace speechcaps

#endif  // SPEECHCAPS_PROSODY_HPP_
