#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hywm/detail/rng.hpp"
#include "hywm/errors.hpp"

// Toy ECG payload for the heart-disease workflow: a parametric beat-train
// generator standing in for patient data and for the virtual heart model,
// plus the feature extractor and rule-based disease estimator.
namespace hywm::ecg {

struct SynthParams {
  double bpm = 60.0;
  double irregularity = 0.0;  // [0, 1]; relative spread of beat intervals
  double st_offset = 0.0;     // baseline level between beats
  double noise = 0.0;         // sigma of additive gaussian noise
  std::uint64_t seed = 0;
  bool operator==(const SynthParams&) const = default;
};

struct Signal {
  std::vector<double> samples;
  double rate = 250.0;  // Hz
  std::vector<double> beat_times;  // generator ground truth, seconds
};

/// Gaussian width of one beat, seconds.
inline constexpr double kBeatWidth = 0.02;

/// Beats start half an interval in; interval k is (60 / bpm) * (1 +
/// irregularity * (u_k - 0.5)) with u_k uniform in [0, 1) keyed on (seed, k).
inline Signal synthesize(const SynthParams& p, double duration, double rate) {
  if (!(p.bpm > 0)) throw Error("synthesize: bpm must be > 0");
  if (rate < 50.0) throw Error("synthesize: rate must be >= 50 Hz");
  Signal s;
  s.rate = rate;
  const double base = 60.0 / p.bpm;
  for (double t = base / 2.0; t < duration;) {
    s.beat_times.push_back(t);
    const auto k = static_cast<std::uint64_t>(s.beat_times.size());
    t += base * (1.0 + p.irregularity * (detail::uniform(p.seed, 2 * k) - 0.5));
  }
  const auto n = static_cast<std::size_t>(std::floor(duration * rate));
  s.samples.assign(n, p.st_offset);
  const double reach = 6.0 * kBeatWidth;
  for (double bt : s.beat_times) {
    const auto lo = static_cast<std::size_t>(std::max(0.0, std::ceil((bt - reach) * rate)));
    const auto hi = std::min(n, static_cast<std::size_t>(std::floor((bt + reach) * rate)) + 1);
    for (std::size_t i = lo; i < hi; ++i) {
      const double z = (static_cast<double>(i) / rate - bt) / kBeatWidth;
      s.samples[i] += std::exp(-0.5 * z * z);
    }
  }
  if (p.noise > 0.0)
    for (std::size_t i = 0; i < n; ++i) s.samples[i] += p.noise * detail::gaussian(p.seed ^ 0x5eedULL, i);
  return s;
}

struct Features {
  double rr_mean = 0.0;        // seconds
  double rr_std = 0.0;         // seconds
  double dominant_freq = 0.0;  // Hz
  double st_deviation = 0.0;
  bool operator==(const Features&) const = default;
};

/// Minimum spacing between two detected beats, seconds.
inline constexpr double kRefractory = 0.1;

/// Peak times of runs above half the signal maximum.
inline std::vector<double> detect_beats(std::span<const double> x, double rate) {
  std::vector<double> beats;
  if (x.empty()) return beats;
  const double peak = *std::max_element(x.begin(), x.end());
  if (!(peak > 0.0)) return beats;
  const double threshold = 0.5 * peak;
  std::size_t i = 0;
  while (i < x.size()) {
    if (x[i] < threshold) {
      ++i;
      continue;
    }
    std::size_t best = i;
    while (i < x.size() && x[i] >= threshold) {
      if (x[i] > x[best]) best = i;
      ++i;
    }
    const double t = static_cast<double>(best) / rate;
    if (beats.empty() || t - beats.back() >= kRefractory) beats.push_back(t);
  }
  return beats;
}

/// Magnitude of the single-bin DFT of the mean-removed signal at `freq`.
inline double spectral_magnitude(std::span<const double> x, double rate, double freq) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double re = 0.0, im = 0.0;
  const double w = 2.0 * std::numbers::pi * freq / rate;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i] - mean;
    re += v * std::cos(w * static_cast<double>(i));
    im -= v * std::sin(w * static_cast<double>(i));
  }
  return std::hypot(re, im);
}

/// Scanned band: 0.5 Hz to 10 Hz in 0.1 Hz steps.
inline std::vector<double> scan_frequencies() {
  std::vector<double> out;
  for (int k = 5; k <= 100; ++k) out.push_back(static_cast<double>(k) / 10.0);
  return out;
}

inline Features extract_features(std::span<const double> x, double rate) {
  const auto beats = detect_beats(x, rate);
  if (beats.size() < 2) throw NoBeatsDetected();

  Features f;
  std::vector<double> rr;
  for (std::size_t i = 1; i < beats.size(); ++i) rr.push_back(beats[i] - beats[i - 1]);
  for (double v : rr) f.rr_mean += v;
  f.rr_mean /= static_cast<double>(rr.size());
  for (double v : rr) f.rr_std += (v - f.rr_mean) * (v - f.rr_mean);
  f.rr_std = std::sqrt(f.rr_std / static_cast<double>(rr.size()));

  // Baseline: middle 40% of every inter-beat interval.
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 1; i < beats.size(); ++i) {
    const double a = beats[i - 1] + 0.3 * rr[i - 1];
    const double b = beats[i - 1] + 0.7 * rr[i - 1];
    const auto lo = static_cast<std::size_t>(std::ceil(a * rate));
    const auto hi = std::min(x.size(), static_cast<std::size_t>(std::floor(b * rate)) + 1);
    for (std::size_t k = lo; k < hi; ++k) {
      sum += x[k];
      ++count;
    }
  }
  f.st_deviation = count > 0 ? sum / static_cast<double>(count) : 0.0;

  double best = -1.0;
  for (double freq : scan_frequencies()) {
    const double m = spectral_magnitude(x, rate, freq);
    if (m > best) {
      best = m;
      f.dominant_freq = freq;
    }
  }
  return f;
}

enum class Diagnosis { Arrhythmia, Fibrillation, Ischemia, Normal };

inline std::string_view to_string(Diagnosis d) {
  switch (d) {
    case Diagnosis::Arrhythmia: return "arrhythmia";
    case Diagnosis::Fibrillation: return "fibrillation";
    case Diagnosis::Ischemia: return "ischemia";
    case Diagnosis::Normal: return "normal";
  }
  return "?";
}

struct Thresholds {
  double fibrillation_hz = 4.0;
  double ischemia_st = 0.15;
  double arrhythmia_cv = 0.12;  // rr_std / rr_mean
  bool operator==(const Thresholds&) const = default;
};

/// First matching rule wins: fibrillation, then ischemia, then arrhythmia.
inline Diagnosis estimate_disease(const Features& f, const Thresholds& th = {}) {
  if (f.dominant_freq > th.fibrillation_hz) return Diagnosis::Fibrillation;
  if (std::abs(f.st_deviation) > th.ischemia_st) return Diagnosis::Ischemia;
  if (f.rr_mean > 0 && f.rr_std / f.rr_mean > th.arrhythmia_cv) return Diagnosis::Arrhythmia;
  return Diagnosis::Normal;
}

/// Euclidean distance after scaling each field by the reference value;
/// reference fields below 1e-6 in magnitude are not scaled.
inline double feature_distance(const Features& candidate, const Features& reference) {
  auto term = [](double c, double r) {
    const double scale = std::abs(r) > 1e-6 ? std::abs(r) : 1.0;
    const double d = (c - r) / scale;
    return d * d;
  };
  return std::sqrt(term(candidate.rr_mean, reference.rr_mean) + term(candidate.rr_std, reference.rr_std) +
                   term(candidate.dominant_freq, reference.dominant_freq) +
                   term(candidate.st_deviation, reference.st_deviation));
}

}  // namespace hywm::ecg
