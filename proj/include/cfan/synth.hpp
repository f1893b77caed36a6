#pragma once
// Seeded synthetic WFDB corpora shaped like the three study datasets. Used by
// the pipeline tests and the `synth` CLI command so the full prepare/train/
// report chain can run without clinical data. Waveforms are cartoon ECGs:
// raised-cosine beat pulses over baseline wander plus noise.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cfan/util.hpp"
#include "cfan/wfdb.hpp"
#include "cfan/wfdb_write.hpp"

namespace cfan::synth {

namespace detail {

inline int code_from_char(char c) {
  for (int code = 1; code <= 41; ++code)
    if (wfdb::detail::code_char(code) == c) return code;
  throw Error(std::string("no annotation code for symbol '") + c + "'");
}

inline wfdb::Annotation make_ann(char symbol, int64_t sample) {
  wfdb::Annotation a;
  a.sample_index = sample;
  a.symbol_code = code_from_char(symbol);
  a.symbol_char = symbol;
  return a;
}

inline void write_record(const std::filesystem::path& dir, const std::string& name,
                         const std::vector<std::vector<int32_t>>& adc, double fs, int fmt,
                         const std::vector<wfdb::Annotation>& anns,
                         const std::string& ann_ext) {
  wfdb::RecordHeader hdr;
  hdr.record_name = name;
  hdr.n_signals = int(adc.size());
  hdr.sampling_frequency = fs;
  hdr.n_samples = int64_t(adc[0].size());
  for (size_t c = 0; c < adc.size(); ++c) {
    wfdb::SignalInfo si;
    si.filename = name + ".dat";
    si.storage_format = fmt;
    si.adc_gain = 200.0;
    si.description = "ch" + std::to_string(c);
    hdr.signals.push_back(si);
  }
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / (name + ".hea"), wfdb::format_header(hdr));
  write_file_atomic(dir / (name + ".dat"), fmt == 212 ? wfdb::encode_signal_212(adc)
                                                      : wfdb::encode_signal_16(adc));
  if (!anns.empty())
    write_file_atomic(dir / (name + "." + ann_ext), wfdb::encode_annotations(anns));
}

// Raised-cosine-squared bump centered at `center`, half-width `hw` samples.
inline void add_pulse(std::vector<double>& x, int64_t center, int hw, double amplitude) {
  for (int64_t t = center - hw; t <= center + hw; ++t) {
    if (t < 0 || t >= int64_t(x.size())) continue;
    const double phase = double(t - center) / double(hw);
    const double c = std::cos(0.5 * M_PI * phase);
    x[size_t(t)] += amplitude * c * c;
  }
}

inline std::vector<int32_t> to_adc(const std::vector<double>& mv, double gain = 200.0) {
  std::vector<int32_t> adc(mv.size());
  for (size_t i = 0; i < mv.size(); ++i) adc[i] = int32_t(std::lround(mv[i] * gain));
  return adc;
}

}  // namespace detail

// ---- MIT-BIH-like corpus -----------------------------------------------------------

struct MitbihOptions {
  int records = 4;
  int beats_per_record = 80;
  uint64_t seed = 1;
};

// Records "100", "101", ... at 360 Hz, format 212, two channels, with an atr
// annotation per beat. The five AAMI classes appear with N dominant, and the
// beat morphology depends on the class so classifiers have signal to learn.
inline void make_mitbih(const std::filesystem::path& dir, const MitbihOptions& opts = {}) {
  require(opts.records >= 1 && opts.beats_per_record >= 1, "make_mitbih: bad options");
  const double fs = 360.0;
  const int hw = int(std::lround(0.014 * fs));  // QRS half-width
  // class-dependent morphology: {symbol, amplitude, width multiplier, t-bump}
  struct Beat {
    char symbol;
    double amp;
    int width;
    double t_bump;
  };
  const Beat kinds[] = {{'N', 1.6, 1, 0.25},   // normal
                        {'A', 1.2, 1, 0.05},   // atrial premature -> S
                        {'V', 2.2, 3, -0.35},  // ventricular -> V
                        {'F', 1.9, 2, 0.10},   // fusion -> F
                        {'/', 1.4, 4, 0.0}};   // paced -> Q
  // N-heavy mix resembling the class imbalance of the source data
  const int pattern[] = {0, 0, 0, 0, 1, 0, 0, 2, 0, 0, 0, 3, 0, 0, 2, 4};

  for (int r = 0; r < opts.records; ++r) {
    Rng rng(mix_seed(opts.seed, uint64_t(r)));
    const int period = 270;  // ~0.75 s between beats
    const int64_t n = int64_t(opts.beats_per_record + 2) * period;
    std::vector<double> ch0(size_t(n), 0.0), ch1(size_t(n), 0.0);
    for (int64_t t = 0; t < n; ++t) {
      const double wander = 0.10 * std::sin(2.0 * M_PI * 0.33 * double(t) / fs);
      ch0[size_t(t)] = wander + 0.02 * rng.uniform(-1.0, 1.0);
      ch1[size_t(t)] = -0.5 * wander + 0.02 * rng.uniform(-1.0, 1.0);
    }
    std::vector<wfdb::Annotation> anns;
    for (int b = 0; b < opts.beats_per_record; ++b) {
      const Beat& kind = kinds[pattern[size_t(b) % std::size(pattern)]];
      const int64_t center = int64_t(b + 1) * period + int64_t(rng.below(21)) - 10;
      detail::add_pulse(ch0, center, hw * kind.width, kind.amp);
      detail::add_pulse(ch0, center + 2 * period / 5, 3 * hw, kind.t_bump);
      detail::add_pulse(ch1, center, hw * kind.width, 0.6 * kind.amp);
      anns.push_back(detail::make_ann(kind.symbol, center));
    }
    detail::write_record(dir, std::to_string(100 + r),
                         {detail::to_adc(ch0), detail::to_adc(ch1)}, fs, 212, anns, "atr");
  }
}

// ---- ECG-ID-like corpus ------------------------------------------------------------

struct EcgidOptions {
  int persons = 6;
  int records_per_person = 2;
  int beats_per_record = 24;
  uint64_t seed = 2;
};

// Person_01/rec_1 ... at 500 Hz, format 16, no annotations (cycles come from
// the QRS detector). Each person gets a signature morphology.
inline void make_ecgid(const std::filesystem::path& dir, const EcgidOptions& opts = {}) {
  require(opts.persons >= 1 && opts.records_per_person >= 1 && opts.beats_per_record >= 1,
          "make_ecgid: bad options");
  const double fs = 500.0;
  const int hw = int(std::lround(0.014 * fs));

  for (int p = 0; p < opts.persons; ++p) {
    Rng person_rng(mix_seed(opts.seed, uint64_t(p)));
    // per-person signature, fixed across that person's records
    const double r_amp = 1.3 + 0.5 * person_rng.uniform();
    const double t_amp = 0.1 + 0.25 * person_rng.uniform();
    const int t_offset = 80 + int(person_rng.below(61));
    const double p_amp = 0.05 + 0.15 * person_rng.uniform();

    char name[32];
    std::snprintf(name, sizeof name, "Person_%02d", p + 1);
    for (int r = 0; r < opts.records_per_person; ++r) {
      Rng rng(mix_seed(opts.seed, uint64_t(p) * 1000 + uint64_t(r) + 1));
      const int period = 400;  // ~0.8 s
      const int64_t n = int64_t(opts.beats_per_record + 2) * period;
      std::vector<double> x(size_t(n), 0.0);
      for (int64_t t = 0; t < n; ++t)
        x[size_t(t)] = 0.08 * std::sin(2.0 * M_PI * 0.25 * double(t) / fs) +
                       0.02 * rng.uniform(-1.0, 1.0);
      for (int b = 0; b < opts.beats_per_record; ++b) {
        const int64_t center = int64_t(b + 1) * period + int64_t(rng.below(15)) - 7;
        detail::add_pulse(x, center - 60, 3 * hw, p_amp);
        detail::add_pulse(x, center, hw, r_amp);
        detail::add_pulse(x, center + t_offset, 4 * hw, t_amp);
      }
      detail::write_record(dir / name, "rec_" + std::to_string(r + 1), {detail::to_adc(x)},
                           fs, 16, {}, "atr");
    }
  }
}

// ---- Apnea-ECG-like corpus ---------------------------------------------------------

struct ApneaOptions {
  int records = 3;
  int minutes_per_record = 16;
  bool include_x_record = true;  // withheld-style record the pipeline must skip
  uint64_t seed = 3;
};

// Records "a01", "a02", ... at 100 Hz, format 16, with an apn annotation at
// the start of every minute. Apnea minutes carry a slow amplitude envelope.
inline void make_apnea(const std::filesystem::path& dir, const ApneaOptions& opts = {}) {
  require(opts.records >= 1 && opts.minutes_per_record >= 2, "make_apnea: bad options");
  const double fs = 100.0;
  const int64_t minute = 6000;

  auto write_one = [&](const std::string& name, uint64_t record_seed) {
    Rng rng(record_seed);
    const int64_t n = minute * opts.minutes_per_record;
    std::vector<double> x(size_t(n), 0.0);
    std::vector<wfdb::Annotation> anns;
    for (int m = 0; m < opts.minutes_per_record; ++m) {
      // roughly 40% apnea minutes, at least one of each class per record
      bool apneic = rng.below(5) < 2;
      if (m == 0) apneic = false;
      if (m == 1) apneic = true;
      for (int64_t i = 0; i < minute; ++i) {
        const int64_t t = int64_t(m) * minute + i;
        const double sec = double(t) / fs;
        double v;
        if (apneic)
          v = 0.7 * std::sin(2.0 * M_PI * 0.7 * sec) *
              (1.0 + 0.8 * std::sin(2.0 * M_PI * 0.033 * sec));
        else
          v = 0.5 * std::sin(2.0 * M_PI * 1.1 * sec);
        x[size_t(t)] = v + 0.05 * rng.uniform(-1.0, 1.0);
      }
      anns.push_back(detail::make_ann(apneic ? 'A' : 'N', int64_t(m) * minute));
    }
    detail::write_record(dir, name, {detail::to_adc(x)}, fs, 16, anns, "apn");
  };

  for (int r = 0; r < opts.records; ++r) {
    char name[16];
    std::snprintf(name, sizeof name, "a%02d", r + 1);
    write_one(name, mix_seed(opts.seed, uint64_t(r)));
  }
  if (opts.include_x_record) write_one("x01", mix_seed(opts.seed, 999));
}

// ---- one-call corpus ---------------------------------------------------------------

// Writes root/mitbih, root/ecgid and root/apnea.
inline void make_all(const std::filesystem::path& root, uint64_t seed = 1) {
  MitbihOptions m;
  m.seed = mix_seed(seed, 10);
  make_mitbih(root / "mitbih", m);
  EcgidOptions e;
  e.seed = mix_seed(seed, 20);
  make_ecgid(root / "ecgid", e);
  ApneaOptions a;
  a.seed = mix_seed(seed, 30);
  make_apnea(root / "apnea", a);
}

}  // namespace cfan::synth
