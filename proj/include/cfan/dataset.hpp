#pragma once

// Task-specific segmentation of parsed WFDB records into labeled fixed-length
// segments, stratified k-fold planning, and a binary segment cache so training
// never re-parses raw records.
//
// Segment recipes:
//   mitbih — one 257-sample window per annotated beat, [r-128, r+128] from
//            channel 0, labeled with the beat's AAMI EC57 class; beats within
//            128 samples of a record boundary are skipped.
//   ecgid  — R-peaks via Pan-Tompkins; 250-sample cycles (80 before, 170
//            after); the min(8, available) cycles closest (Euclidean) to the
//            record's average cycle are kept and mean-subtracted; label is the
//            person index.
//   apnea  — consecutive 6000-sample minutes aligned to the per-minute
//            annotations; minutes containing a signal-loss run longer than 50
//            samples are dropped; Savitzky-Golay(5,3) then z-score; label 1
//            for apnea minutes.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cfan/dsp.hpp"
#include "cfan/util.hpp"
#include "cfan/wfdb.hpp"

namespace cfan::dataset {

enum class Task : int { mitbih = 0, ecgid = 1, apnea = 2 };

inline const char* task_name(Task t) {
  static constexpr const char* names[] = {"mitbih", "ecgid", "apnea"};
  return names[int(t)];
}

inline Task task_from_name(const std::string& s) {
  for (Task t : {Task::mitbih, Task::ecgid, Task::apnea})
    if (s == task_name(t)) return t;
  fail("unknown task '%s' (expected mitbih, ecgid or apnea)", s.c_str());
}

inline int task_segment_length(Task t) {
  static constexpr int len[] = {257, 250, 6000};
  return len[int(t)];
}

// All segments of one task, flat sample storage (single channel).
struct SegmentSet {
  Task task = Task::mitbih;
  int length = 0;
  int n_classes = 0;
  std::vector<double> samples;  // [segment][length]
  std::vector<int> labels;
  std::vector<std::string> source_record;
  std::vector<int64_t> source_position;

  size_t size() const { return labels.size(); }

  std::span<const double> segment(size_t i) const {
    return {samples.data() + i * size_t(length), size_t(length)};
  }

  void push(std::span<const double> seg, int label, const std::string& record,
            int64_t position) {
    require(int(seg.size()) == length, "segment length mismatch");
    samples.insert(samples.end(), seg.begin(), seg.end());
    labels.push_back(label);
    source_record.push_back(record);
    source_position.push_back(position);
  }

  void append(const SegmentSet& other) {
    require(other.task == task && other.length == length, "incompatible segment sets");
    samples.insert(samples.end(), other.samples.begin(), other.samples.end());
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    source_record.insert(source_record.end(), other.source_record.begin(),
                         other.source_record.end());
    source_position.insert(source_position.end(), other.source_position.begin(),
                           other.source_position.end());
  }
};

// Ingestion diagnostics accumulated across records.
struct PrepareReport {
  long records = 0;
  std::vector<long> class_counts;
  long skipped_boundary = 0;              // mitbih: mapped beats without context
  std::map<char, long> unmapped_symbols;  // mitbih: annotations with no AAMI class
  long dropped_cycles = 0;                // ecgid: cycles beyond the closest 8
  long skipped_minutes = 0;               // apnea: minutes failing the loss rule
  std::vector<std::string> warnings;

  void count_class(int label) {
    if (int(class_counts.size()) <= label) class_counts.resize(size_t(label) + 1, 0);
    ++class_counts[size_t(label)];
  }
};

// ---- per-record segmentation ---------------------------------------------------

inline void segment_mitbih(const wfdb::Record& rec, const std::string& rec_name,
                           SegmentSet& out, PrepareReport& rep) {
  require(out.task == Task::mitbih && out.length == 257, "expected a mitbih set");
  require(!rec.signals.empty(), "record has no signals");
  const auto& x = rec.signals[0];
  const int64_t n = int64_t(x.size());

  for (const auto& a : rec.annotations) {
    const auto cls = wfdb::map_beat_to_aami(a.symbol_char);
    if (!cls) {
      ++rep.unmapped_symbols[a.symbol_char];
      continue;
    }
    const int64_t r = a.sample_index;
    if (r - 128 < 0 || r + 128 >= n) {
      ++rep.skipped_boundary;
      continue;
    }
    const int label = int(*cls);
    out.push({x.data() + (r - 128), 257}, label, rec_name, r);
    rep.count_class(label);
  }
  ++rep.records;
}

inline void segment_ecgid(const wfdb::Record& rec, const std::string& rec_name,
                          int person_label, SegmentSet& out, PrepareReport& rep) {
  require(out.task == Task::ecgid && out.length == 250, "expected an ecgid set");
  require(!rec.signals.empty(), "record has no signals");
  const auto& x = rec.signals[0];
  const int64_t n = int64_t(x.size());

  std::vector<int64_t> peaks;
  try {
    peaks = dsp::pan_tompkins_rpeaks(x, rec.header.sampling_frequency);
  } catch (const Error&) {
    peaks.clear();
  }

  // cycles with full context: 80 samples before the peak, 170 after
  std::vector<int64_t> anchors;
  for (int64_t p : peaks)
    if (p - 80 >= 0 && p + 170 <= n) anchors.push_back(p);

  if (anchors.empty()) {
    rep.warnings.push_back(rec_name + ": no usable cardiac cycles, record skipped");
    ++rep.records;
    return;
  }

  std::vector<double> average(250, 0.0);
  for (int64_t p : anchors)
    for (int i = 0; i < 250; ++i) average[size_t(i)] += x[size_t(p - 80 + i)];
  for (double& v : average) v /= double(anchors.size());

  // rank by Euclidean distance to the average cycle, ties broken by position
  std::vector<std::pair<double, size_t>> ranked;
  for (size_t c = 0; c < anchors.size(); ++c) {
    double d2 = 0.0;
    for (int i = 0; i < 250; ++i) {
      const double d = x[size_t(anchors[c] - 80 + i)] - average[size_t(i)];
      d2 += d * d;
    }
    ranked.emplace_back(d2, c);
  }
  std::sort(ranked.begin(), ranked.end());

  const size_t keep = std::min<size_t>(8, ranked.size());
  rep.dropped_cycles += long(ranked.size() - keep);
  std::vector<size_t> kept;
  for (size_t i = 0; i < keep; ++i) kept.push_back(ranked[i].second);
  std::sort(kept.begin(), kept.end());  // emit in time order

  for (size_t c : kept) {
    const int64_t p = anchors[c];
    auto seg = dsp::mean_subtract({x.data() + (p - 80), 250});
    out.push(seg, person_label, rec_name, p);
    rep.count_class(person_label);
  }
  ++rep.records;
}

namespace detail {

// ADC codes at the storage format's range limits count as saturated.
inline std::pair<int32_t, int32_t> adc_range(int storage_format) {
  if (storage_format == 212) return {-2048, 2047};
  return {-32768, 32767};
}

// True when the minute [start, start+6000) holds a run of more than 50
// identical or saturated samples (0.5 s of signal loss at 100 Hz).
inline bool minute_has_loss(std::span<const int32_t> adc, int64_t start,
                            std::pair<int32_t, int32_t> range) {
  auto saturated = [&](int32_t v) { return v == range.first || v == range.second; };
  long run_same = 1, run_sat = saturated(adc[size_t(start)]) ? 1 : 0;
  for (int64_t i = start + 1; i < start + 6000; ++i) {
    const int32_t cur = adc[size_t(i)], prev = adc[size_t(i - 1)];
    run_same = (cur == prev) ? run_same + 1 : 1;
    run_sat = saturated(cur) ? run_sat + 1 : 0;
    if (run_same > 50 || run_sat > 50) return true;
  }
  return false;
}

}  // namespace detail

inline void segment_apnea(const wfdb::Record& rec, const std::string& rec_name,
                          SegmentSet& out, PrepareReport& rep) {
  require(out.task == Task::apnea && out.length == 6000, "expected an apnea set");
  require(!rec.signals.empty(), "record has no signals");
  const auto& x = rec.signals[0];
  const auto& adc = rec.adc[0];
  const int64_t n = int64_t(x.size());
  const auto range = detail::adc_range(rec.header.signals[0].storage_format);

  for (const auto& a : rec.annotations) {
    const bool apnea = a.symbol_char == 'A';
    if (!apnea && a.symbol_char != 'N') continue;  // not a per-minute label
    const int64_t start = a.sample_index;
    if (start < 0 || start + 6000 > n) continue;  // trailing partial minute

    if (detail::minute_has_loss(adc, start, range)) {
      ++rep.skipped_minutes;
      continue;
    }
    auto smooth = dsp::savitzky_golay({x.data() + start, 6000}, 5, 3);
    auto seg = dsp::zscore(smooth);
    const int label = apnea ? 1 : 0;
    out.push(seg, label, rec_name, start);
    rep.count_class(label);
  }
  ++rep.records;
}

// ---- corpus preparation ----------------------------------------------------------

struct Prepared {
  SegmentSet set;
  PrepareReport report;
};

namespace detail {

inline std::vector<std::string> sorted_record_names(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> names;
  if (!fs::is_directory(dir)) fail("not a directory: %s", dir.string().c_str());
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".hea")
      names.push_back(e.path().stem().string());
  std::sort(names.begin(), names.end());
  if (names.empty()) fail("no .hea records under %s", dir.string().c_str());
  return names;
}

}  // namespace detail

inline Prepared prepare_mitbih(const std::filesystem::path& dir) {
  Prepared p;
  p.set.task = Task::mitbih;
  p.set.length = 257;
  p.set.n_classes = wfdb::kAamiClassCount;
  p.report.class_counts.resize(size_t(wfdb::kAamiClassCount), 0);
  for (const auto& name : detail::sorted_record_names(dir))
    segment_mitbih(wfdb::read_record(dir, name, "atr"), name, p.set, p.report);
  return p;
}

inline Prepared prepare_ecgid(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> persons;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && e.path().filename().string().starts_with("Person_"))
      persons.push_back(e.path().filename().string());
  std::sort(persons.begin(), persons.end());
  if (persons.empty()) fail("no Person_* directories under %s", dir.string().c_str());

  Prepared p;
  p.set.task = Task::ecgid;
  p.set.length = 250;
  p.set.n_classes = int(persons.size());
  p.report.class_counts.resize(persons.size(), 0);
  for (size_t label = 0; label < persons.size(); ++label) {
    const fs::path pdir = dir / persons[label];
    for (const auto& name : detail::sorted_record_names(pdir))
      segment_ecgid(wfdb::read_record(pdir, name, "atr"), persons[label] + "/" + name,
                    int(label), p.set, p.report);
  }
  return p;
}

inline Prepared prepare_apnea(const std::filesystem::path& dir) {
  Prepared p;
  p.set.task = Task::apnea;
  p.set.length = 6000;
  p.set.n_classes = 2;
  p.report.class_counts.resize(2, 0);
  for (const auto& name : detail::sorted_record_names(dir)) {
    // only the released training group carries labels; the withheld-group
    // records (x01..x35) are out of scope
    if (name.starts_with("x")) continue;
    if (!std::filesystem::exists(dir / (name + ".apn"))) {
      p.report.warnings.push_back(name + ": no .apn annotations, record skipped");
      continue;
    }
    segment_apnea(wfdb::read_record(dir, name, "apn"), name, p.set, p.report);
  }
  return p;
}

inline Prepared prepare_task(Task t, const std::filesystem::path& dir) {
  switch (t) {
    case Task::mitbih: return prepare_mitbih(dir);
    case Task::ecgid: return prepare_ecgid(dir);
    case Task::apnea: return prepare_apnea(dir);
  }
  fail("bad task enum %d", int(t));
}

// ---- stratified folds --------------------------------------------------------------

struct FoldPlan {
  int k = 0;
  uint64_t seed = 0;
  std::vector<int> assignments;  // segment index -> fold id
  // Per-class seeded shuffle orders; make_split consumes these so the
  // validation/test halves follow the same shuffle the folds were dealt from.
  std::vector<std::vector<size_t>> class_order;
};

inline FoldPlan stratified_kfold(std::span<const int> labels, int k, uint64_t seed,
                                 std::vector<std::string>* warnings = nullptr) {
  if (k < 2) fail("stratified_kfold: k must be at least 2, got %d", k);
  require(!labels.empty(), "stratified_kfold: no segments");

  int n_classes = 0;
  for (int l : labels) {
    require(l >= 0, "stratified_kfold: negative label");
    n_classes = std::max(n_classes, l + 1);
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(labels.size(), -1);
  plan.class_order.resize(size_t(n_classes));

  for (int c = 0; c < n_classes; ++c) {
    auto& order = plan.class_order[size_t(c)];
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) order.push_back(i);
    if (order.empty()) continue;
    if (int(order.size()) < k && warnings)
      warnings->push_back("class " + std::to_string(c) + " has only " +
                          std::to_string(order.size()) + " segments for " +
                          std::to_string(k) + " folds");
    Rng rng(mix_seed(seed, uint64_t(c)));
    rng.shuffle(order);
    for (size_t i = 0; i < order.size(); ++i)
      plan.assignments[order[i]] = int(i % size_t(k));
  }
  return plan;
}

struct SplitTriple {
  std::vector<size_t> train;
  std::vector<size_t> validation;
  std::vector<size_t> test;
};

// Train = all other folds. The held-out fold is halved class by class along
// the fold shuffle: even positions to validation, odd to test. Classes with an
// odd member count alternate which half receives the extra segment so the
// global |validation| - |test| difference never exceeds 1.
inline SplitTriple make_split(const FoldPlan& plan, int held_out) {
  if (held_out < 0 || held_out >= plan.k)
    fail("make_split: fold %d out of range (k=%d)", held_out, plan.k);

  SplitTriple s;
  for (size_t i = 0; i < plan.assignments.size(); ++i)
    if (plan.assignments[i] != held_out) s.train.push_back(i);

  bool extra_to_test = false;
  for (const auto& order : plan.class_order) {
    std::vector<size_t> members;
    for (size_t idx : order)
      if (plan.assignments[idx] == held_out) members.push_back(idx);
    if (members.empty()) continue;

    const bool flip = (members.size() % 2 == 1) && extra_to_test;
    for (size_t pos = 0; pos < members.size(); ++pos) {
      const bool to_validation = (pos % 2 == 0) != flip;
      (to_validation ? s.validation : s.test).push_back(members[pos]);
    }
    if (members.size() % 2 == 1) extra_to_test = !extra_to_test;
  }
  return s;
}

// ---- binary segment cache ----------------------------------------------------------
//
// Little-endian layout (see docs/formats.md):
//   magic "CFSEG01\n" | u32 task | u32 n_segments | u32 channels | u32 length |
//   u32 n_classes | record-name table (u32 count, then u32 len + bytes each) |
//   per segment u32 label, u32 name index, u64 position | f32 samples.

inline constexpr char kCacheMagic[] = "CFSEG01\n";

inline void save_cache(const SegmentSet& set, const std::filesystem::path& path) {
  std::string out;
  out.append(kCacheMagic, 8);
  put_u32(out, uint32_t(int(set.task)));
  put_u32(out, uint32_t(set.size()));
  put_u32(out, 1);  // channels
  put_u32(out, uint32_t(set.length));
  put_u32(out, uint32_t(set.n_classes));

  std::vector<std::string> names;
  std::map<std::string, uint32_t> name_index;
  for (const auto& r : set.source_record)
    if (name_index.emplace(r, uint32_t(names.size())).second) names.push_back(r);
  put_u32(out, uint32_t(names.size()));
  for (const auto& n : names) {
    put_u32(out, uint32_t(n.size()));
    out += n;
  }

  for (size_t i = 0; i < set.size(); ++i) {
    put_u32(out, uint32_t(set.labels[i]));
    put_u32(out, name_index.at(set.source_record[i]));
    put_u64(out, uint64_t(set.source_position[i]));
  }
  for (double v : set.samples) put_f32(out, float(v));
  write_file_atomic(path, out);
}

inline SegmentSet load_cache(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  ByteReader r(data);
  if (r.bytes(8) != std::string(kCacheMagic, 8))
    fail("%s is not a segment cache (bad magic)", path.string().c_str());

  SegmentSet set;
  const uint32_t task = r.u32();
  require(task <= 2, "segment cache: bad task id");
  set.task = Task(int(task));
  const uint32_t count = r.u32();
  const uint32_t channels = r.u32();
  require(channels == 1, "segment cache: expected single-channel segments");
  set.length = int(r.u32());
  require(set.length == task_segment_length(set.task),
          "segment cache: length does not match its task");
  set.n_classes = int(r.u32());

  std::vector<std::string> names(r.u32());
  for (auto& n : names) n = r.bytes(r.u32());

  set.labels.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const int label = int(r.u32());
    require(label < set.n_classes, "segment cache: label out of range");
    set.labels.push_back(label);
    const uint32_t ni = r.u32();
    require(ni < names.size(), "segment cache: bad record reference");
    set.source_record.push_back(names[ni]);
    set.source_position.push_back(int64_t(r.u64()));
  }
  set.samples.reserve(size_t(count) * size_t(set.length));
  for (size_t i = 0; i < size_t(count) * size_t(set.length); ++i)
    set.samples.push_back(double(r.f32()));
  require(r.remaining() == 0, "segment cache: trailing bytes");
  return set;
}

}  // namespace cfan::dataset
