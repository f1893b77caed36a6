#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include "cfan/dataset.hpp"
#include "cfan/wfdb_write.hpp"

namespace fs = std::filesystem;
using namespace cfan;
using dataset::Task;

namespace {

wfdb::Record make_record(std::vector<std::vector<int32_t>> adc, double fs,
                         std::vector<wfdb::Annotation> anns = {}, int fmt = 16,
                         double gain = 200.0) {
  wfdb::Record rec;
  rec.header.record_name = "mem";
  rec.header.n_signals = int(adc.size());
  rec.header.sampling_frequency = fs;
  rec.header.n_samples = int64_t(adc[0].size());
  for (size_t c = 0; c < adc.size(); ++c) {
    wfdb::SignalInfo si;
    si.filename = "mem.dat";
    si.storage_format = fmt;
    si.adc_gain = gain;
    si.description = "ch" + std::to_string(c);
    rec.header.signals.push_back(si);
  }
  rec.adc = std::move(adc);
  rec.signals = wfdb::to_physical(rec.header, rec.adc);
  rec.annotations = std::move(anns);
  return rec;
}

wfdb::Annotation ann(char symbol, int64_t sample) {
  wfdb::Annotation a;
  a.sample_index = sample;
  a.symbol_char = symbol;
  for (int code = 1; code <= 49; ++code)
    if (wfdb::detail::code_char(code) == symbol) a.symbol_code = code;
  return a;
}

dataset::SegmentSet empty_set(Task t, int n_classes) {
  dataset::SegmentSet s;
  s.task = t;
  s.length = dataset::task_segment_length(t);
  s.n_classes = n_classes;
  return s;
}

// Sharp cardiac-like pulse train: raised-cosine-squared R waves (14 ms
// half-width) on slow baseline wander, detectable by pan_tompkins_rpeaks.
std::vector<double> pulse_train(double fs, double seconds,
                                const std::vector<int64_t>& beats,
                                const std::vector<double>& amplitudes) {
  const auto n = int64_t(std::llround(fs * seconds));
  const auto w = int64_t(std::lround(0.014 * fs));
  std::vector<double> x(size_t(n), 0.0);
  for (int64_t i = 0; i < n; ++i)
    x[size_t(i)] = 0.10 * std::sin(2.0 * M_PI * 0.33 * double(i) / fs);
  for (size_t b = 0; b < beats.size(); ++b)
    for (int64_t j = -w; j <= w; ++j) {
      const int64_t i = beats[b] + j;
      if (i < 0 || i >= n) continue;
      const double c = std::cos(0.5 * M_PI * double(j) / double(w));
      x[size_t(i)] += amplitudes[b] * c * c;
    }
  return x;
}

std::vector<int32_t> to_adc(const std::vector<double>& x, double gain = 200.0) {
  std::vector<int32_t> a(x.size());
  for (size_t i = 0; i < x.size(); ++i) a[i] = int32_t(std::lround(x[i] * gain));
  return a;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("cfan_dataset_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_record_files(const fs::path& dir, const std::string& name,
                        const std::vector<std::vector<int32_t>>& adc, double fs,
                        int fmt, const std::vector<wfdb::Annotation>& anns,
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
  fs::create_directories(dir);
  write_file_atomic(dir / (name + ".hea"), wfdb::format_header(hdr));
  write_file_atomic(dir / (name + ".dat"), fmt == 212 ? wfdb::encode_signal_212(adc)
                                                      : wfdb::encode_signal_16(adc));
  if (!anns.empty())
    write_file_atomic(dir / (name + "." + ann_ext), wfdb::encode_annotations(anns));
}

}  // namespace

TEST_CASE("mitbih segmentation windows beats and maps AAMI labels") {
  const int64_t n = 10000;
  std::vector<int32_t> ramp(static_cast<size_t>(n));
  std::iota(ramp.begin(), ramp.end(), 0);
  auto rec = make_record({ramp}, 360.0,
                         {ann('V', 100),    // too close to the start
                          ann('N', 5000),   // kept, class N
                          ann('+', 5500),   // rhythm annotation, no AAMI class
                          ann('L', 6000),   // kept, maps to N
                          ann('V', 7000),   // kept, class V
                          ann('A', 9900)}); // too close to the end

  auto set = empty_set(Task::mitbih, 5);
  dataset::PrepareReport rep;
  dataset::segment_mitbih(rec, "100", set, rep);

  REQUIRE(set.size() == 3);
  CHECK(set.labels == std::vector<int>{0, 0, 2});
  CHECK(rep.skipped_boundary == 2);
  CHECK(rep.unmapped_symbols.at('+') == 1);
  CHECK(rep.class_counts[0] == 2);
  CHECK(rep.class_counts[2] == 1);
  CHECK(rep.records == 1);

  // the window around the beat at 5000 spans samples 4872..5128 of channel 0
  auto seg = set.segment(0);
  REQUIRE(seg.size() == 257);
  CHECK(seg[0] == rec.signals[0][4872]);
  CHECK(seg[128] == rec.signals[0][5000]);
  CHECK(seg[256] == rec.signals[0][5128]);
  CHECK(set.source_record[0] == "100");
  CHECK(set.source_position[0] == 5000);
  CHECK(set.source_position[2] == 7000);

  // a beat exactly 128 samples from each boundary still has full context
  auto rec2 = make_record({ramp}, 360.0, {ann('N', 128), ann('N', n - 129)});
  auto set2 = empty_set(Task::mitbih, 5);
  dataset::PrepareReport rep2;
  dataset::segment_mitbih(rec2, "101", set2, rep2);
  CHECK(set2.size() == 2);
  CHECK(rep2.skipped_boundary == 0);
  CHECK(set2.segment(0)[0] == rec2.signals[0][0]);
  CHECK(set2.segment(1)[256] == rec2.signals[0][size_t(n - 1)]);
}

TEST_CASE("mitbih segmentation is deterministic") {
  std::vector<int32_t> ramp(9000);
  std::iota(ramp.begin(), ramp.end(), -500);
  auto rec = make_record({ramp}, 360.0, {ann('N', 1000), ann('V', 4000)});
  auto a = empty_set(Task::mitbih, 5);
  auto b = empty_set(Task::mitbih, 5);
  dataset::PrepareReport ra, rb;
  dataset::segment_mitbih(rec, "100", a, ra);
  dataset::segment_mitbih(rec, "100", b, rb);
  CHECK(a.samples == b.samples);
  CHECK(a.labels == b.labels);
}

TEST_CASE("ecgid segmentation keeps the 8 cycles closest to the average") {
  const double fs = 500.0;
  std::vector<int64_t> beats;
  for (int i = 0; i < 23; ++i) beats.push_back(500 + 400 * int64_t(i));
  std::vector<double> amp(beats.size(), 1.0);
  auto x = pulse_train(fs, 20.0, beats, amp);

  // deform two beats with a wide side bump so their cycles sit far from the
  // average cycle and get dropped by the distance rank
  for (size_t bad : {size_t(5), size_t(15)})
    for (int64_t j = 20; j <= 60; ++j)
      x[size_t(beats[bad] + j)] += 0.8 * (1.0 - std::abs(double(j) - 40.0) / 20.0);

  auto rec = make_record({to_adc(x)}, fs);
  auto set = empty_set(Task::ecgid, 3);
  dataset::PrepareReport rep;
  dataset::segment_ecgid(rec, "Person_02/rec_1", 2, set, rep);

  REQUIRE(set.size() == 8);
  CHECK(rep.dropped_cycles >= 2);
  for (size_t i = 0; i < set.size(); ++i) {
    auto seg = set.segment(i);
    REQUIRE(seg.size() == 250);
    CHECK(set.labels[i] == 2);
    CHECK(set.source_record[i] == "Person_02/rec_1");

    // mean_subtract postcondition
    double m = 0.0;
    for (double v : seg) m += v;
    CHECK(std::abs(m / 250.0) < 1e-12);

    // the detected R peak sits at index 80 of the cycle
    size_t peak = 0;
    for (size_t j = 0; j < seg.size(); ++j)
      if (seg[j] > seg[peak]) peak = j;
    CHECK(std::abs(int(peak) - 80) <= 10);

    // deformed beats must not survive the selection
    for (size_t bad : {size_t(5), size_t(15)})
      CHECK(std::abs(set.source_position[i] - beats[bad]) > 15);
  }

  // kept cycles are emitted in time order
  for (size_t i = 1; i < set.size(); ++i)
    CHECK(set.source_position[i] > set.source_position[i - 1]);
}

TEST_CASE("ecgid segmentation with fewer than 8 cycles keeps them all") {
  const double fs = 500.0;
  std::vector<int64_t> beats{500, 900, 1300, 1700, 2100};
  auto x = pulse_train(fs, 10.0, beats, std::vector<double>(beats.size(), 1.0));
  auto rec = make_record({to_adc(x)}, fs);
  auto set = empty_set(Task::ecgid, 1);
  dataset::PrepareReport rep;
  dataset::segment_ecgid(rec, "Person_01/rec_1", 0, set, rep);
  CHECK(set.size() == 5);
  CHECK(rep.dropped_cycles == 0);
  CHECK(rep.warnings.empty());
}

TEST_CASE("ecgid segmentation skips a record without usable cycles") {
  auto rec = make_record({std::vector<int32_t>(10000, 7)}, 500.0);
  auto set = empty_set(Task::ecgid, 1);
  dataset::PrepareReport rep;
  dataset::segment_ecgid(rec, "Person_03/rec_2", 0, set, rep);
  CHECK(set.size() == 0);
  REQUIRE(rep.warnings.size() == 1);
  CHECK(rep.warnings[0].find("Person_03/rec_2") != std::string::npos);
  CHECK(rep.records == 1);
}

TEST_CASE("apnea segmentation labels minutes and applies the loss rule") {
  const int64_t n = 5 * 6000 + 3000;
  std::vector<int32_t> adc(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    adc[size_t(i)] = int32_t(std::lround(100.0 * std::sin(2.0 * M_PI * double(i) / 50.0) +
                                         20.0 * std::sin(2.0 * M_PI * double(i) / 6000.0)));

  // minute 1 carries a run of exactly 50 identical samples: still acceptable
  for (int64_t i = 7000; i < 7050; ++i) adc[size_t(i)] = 42;
  // minute 2 carries a 60-sample constant run: signal loss
  for (int64_t i = 13000; i < 13060; ++i) adc[size_t(i)] = 5;
  // minute 4 carries a 60-sample saturated run that never repeats a value
  for (int64_t i = 25000; i < 25060; ++i)
    adc[size_t(i)] = (i % 2 == 0) ? -32768 : 32767;

  auto rec = make_record({adc}, 100.0,
                         {ann('A', 0), ann('N', 6000), ann('A', 12000), ann('N', 18000),
                          ann('A', 24000), ann('N', 30000)});  // 30000: partial minute

  auto set = empty_set(Task::apnea, 2);
  dataset::PrepareReport rep;
  dataset::segment_apnea(rec, "a01", set, rep);

  REQUIRE(set.size() == 3);
  CHECK(set.labels == std::vector<int>{1, 0, 0});
  CHECK(set.source_position == std::vector<int64_t>{0, 6000, 18000});
  CHECK(rep.skipped_minutes == 2);
  CHECK(rep.class_counts == std::vector<long>{2, 1});

  // zscore postcondition: zero mean, unit population standard deviation
  for (size_t i = 0; i < set.size(); ++i) {
    auto seg = set.segment(i);
    REQUIRE(seg.size() == 6000);
    double m = 0.0;
    for (double v : seg) m += v;
    m /= double(seg.size());
    double ss = 0.0;
    for (double v : seg) ss += (v - m) * (v - m);
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(std::sqrt(ss / double(seg.size())) - 1.0) < 1e-9);
  }

  // smoothing ran before normalization: the segment differs from a plain
  // zscore of the raw minute
  auto raw = dsp::zscore(std::span<const double>(rec.signals[0].data(), 6000));
  double diff = 0.0;
  for (size_t j = 0; j < 6000; ++j) diff = std::max(diff, std::abs(raw[j] - set.segment(0)[j]));
  CHECK(diff > 1e-6);
}

TEST_CASE("apnea segmentation ignores non-label annotations") {
  std::vector<int32_t> adc(12000);
  for (size_t i = 0; i < adc.size(); ++i)
    adc[i] = int32_t(std::lround(50.0 * std::sin(0.13 * double(i))));
  auto rec = make_record({adc}, 100.0, {ann('A', 0), ann('+', 3000), ann('N', 6000)});
  auto set = empty_set(Task::apnea, 2);
  dataset::PrepareReport rep;
  dataset::segment_apnea(rec, "a02", set, rep);
  CHECK(set.size() == 2);
  CHECK(set.labels == std::vector<int>{1, 0});
}

TEST_CASE("stratified k-fold deals each class round-robin") {
  SECTION("balanced classes divide evenly") {
    std::vector<int> labels;
    for (int c = 0; c < 5; ++c)
      for (int i = 0; i < 10; ++i) labels.push_back(c);
    auto plan = dataset::stratified_kfold(labels, 5, 77);
    REQUIRE(plan.assignments.size() == labels.size());
    long cell[5][5] = {};
    for (size_t i = 0; i < labels.size(); ++i) {
      REQUIRE(plan.assignments[i] >= 0);
      REQUIRE(plan.assignments[i] < 5);
      ++cell[labels[i]][plan.assignments[i]];
    }
    for (auto& row : cell)
      for (long v : row) CHECK(v == 2);
  }

  SECTION("six segments, two classes, three folds") {
    std::vector<int> labels{0, 0, 0, 1, 1, 1};
    auto plan = dataset::stratified_kfold(labels, 3, 1);
    for (int f = 0; f < 3; ++f) {
      int n0 = 0, n1 = 0;
      for (size_t i = 0; i < labels.size(); ++i)
        if (plan.assignments[i] == f) (labels[i] == 0 ? n0 : n1)++;
      CHECK(n0 == 1);
      CHECK(n1 == 1);
    }
  }

  SECTION("deterministic in the seed") {
    std::vector<int> labels(50);
    for (size_t i = 0; i < labels.size(); ++i) labels[i] = int(i % 3);
    auto a = dataset::stratified_kfold(labels, 4, 123);
    auto b = dataset::stratified_kfold(labels, 4, 123);
    auto c = dataset::stratified_kfold(labels, 4, 124);
    CHECK(a.assignments == b.assignments);
    CHECK(a.assignments != c.assignments);
  }

  SECTION("a class smaller than k is assigned with a warning") {
    std::vector<int> labels(10, 0);
    labels.push_back(1);
    labels.push_back(1);
    std::vector<std::string> warnings;
    auto plan = dataset::stratified_kfold(labels, 5, 9, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("class 1") != std::string::npos);
    CHECK(plan.assignments[10] != plan.assignments[11]);  // round-robin spreads them
    for (int a : plan.assignments) CHECK(a >= 0);
  }

  SECTION("per-class fold sizes never differ by more than one") {
    Rng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
      const int k = 2 + int(rng.below(6));
      const int n_classes = 1 + int(rng.below(5));
      std::vector<int> labels;
      for (int i = 0, n = 30 + int(rng.below(100)); i < n; ++i)
        labels.push_back(int(rng.below(uint64_t(n_classes))));
      auto plan = dataset::stratified_kfold(labels, k, rng.next_u64());
      for (int c = 0; c < n_classes; ++c) {
        std::vector<long> per_fold(size_t(k), 0);
        for (size_t i = 0; i < labels.size(); ++i)
          if (labels[i] == c) ++per_fold[size_t(plan.assignments[i])];
        const auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
        CHECK(*hi - *lo <= 1);
      }
    }
  }

  SECTION("k below 2 is rejected") {
    std::vector<int> labels{0, 1};
    CHECK_THROWS_AS(dataset::stratified_kfold(labels, 1, 0), Error);
    CHECK_THROWS_AS(dataset::stratified_kfold(labels, 0, 0), Error);
  }
}

TEST_CASE("make_split halves the held-out fold per class") {
  SECTION("100 balanced segments in 10 folds give a 90/5/5 split") {
    std::vector<int> labels;
    for (int c = 0; c < 10; ++c)
      for (int i = 0; i < 10; ++i) labels.push_back(c);
    auto plan = dataset::stratified_kfold(labels, 10, 3);
    for (int f = 0; f < 10; ++f) {
      auto s = dataset::make_split(plan, f);
      CHECK(s.train.size() == 90);
      CHECK(s.validation.size() == 5);
      CHECK(s.test.size() == 5);
    }
  }

  SECTION("an odd held-out fold splits 4/3") {
    std::vector<int> labels(14, 0);
    auto plan = dataset::stratified_kfold(labels, 2, 5);
    auto s = dataset::make_split(plan, 0);
    CHECK(s.train.size() == 7);
    CHECK(s.validation.size() == 4);
    CHECK(s.test.size() == 3);
  }

  SECTION("splits partition the segments for random label sets") {
    Rng rng(505);
    for (int trial = 0; trial < 20; ++trial) {
      const int k = 2 + int(rng.below(6));
      const int n_classes = 1 + int(rng.below(6));
      std::vector<int> labels;
      for (int i = 0, n = 20 + int(rng.below(180)); i < n; ++i)
        labels.push_back(int(rng.below(uint64_t(n_classes))));
      auto plan = dataset::stratified_kfold(labels, k, rng.next_u64());

      for (int f = 0; f < k; ++f) {
        auto s = dataset::make_split(plan, f);
        std::set<size_t> seen;
        for (const auto* part : {&s.train, &s.validation, &s.test})
          for (size_t idx : *part) {
            CHECK(seen.insert(idx).second);  // disjoint
            REQUIRE(idx < labels.size());
          }
        CHECK(seen.size() == labels.size());  // covers everything
        for (size_t idx : s.train) CHECK(plan.assignments[idx] != f);
        for (size_t idx : s.validation) CHECK(plan.assignments[idx] == f);
        for (size_t idx : s.test) CHECK(plan.assignments[idx] == f);

        // balance within each class and globally
        for (int c = 0; c < n_classes; ++c) {
          long nv = 0, nt = 0;
          for (size_t idx : s.validation)
            if (labels[idx] == c) ++nv;
          for (size_t idx : s.test)
            if (labels[idx] == c) ++nt;
          CHECK(std::abs(nv - nt) <= 1);
        }
        CHECK(std::abs(long(s.validation.size()) - long(s.test.size())) <= 1);
      }
    }
  }

  SECTION("an out-of-range fold is rejected") {
    std::vector<int> labels(10, 0);
    auto plan = dataset::stratified_kfold(labels, 2, 0);
    CHECK_THROWS_AS(dataset::make_split(plan, 2), Error);
    CHECK_THROWS_AS(dataset::make_split(plan, -1), Error);
  }
}

TEST_CASE("segment cache round-trips through its binary format") {
  auto set = empty_set(Task::mitbih, 5);
  Rng rng(808);
  for (int i = 0; i < 3; ++i) {
    std::vector<double> seg(257);
    for (double& v : seg) v = rng.uniform() * 4.0 - 2.0;
    set.push(seg, i + 1, i < 2 ? "100" : "219", 1000 * (i + 1));
  }

  TempDir tmp("cache");
  const auto path = tmp.path / "mitbih.seg";
  dataset::save_cache(set, path);
  auto loaded = dataset::load_cache(path);

  CHECK(loaded.task == set.task);
  CHECK(loaded.length == set.length);
  CHECK(loaded.n_classes == set.n_classes);
  CHECK(loaded.labels == set.labels);
  CHECK(loaded.source_record == set.source_record);
  CHECK(loaded.source_position == set.source_position);
  REQUIRE(loaded.samples.size() == set.samples.size());
  for (size_t i = 0; i < set.samples.size(); ++i)
    CHECK(loaded.samples[i] == double(float(set.samples[i])));  // f32 storage

  SECTION("saving twice produces identical bytes") {
    const auto path2 = tmp.path / "again.seg";
    dataset::save_cache(set, path2);
    CHECK(read_file(path) == read_file(path2));
  }

  SECTION("corrupted magic is rejected") {
    std::string bytes = read_file(path);
    bytes[0] = 'X';
    write_file_atomic(tmp.path / "bad.seg", bytes);
    CHECK_THROWS_AS(dataset::load_cache(tmp.path / "bad.seg"), Error);
  }

  SECTION("truncated file is rejected") {
    std::string bytes = read_file(path);
    bytes.resize(bytes.size() - 5);
    write_file_atomic(tmp.path / "short.seg", bytes);
    CHECK_THROWS_AS(dataset::load_cache(tmp.path / "short.seg"), Error);
  }

  SECTION("length inconsistent with the task is rejected") {
    std::string bytes = read_file(path);
    bytes[8] = 2;  // claim apnea while the length stays 257
    write_file_atomic(tmp.path / "wrong.seg", bytes);
    CHECK_THROWS_AS(dataset::load_cache(tmp.path / "wrong.seg"), Error);
  }
}

TEST_CASE("prepare_mitbih walks records in sorted order") {
  TempDir tmp("mit");
  std::vector<int32_t> ramp(2000);
  std::iota(ramp.begin(), ramp.end(), -1000);
  for (int32_t& v : ramp) v /= 2;  // keep within 12 bits
  write_record_files(tmp.path, "101", {ramp, ramp}, 360.0,
                     212, {ann('V', 700)}, "atr");
  write_record_files(tmp.path, "100", {ramp, ramp}, 360.0,
                     212, {ann('N', 500), ann('N', 1200)}, "atr");

  auto p = dataset::prepare_mitbih(tmp.path);
  REQUIRE(p.set.size() == 3);
  CHECK(p.set.task == Task::mitbih);
  CHECK(p.set.n_classes == 5);
  CHECK(p.set.source_record == std::vector<std::string>{"100", "100", "101"});
  CHECK(p.set.labels == std::vector<int>{0, 0, 2});
  CHECK(p.report.records == 2);
  CHECK(p.report.class_counts == std::vector<long>{2, 0, 1, 0, 0});
}

TEST_CASE("prepare_ecgid assigns person labels from sorted directories") {
  TempDir tmp("ecgid");
  const double fs = 500.0;
  std::vector<int64_t> beats;
  for (int i = 0; i < 12; ++i) beats.push_back(500 + 400 * int64_t(i));
  auto x = pulse_train(fs, 12.0, beats, std::vector<double>(beats.size(), 1.0));
  const auto adc = to_adc(x);
  write_record_files(tmp.path / "Person_02", "rec_1", {adc}, fs, 16, {}, "atr");
  write_record_files(tmp.path / "Person_01", "rec_1", {adc}, fs, 16, {}, "atr");
  write_record_files(tmp.path / "Person_01", "rec_2", {adc}, fs, 16, {}, "atr");

  auto p = dataset::prepare_ecgid(tmp.path);
  CHECK(p.set.n_classes == 2);
  REQUIRE(p.set.size() == 24);  // 8 cycles from each of three records
  CHECK(p.set.source_record[0] == "Person_01/rec_1");
  CHECK(p.set.labels[0] == 0);
  CHECK(p.set.source_record[8] == "Person_01/rec_2");
  CHECK(p.set.labels[8] == 0);
  CHECK(p.set.source_record[16] == "Person_02/rec_1");
  CHECK(p.set.labels[16] == 1);
  CHECK(p.report.class_counts == std::vector<long>{16, 8});
}

TEST_CASE("prepare_apnea keeps the annotated training group only") {
  TempDir tmp("apnea");
  std::vector<int32_t> adc(12000);
  for (size_t i = 0; i < adc.size(); ++i)
    adc[i] = int32_t(std::lround(80.0 * std::sin(0.07 * double(i))));
  const std::vector<wfdb::Annotation> anns{ann('A', 0), ann('N', 6000)};
  write_record_files(tmp.path, "a01", {adc}, 100.0, 16, anns, "apn");
  write_record_files(tmp.path, "x01", {adc}, 100.0, 16, anns, "apn");  // withheld group
  write_record_files(tmp.path, "b01", {adc}, 100.0, 16, {}, "apn");    // no labels

  auto p = dataset::prepare_apnea(tmp.path);
  REQUIRE(p.set.size() == 2);
  CHECK(p.set.source_record == std::vector<std::string>{"a01", "a01"});
  CHECK(p.set.labels == std::vector<int>{1, 0});
  REQUIRE(p.report.warnings.size() == 1);
  CHECK(p.report.warnings[0].find("b01") != std::string::npos);
}
