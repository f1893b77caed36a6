// WFDB codec tests. Byte-level fixtures are hand-derived from the format
// definitions (two 12-bit samples per 3 bytes for format 212; 2-byte
// little-endian annotation words with a 6-bit code and 10-bit delta), so the
// decoder is checked against the format, not against itself. Encoders are
// exercised through decode round-trips on randomized content.

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cfan/util.hpp"
#include "cfan/wfdb.hpp"
#include "cfan/wfdb_write.hpp"

using namespace cfan;
using namespace cfan::wfdb;

namespace {

std::span<const uint8_t> as_bytes(const std::vector<uint8_t>& v) {
  return {v.data(), v.size()};
}

std::span<const uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

}  // namespace

TEST_CASE("header: MIT-BIH style record line and signal lines") {
  const char* text =
      "100 2 360 650000\n"
      "100.dat 212 200 11 1024 995 -22131 0 MLII\n"
      "100.dat 212 200 11 1024 1011 20052 0 V5\n"
      "# comment line\n";
  RecordHeader h = parse_header(text);
  CHECK(h.record_name == "100");
  CHECK(h.n_signals == 2);
  CHECK(h.sampling_frequency == 360.0);
  CHECK(h.n_samples == 650000);
  REQUIRE(h.signals.size() == 2);
  CHECK(h.signals[0].filename == "100.dat");
  CHECK(h.signals[0].storage_format == 212);
  CHECK(h.signals[0].adc_gain == 200.0);
  CHECK(h.signals[0].adc_zero == 1024);
  CHECK(h.signals[0].baseline == 1024);  // no explicit baseline -> adc zero
  CHECK(h.signals[0].description == "MLII");
  CHECK(h.signals[1].description == "V5");
}

TEST_CASE("header: explicit baseline and units suffix") {
  const char* text =
      "rec_1 1 500 10000\n"
      "rec_1.dat 16 10000(123)/mV 12 0 98 -1 0 ECG I\n";
  RecordHeader h = parse_header(text);
  CHECK(h.signals[0].adc_gain == 10000.0);
  CHECK(h.signals[0].baseline == 123);  // explicit wins over adc zero
  CHECK(h.signals[0].adc_zero == 0);
  CHECK(h.signals[0].description == "ECG I");
}

TEST_CASE("header: defaults when optional fields are absent") {
  RecordHeader h = parse_header("r 1 250 100\nf.dat 212\n");
  CHECK(h.sampling_frequency == 250.0);
  CHECK(h.signals[0].adc_gain == 200.0);
  CHECK(h.signals[0].baseline == 0);

  // gain of 0 means uncalibrated and falls back to the default
  h = parse_header("r 1 250 100\nf.dat 212 0\n");
  CHECK(h.signals[0].adc_gain == 200.0);

  // counter frequency after the slash is ignored
  h = parse_header("r 1 360/1000 100\nf.dat 212\n");
  CHECK(h.sampling_frequency == 360.0);
}

TEST_CASE("header: CRLF line endings and comments are tolerated") {
  RecordHeader h = parse_header("# top comment\r\nr 1 128 5\r\nf.dat 61 100(5)\r\n");
  CHECK(h.sampling_frequency == 128.0);
  CHECK(h.signals[0].storage_format == 61);
  CHECK(h.signals[0].adc_gain == 100.0);
  CHECK(h.signals[0].baseline == 5);
}

TEST_CASE("header: malformed inputs are rejected") {
  CHECK_THROWS_AS(parse_header("r/4 2 360 650000\nf.dat 212\nf.dat 212\n"), Error);
  CHECK_THROWS_AS(parse_header("r 1 360 100\nf.dat 80\n"), Error);          // format
  CHECK_THROWS_AS(parse_header("r 1 360 100\nf.dat 212x4\n"), Error);       // qualifier
  CHECK_THROWS_AS(parse_header("r 1 360\nf.dat 212\n"), Error);             // no count
  CHECK_THROWS_AS(parse_header("r 1 360 0\nf.dat 212\n"), Error);           // zero count
  CHECK_THROWS_AS(parse_header("r 2 360 100\nf.dat 212\n"), Error);         // missing sig
  CHECK_THROWS_AS(parse_header("r 1 abc 100\nf.dat 212\n"), Error);         // bad fs
  CHECK_THROWS_AS(parse_header("r 1 360 100\nf.dat 212 200(12\n"), Error);  // paren
  CHECK_THROWS_AS(parse_header(""), Error);
}

TEST_CASE("format 212: hand-packed byte triples decode to signed 12-bit pairs") {
  RecordHeader h = parse_header("r 1 360 2\nf.dat 212\n");

  // s0 = low nibble of byte1 : byte0, s1 = high nibble of byte1 : byte2
  auto dec = [&](std::vector<uint8_t> bytes) { return decode_signal(h, as_bytes(bytes)); };

  CHECK(dec({0x01, 0x00, 0x02})[0] == std::vector<int32_t>{1, 2});
  CHECK(dec({0x00, 0x08, 0x00})[0] == std::vector<int32_t>{-2048, 0});  // sign bit
  CHECK(dec({0xFF, 0x07, 0x00})[0] == std::vector<int32_t>{2047, 0});   // max positive
  CHECK(dec({0xFF, 0x0F, 0x00})[0] == std::vector<int32_t>{-1, 0});     // all ones
  CHECK(dec({0x00, 0xF0, 0xFF})[0] == std::vector<int32_t>{0, -1});
  CHECK(dec({0x00, 0xA0, 0x34})[0] == std::vector<int32_t>{0, 0xA34 - 4096});
}

TEST_CASE("format 212: channels interleave sample-by-sample") {
  RecordHeader h = parse_header("r 2 360 2\nf.dat 212\nf.dat 212\n");
  // flat samples 1, 2, 3, 4 -> ch0 = {1, 3}, ch1 = {2, 4}
  std::vector<uint8_t> bytes = {0x01, 0x00, 0x02, 0x03, 0x00, 0x04};
  auto ch = decode_signal(h, as_bytes(bytes));
  REQUIRE(ch.size() == 2);
  CHECK(ch[0] == std::vector<int32_t>{1, 3});
  CHECK(ch[1] == std::vector<int32_t>{2, 4});
}

TEST_CASE("format 212: odd sample totals accept padded and unpadded files") {
  RecordHeader h = parse_header("r 1 360 3\nf.dat 212\n");
  std::vector<uint8_t> padded = {0x01, 0x00, 0x02, 0x03, 0x00, 0x00};
  std::vector<uint8_t> unpadded = {0x01, 0x00, 0x02, 0x03, 0x00};
  CHECK(decode_signal(h, as_bytes(padded))[0] == std::vector<int32_t>{1, 2, 3});
  CHECK(decode_signal(h, as_bytes(unpadded))[0] == std::vector<int32_t>{1, 2, 3});

  std::vector<uint8_t> short_buf = {0x01, 0x00, 0x02, 0x03};
  CHECK_THROWS_AS(decode_signal(h, as_bytes(short_buf)), Error);
}

TEST_CASE("formats 16 and 61: endianness") {
  RecordHeader le = parse_header("r 1 360 4\nf.dat 16\n");
  std::vector<uint8_t> le_bytes = {0x01, 0x00, 0xFF, 0xFF, 0x00, 0x01, 0x00, 0x80};
  CHECK(decode_signal(le, as_bytes(le_bytes))[0] ==
        std::vector<int32_t>{1, -1, 256, -32768});

  RecordHeader be = parse_header("r 1 360 4\nf.dat 61\n");
  std::vector<uint8_t> be_bytes = {0x00, 0x01, 0xFF, 0xFF, 0x01, 0x00, 0x80, 0x00};
  CHECK(decode_signal(be, as_bytes(be_bytes))[0] ==
        std::vector<int32_t>{1, -1, 256, -32768});

  std::vector<uint8_t> wrong_len(7, 0);
  CHECK_THROWS_AS(decode_signal(le, as_bytes(wrong_len)), Error);
}

TEST_CASE("decode_signal rejects unsupported layouts") {
  RecordHeader split = parse_header("r 2 360 2\na.dat 212\nb.dat 212\n");
  std::vector<uint8_t> bytes(6, 0);
  CHECK_THROWS_AS(decode_signal(split, as_bytes(bytes)), Error);

  RecordHeader mixed = parse_header("r 2 360 2\na.dat 212\na.dat 16\n");
  CHECK_THROWS_AS(decode_signal(mixed, as_bytes(bytes)), Error);
}

TEST_CASE("to_physical applies (adc - baseline) / gain per channel") {
  RecordHeader h = parse_header("r 2 360 2\nf.dat 212 200 11 1024\nf.dat 212 100(24)\n");
  std::vector<std::vector<int32_t>> adc = {{1224, 1024}, {124, -76}};
  auto phys = to_physical(h, adc);
  CHECK(phys[0][0] == Catch::Approx(1.0));
  CHECK(phys[0][1] == Catch::Approx(0.0));
  CHECK(phys[1][0] == Catch::Approx(1.0));
  CHECK(phys[1][1] == Catch::Approx(-1.0));
}

TEST_CASE("annotations: codes, deltas, SKIP, AUX, SUB/CHN/NUM") {
  std::vector<uint8_t> s;
  auto word = [&](int code, int delta) {
    const uint16_t w = uint16_t(code << 10 | delta);
    s.push_back(uint8_t(w & 0xFF));
    s.push_back(uint8_t(w >> 8));
  };

  word(1, 10);   // N at 10
  word(5, 20);   // V at 30
  word(59, 0);   // SKIP of 100000 = 0x000186A0 samples, high 16 bits first
  s.push_back(0x01); s.push_back(0x00);  // high half = 0x0001
  s.push_back(0xA0); s.push_back(0x86);  // low half = 0x86A0
  word(8, 5);    // A at 30 + 100000 + 5
  word(28, 2);   // '+' rhythm change at +2
  word(63, 5);   // AUX, 5 bytes + 1 pad
  for (char c : {'(', 'A', 'F', 'I', 'B'}) s.push_back(uint8_t(c));
  s.push_back(0x00);
  word(61, 3);   // SUB -> current annotation only
  word(62, 1);   // CHN -> current and subsequent
  word(60, 2);   // NUM -> current and subsequent
  word(2, 7);    // L at +7
  word(0, 0);    // terminator

  auto anns = parse_annotations(as_bytes(s));
  REQUIRE(anns.size() == 5);

  CHECK(anns[0].sample_index == 10);
  CHECK(anns[0].symbol_char == 'N');
  CHECK(anns[1].sample_index == 30);
  CHECK(anns[1].symbol_char == 'V');
  CHECK(anns[2].sample_index == 100035);
  CHECK(anns[2].symbol_char == 'A');

  CHECK(anns[3].sample_index == 100037);
  CHECK(anns[3].symbol_char == '+');
  CHECK(anns[3].aux == "(AFIB");
  CHECK(anns[3].subtype == 3);
  CHECK(anns[3].chan == 1);
  CHECK(anns[3].num == 2);

  CHECK(anns[4].sample_index == 100044);
  CHECK(anns[4].symbol_char == 'L');
  CHECK(anns[4].subtype == 0);  // SUB does not persist
  CHECK(anns[4].chan == 1);     // CHN and NUM do
  CHECK(anns[4].num == 2);
}

TEST_CASE("annotations: malformed streams are rejected") {
  // missing terminator
  std::vector<uint8_t> no_term = {0x0A, 0x04};
  CHECK_THROWS_AS(parse_annotations(as_bytes(no_term)), Error);

  // odd length
  std::vector<uint8_t> odd = {0x0A, 0x04, 0x00};
  CHECK_THROWS_AS(parse_annotations(as_bytes(odd)), Error);

  // truncated SKIP interval
  std::vector<uint8_t> skip_cut = {0x00, 0xEC, 0x01, 0x00};
  CHECK_THROWS_AS(parse_annotations(as_bytes(skip_cut)), Error);

  // AUX byte count overruns the stream
  std::vector<uint8_t> aux_cut = {0x0A, 0x04, 0x08, 0xFC, 'a', 'b', 0x00, 0x00};
  CHECK_THROWS_AS(parse_annotations(as_bytes(aux_cut)), Error);

  // empty stream has no terminator either
  CHECK_THROWS_AS(parse_annotations({}), Error);
}

TEST_CASE("annotations: empty stream with terminator decodes to nothing") {
  std::vector<uint8_t> s = {0x00, 0x00};
  CHECK(parse_annotations(as_bytes(s)).empty());
}

TEST_CASE("AAMI EC57 mapping covers the five classes and rejects non-beats") {
  using enum AamiClass;
  for (char c : {'N', 'L', 'R', 'e', 'j'}) CHECK(map_beat_to_aami(c) == N);
  for (char c : {'A', 'a', 'J', 'S'}) CHECK(map_beat_to_aami(c) == S);
  for (char c : {'V', 'E'}) CHECK(map_beat_to_aami(c) == V);
  CHECK(map_beat_to_aami('F') == F);
  for (char c : {'/', 'f', 'Q'}) CHECK(map_beat_to_aami(c) == Q);

  for (char c : {'+', '~', '|', '"', '[', ']', '!', 'x', 'p', 't', 'u', '?'})
    CHECK_FALSE(map_beat_to_aami(c).has_value());
}

TEST_CASE("encode/decode round-trip: format 212") {
  Rng rng(0xC0DEC212);
  for (int trial = 0; trial < 20; ++trial) {
    const int nsig = 1 + int(rng.below(3));
    const int len = 1 + int(rng.below(200));
    std::vector<std::vector<int32_t>> ch(static_cast<size_t>(nsig));
    for (auto& c : ch) {
      c.resize(static_cast<size_t>(len));
      for (auto& v : c) v = int32_t(rng.below(4096)) - 2048;
    }
    RecordHeader h;
    h.n_signals = nsig;
    h.n_samples = len;
    h.signals.resize(static_cast<size_t>(nsig));
    for (auto& s : h.signals) s = {.filename = "f.dat", .storage_format = 212};

    const std::string bytes = encode_signal_212(ch);
    CHECK(decode_signal(h, as_bytes(bytes)) == ch);
  }
}

TEST_CASE("encode/decode round-trip: format 16") {
  Rng rng(0xC0DEC016);
  for (int trial = 0; trial < 20; ++trial) {
    const int nsig = 1 + int(rng.below(2));
    const int len = 1 + int(rng.below(200));
    std::vector<std::vector<int32_t>> ch(static_cast<size_t>(nsig));
    for (auto& c : ch) {
      c.resize(static_cast<size_t>(len));
      for (auto& v : c) v = int32_t(rng.below(65536)) - 32768;
    }
    RecordHeader h;
    h.n_signals = nsig;
    h.n_samples = len;
    h.signals.resize(static_cast<size_t>(nsig));
    for (auto& s : h.signals) s = {.filename = "f.dat", .storage_format = 16};

    const std::string bytes = encode_signal_16(ch);
    CHECK(decode_signal(h, as_bytes(bytes)) == ch);
  }
}

TEST_CASE("encode_signal_212 rejects out-of-range samples") {
  CHECK_THROWS_AS(encode_signal_212({{2048}}), Error);
  CHECK_THROWS_AS(encode_signal_212({{-2049}}), Error);
  CHECK_THROWS_AS(encode_signal_212({{1, 2}, {3}}), Error);  // ragged channels
}

TEST_CASE("encode/decode round-trip: annotations with large gaps and aux") {
  Rng rng(0xA22A0701);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Annotation> anns;
    int64_t t = int64_t(rng.below(100));
    const int n = 1 + int(rng.below(40));
    for (int i = 0; i < n; ++i) {
      Annotation a;
      a.sample_index = t;
      a.symbol_code = 1 + int(rng.below(41));
      a.symbol_char = wfdb::detail::code_char(a.symbol_code);
      if (rng.below(4) == 0) a.aux = "(note" + std::to_string(i);
      anns.push_back(a);
      t += int64_t(rng.below(5000));  // exercises both short deltas and SKIP
    }

    const std::string bytes = encode_annotations(anns);
    auto back = parse_annotations(as_bytes(bytes));
    REQUIRE(back.size() == anns.size());
    for (size_t i = 0; i < anns.size(); ++i) {
      CHECK(back[i].sample_index == anns[i].sample_index);
      CHECK(back[i].symbol_code == anns[i].symbol_code);
      CHECK(back[i].aux == anns[i].aux);
    }
  }
}

TEST_CASE("read_record loads a synthesized on-disk record end to end") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "cfan_wfdb_test";
  fs::create_directories(dir);

  RecordHeader h;
  h.record_name = "t01";
  h.n_signals = 2;
  h.sampling_frequency = 360.0;
  h.n_samples = 500;
  h.signals.push_back({.filename = "t01.dat", .storage_format = 212,
                       .adc_gain = 200.0, .baseline = 1024, .adc_zero = 1024,
                       .description = "MLII"});
  h.signals.push_back({.filename = "t01.dat", .storage_format = 212,
                       .adc_gain = 100.0, .baseline = 0, .description = "V5"});

  Rng rng(0x5EED0001);
  std::vector<std::vector<int32_t>> ch(2, std::vector<int32_t>(500));
  for (auto& c : ch)
    for (auto& v : c) v = int32_t(rng.below(4096)) - 2048;

  std::vector<Annotation> anns;
  for (int i = 0; i < 5; ++i)
    anns.push_back({.sample_index = 40 + 100 * i, .symbol_code = 1, .symbol_char = 'N'});

  write_file_atomic(dir / "t01.hea", format_header(h));
  write_file_atomic(dir / "t01.dat", encode_signal_212(ch));
  write_file_atomic(dir / "t01.atr", encode_annotations(anns));

  Record rec = read_record(dir, "t01");
  CHECK(rec.header.n_signals == 2);
  CHECK(rec.header.sampling_frequency == 360.0);
  CHECK(rec.adc == ch);
  REQUIRE(rec.annotations.size() == 5);
  CHECK(rec.annotations[2].sample_index == 240);
  CHECK(rec.signals[0][0] == Catch::Approx((ch[0][0] - 1024) / 200.0));
  CHECK(rec.signals[1][0] == Catch::Approx(ch[1][0] / 100.0));

  // without an annotation file the record still loads
  fs::remove(dir / "t01.atr");
  Record bare = read_record(dir, "t01");
  CHECK(bare.annotations.empty());

  fs::remove_all(dir);
}
