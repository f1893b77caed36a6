#pragma once

// PhysioNet WFDB readers: .hea headers, .dat signal files (formats 212/16/61)
// and MIT-format annotation files (.atr/.apn), plus the AAMI EC57 beat-class
// mapping. Everything here is a pure function over byte buffers.

#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfan/util.hpp"

namespace cfan::wfdb {

struct SignalInfo {
  std::string filename;
  int storage_format = 16;  // 212, 16 or 61
  double adc_gain = 200.0;  // adc units per physical mV
  int baseline = 0;         // adc value corresponding to 0 mV
  int adc_resolution = 0;
  int adc_zero = 0;
  std::string description;
};

struct RecordHeader {
  std::string record_name;
  int n_signals = 0;
  double sampling_frequency = 0.0;
  int64_t n_samples = 0;
  std::vector<SignalInfo> signals;
};

struct Annotation {
  int64_t sample_index = 0;
  int symbol_code = 0;   // MIT annotation type code, 1..49
  char symbol_char = 0;  // printable mnemonic
  std::string aux;
  // Parsed but unused downstream.
  int subtype = 0;
  int chan = 0;
  int num = 0;
};

struct Record {
  RecordHeader header;
  std::vector<std::vector<double>> signals;  // physical mV, [channel][sample]
  std::vector<std::vector<int32_t>> adc;     // raw adc units, kept for tests
  std::vector<Annotation> annotations;
};

// The five AAMI EC57 beat classes.
enum class AamiClass : int { N = 0, S = 1, V = 2, F = 3, Q = 4 };
inline constexpr int kAamiClassCount = 5;

inline const char* aami_name(AamiClass c) {
  static constexpr const char* names[] = {"N", "S", "V", "F", "Q"};
  return names[int(c)];
}

// ---- header (.hea) -----------------------------------------------------------

namespace detail {

inline bool parse_int(std::string_view s, long& out) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  long v = 0;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = (s[0] == '-') ? -v : v;
  return true;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::string tmp(s);
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace detail

inline RecordHeader parse_header(std::string_view text) {
  RecordHeader hdr;
  int line_no = 0;
  int signals_seen = 0;
  bool record_line_done = false;

  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '#') continue;

    auto tok = detail::split_ws(line);
    if (tok.empty()) continue;

    if (!record_line_done) {
      // record_name[/n_segments] n_signals [fs[/counter] [n_samples ...]]
      if (tok.size() < 2)
        fail("header line %d: record line needs at least a name and a signal count", line_no);
      std::string_view name = tok[0];
      if (name.find('/') != std::string_view::npos)
        fail("header line %d: multi-segment records are not supported", line_no);
      hdr.record_name = std::string(name);

      long nsig = 0;
      if (!detail::parse_int(tok[1], nsig) || nsig < 1)
        fail("header line %d: bad signal count '%.*s'", line_no, int(tok[1].size()),
             tok[1].data());
      hdr.n_signals = int(nsig);

      hdr.sampling_frequency = 250.0;  // WFDB default when the field is absent
      if (tok.size() >= 3) {
        std::string_view fs = tok[2];
        if (size_t slash = fs.find('/'); slash != std::string_view::npos)
          fs = fs.substr(0, slash);  // counter frequency ignored
        if (!detail::parse_double(fs, hdr.sampling_frequency))
          fail("header line %d: non-numeric sampling frequency '%.*s'", line_no,
               int(tok[2].size()), tok[2].data());
      }
      if (hdr.sampling_frequency <= 0)
        fail("header line %d: sampling frequency must be positive", line_no);

      if (tok.size() >= 4) {
        long ns = 0;
        if (!detail::parse_int(tok[3], ns))
          fail("header line %d: bad sample count '%.*s'", line_no, int(tok[3].size()),
               tok[3].data());
        hdr.n_samples = ns;
      }
      if (hdr.n_samples <= 0)
        fail("header line %d: record must declare a positive sample count", line_no);
      record_line_done = true;
      continue;
    }

    if (signals_seen >= hdr.n_signals) break;  // trailing info lines

    // filename format[xN][:S][+O] [gain[(baseline)][/units] [res [zero [init [cksum [blk [desc]]]]]]]
    if (tok.size() < 2)
      fail("header line %d: signal line needs at least a filename and a format", line_no);
    SignalInfo sig;
    sig.filename = std::string(tok[0]);

    {
      std::string_view f = tok[1];
      size_t cut = f.find_first_of("x:+");
      std::string_view fmt = f.substr(0, cut);
      if (cut != std::string_view::npos) {
        // samples-per-frame / skew / byte-offset qualifiers: only the trivial
        // values would be equivalent to their absence, so reject outright.
        fail("header line %d: format qualifier '%.*s' is not supported", line_no,
             int(f.size()), f.data());
      }
      long v = 0;
      if (!detail::parse_int(fmt, v))
        fail("header line %d: bad storage format '%.*s'", line_no, int(f.size()), f.data());
      if (v != 212 && v != 16 && v != 61)
        fail("header line %d: unsupported storage format %ld (supported: 212, 16, 61)",
             line_no, v);
      sig.storage_format = int(v);
    }

    bool explicit_baseline = false;
    if (tok.size() >= 3) {
      std::string_view g = tok[2];
      if (size_t slash = g.find('/'); slash != std::string_view::npos)
        g = g.substr(0, slash);  // units suffix
      if (size_t paren = g.find('('); paren != std::string_view::npos) {
        size_t close = g.find(')', paren);
        if (close == std::string_view::npos)
          fail("header line %d: unterminated baseline in '%.*s'", line_no,
               int(tok[2].size()), tok[2].data());
        long b = 0;
        if (!detail::parse_int(g.substr(paren + 1, close - paren - 1), b))
          fail("header line %d: bad baseline in '%.*s'", line_no, int(tok[2].size()),
               tok[2].data());
        sig.baseline = int(b);
        explicit_baseline = true;
        g = g.substr(0, paren);
      }
      if (!detail::parse_double(g, sig.adc_gain))
        fail("header line %d: bad adc gain '%.*s'", line_no, int(tok[2].size()),
             tok[2].data());
      if (sig.adc_gain == 0) sig.adc_gain = 200.0;  // 0 means uncalibrated
    }
    if (tok.size() >= 4) {
      long v = 0;
      if (!detail::parse_int(tok[3], v))
        fail("header line %d: bad adc resolution", line_no);
      sig.adc_resolution = int(v);
    }
    if (tok.size() >= 5) {
      long v = 0;
      if (!detail::parse_int(tok[4], v)) fail("header line %d: bad adc zero", line_no);
      sig.adc_zero = int(v);
      if (!explicit_baseline) sig.baseline = sig.adc_zero;
    }
    if (tok.size() >= 9) {
      std::string desc;
      for (size_t i = 8; i < tok.size(); ++i) {
        if (!desc.empty()) desc += ' ';
        desc += std::string(tok[i]);
      }
      sig.description = desc;
    }
    hdr.signals.push_back(std::move(sig));
    ++signals_seen;
  }

  if (!record_line_done) throw Error("header has no record line");
  if (signals_seen != hdr.n_signals)
    fail("header declares %d signals but describes %d", hdr.n_signals, signals_seen);
  return hdr;
}

// ---- signal files (.dat) -----------------------------------------------------

namespace detail {

inline int32_t sign_extend_12(uint32_t v) {
  return (v & 0x800) ? int32_t(v) - 4096 : int32_t(v);
}

}  // namespace detail

// Decodes the record's single interleaved .dat buffer into one adc sequence per
// channel. All signals must share one file (true for MIT-BIH, ECG-ID and
// Apnea-ECG) and one storage format.
inline std::vector<std::vector<int32_t>> decode_signal(const RecordHeader& hdr,
                                                       std::span<const uint8_t> dat) {
  require(!hdr.signals.empty(), "header describes no signals");
  const int fmt = hdr.signals[0].storage_format;
  for (const auto& s : hdr.signals) {
    require(s.filename == hdr.signals[0].filename,
            "signals split across multiple .dat files are not supported");
    require(s.storage_format == fmt, "mixed storage formats are not supported");
  }

  const int nsig = hdr.n_signals;
  const int64_t total = hdr.n_samples * nsig;
  std::vector<int32_t> flat;
  flat.reserve(static_cast<size_t>(total));

  if (fmt == 212) {
    // Two 12-bit two's-complement samples per 3 bytes.
    const int64_t groups = (total + 1) / 2;
    const int64_t expected = groups * 3;
    const int64_t expected_min = (total * 3 + 1) / 2;  // writers may drop the pad
    if (int64_t(dat.size()) != expected && int64_t(dat.size()) != expected_min)
      fail("format 212: expected %lld bytes for %lld samples, got %zu",
           (long long)expected, (long long)total, dat.size());
    for (int64_t g = 0; g < groups; ++g) {
      const uint8_t b0 = dat[size_t(3 * g)];
      const uint8_t b1 = dat[size_t(3 * g + 1)];
      flat.push_back(detail::sign_extend_12(uint32_t(b1 & 0x0F) << 8 | b0));
      if (int64_t(flat.size()) < total) {
        if (static_cast<size_t>(3 * g + 2) >= dat.size())
          fail("format 212: truncated final sample group");
        const uint8_t b2 = dat[size_t(3 * g + 2)];
        flat.push_back(detail::sign_extend_12(uint32_t(b1 & 0xF0) << 4 | b2));
      }
    }
  } else {  // 16 (little-endian) or 61 (big-endian)
    const int64_t expected = total * 2;
    if (int64_t(dat.size()) != expected)
      fail("format %d: expected %lld bytes for %lld samples, got %zu", fmt,
           (long long)expected, (long long)total, dat.size());
    for (int64_t i = 0; i < total; ++i) {
      uint16_t lo = dat[size_t(2 * i)], hi = dat[size_t(2 * i + 1)];
      uint16_t w = (fmt == 16) ? uint16_t(lo | hi << 8) : uint16_t(hi | lo << 8);
      flat.push_back(int16_t(w));
    }
  }

  std::vector<std::vector<int32_t>> channels(static_cast<size_t>(nsig));
  for (auto& ch : channels) ch.resize(static_cast<size_t>(hdr.n_samples));
  for (int64_t i = 0; i < total; ++i)
    channels[size_t(i % nsig)][size_t(i / nsig)] = flat[size_t(i)];
  return channels;
}

inline std::vector<std::vector<double>> to_physical(
    const RecordHeader& hdr, const std::vector<std::vector<int32_t>>& adc) {
  std::vector<std::vector<double>> out(adc.size());
  for (size_t ch = 0; ch < adc.size(); ++ch) {
    const auto& info = hdr.signals[ch];
    out[ch].resize(adc[ch].size());
    for (size_t i = 0; i < adc[ch].size(); ++i)
      out[ch][i] = (adc[ch][i] - info.baseline) / info.adc_gain;
  }
  return out;
}

// ---- annotations (.atr / .apn) -------------------------------------------------

namespace detail {

// MIT annotation type codes -> mnemonics (codes 1..41; others print as '?').
inline char code_char(int code) {
  static constexpr char table[42] = {
      ' ', 'N', 'L', 'R', 'a', 'V', 'F', 'J', 'A', 'S', 'E',
      'j', '/', 'Q', '~', '?', '|', '?', 's', 'T', '*', 'D',
      '"', '=', 'p', 'B', '^', 't', '+', 'u', '?', '!', '[',
      ']', 'e', 'n', '@', 'x', 'f', '(', ')', 'r'};
  if (code >= 1 && code <= 41) return table[code];
  return '?';
}

}  // namespace detail

// Decodes a complete MIT annotation stream: 2-byte little-endian words, the
// high 6 bits holding the type code and the low 10 bits the time delta.
// Pseudo-codes 59..63 (SKIP/NUM/SUB/CHN/AUX) are consumed, never emitted.
inline std::vector<Annotation> parse_annotations(std::span<const uint8_t> bytes) {
  if (bytes.size() % 2 != 0) fail("annotation stream has odd length %zu", bytes.size());
  ByteReader r(bytes.data(), bytes.size());

  std::vector<Annotation> out;
  int64_t time = 0;
  int cur_chan = 0, cur_num = 0;
  bool terminated = false;

  while (r.remaining() >= 2) {
    const uint16_t word = r.u16();
    const int code = word >> 10;
    const int delta = word & 0x3FF;

    if (word == 0) {
      terminated = true;
      break;
    }

    switch (code) {
      case 59: {  // SKIP: 4-byte long interval, high 16 bits first
        if (r.remaining() < 4) throw Error("SKIP pseudo-annotation truncated");
        const uint16_t hi = r.u16();
        const uint16_t lo = r.u16();
        time += int32_t(uint32_t(hi) << 16 | lo);
        break;
      }
      case 60:  // NUM: applies to current and subsequent annotations
        cur_num = delta;
        if (!out.empty()) out.back().num = delta;
        break;
      case 61:  // SUB: applies to the current annotation only
        if (!out.empty()) out.back().subtype = delta;
        break;
      case 62:  // CHN
        cur_chan = delta;
        if (!out.empty()) out.back().chan = delta;
        break;
      case 63: {  // AUX: delta = byte count, padded to an even boundary
        const size_t n = size_t(delta);
        if (r.remaining() < n + (n % 2))
          fail("AUX field of %zu bytes overruns the annotation stream", n);
        std::string aux = r.bytes(n);
        if (n % 2) r.u8();
        while (!aux.empty() && aux.back() == '\0') aux.pop_back();
        if (!out.empty()) out.back().aux = std::move(aux);
        break;
      }
      case 0:
        fail("annotation word with type 0 and nonzero delta %d", delta);
      default: {  // a stored annotation
        time += delta;
        Annotation a;
        a.sample_index = time;
        a.symbol_code = code;
        a.symbol_char = detail::code_char(code);
        a.chan = cur_chan;
        a.num = cur_num;
        out.push_back(std::move(a));
      }
    }
  }

  if (!terminated) throw Error("annotation stream missing its 0x0000 terminator");
  return out;
}

// ---- AAMI EC57 beat-class mapping ---------------------------------------------

// Returns the AAMI class for a beat mnemonic, or nullopt for non-beat
// annotations and unmapped beat types (callers count those in diagnostics).
inline std::optional<AamiClass> map_beat_to_aami(char symbol) {
  switch (symbol) {
    case 'N': case 'L': case 'R': case 'e': case 'j':
      return AamiClass::N;
    case 'A': case 'a': case 'J': case 'S':
      return AamiClass::S;
    case 'V': case 'E':
      return AamiClass::V;
    case 'F':
      return AamiClass::F;
    case '/': case 'f': case 'Q':
      return AamiClass::Q;
    default:
      return std::nullopt;
  }
}

// ---- record loading ------------------------------------------------------------

// Reads <dir>/<name>.hea, its .dat file, and (when present) the annotation file
// with the given extension ("atr" or "apn").
inline Record read_record(const std::filesystem::path& dir, const std::string& name,
                          const std::string& ann_ext = "atr") {
  Record rec;
  const auto hea = dir / (name + ".hea");
  rec.header = parse_header(read_file(hea));

  const auto dat = dir / rec.header.signals.at(0).filename;
  const std::string bytes = read_file(dat);
  rec.adc = decode_signal(rec.header,
                          {reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()});
  rec.signals = to_physical(rec.header, rec.adc);

  const auto ann = dir / (name + "." + ann_ext);
  if (std::filesystem::exists(ann)) {
    const std::string ab = read_file(ann);
    rec.annotations = parse_annotations(
        {reinterpret_cast<const uint8_t*>(ab.data()), ab.size()});
  }
  return rec;
}

}  // namespace cfan::wfdb
