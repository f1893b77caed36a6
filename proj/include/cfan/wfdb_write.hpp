#pragma once

// Minimal WFDB writers, enough to synthesize well-formed records for tests and
// demo corpora. Not a general-purpose WFDB exporter.

#include <span>
#include <string>
#include <vector>

#include "cfan/util.hpp"
#include "cfan/wfdb.hpp"

namespace cfan::wfdb {

inline std::string format_header(const RecordHeader& hdr) {
  std::string out = hdr.record_name + " " + std::to_string(hdr.n_signals) + " " +
                    fmt_g6(hdr.sampling_frequency) + " " + std::to_string(hdr.n_samples) +
                    "\n";
  for (const auto& s : hdr.signals) {
    out += s.filename + " " + std::to_string(s.storage_format) + " " +
           fmt_g6(s.adc_gain) + "(" + std::to_string(s.baseline) + ") " +
           std::to_string(s.adc_resolution) + " " + std::to_string(s.adc_zero);
    if (!s.description.empty()) out += " 0 0 0 " + s.description;
    out += "\n";
  }
  return out;
}

// Interleaves channels and packs two 12-bit samples per 3 bytes.
inline std::string encode_signal_212(const std::vector<std::vector<int32_t>>& channels) {
  require(!channels.empty(), "no channels to encode");
  const size_t nsig = channels.size(), len = channels[0].size();
  for (const auto& ch : channels)
    require(ch.size() == len, "channels must share a length");

  std::vector<uint32_t> flat;
  flat.reserve(nsig * len);
  for (size_t i = 0; i < len; ++i)
    for (size_t c = 0; c < nsig; ++c) {
      int32_t v = channels[c][i];
      require(v >= -2048 && v <= 2047, "sample out of 12-bit range");
      flat.push_back(uint32_t(v) & 0xFFF);
    }
  if (flat.size() % 2) flat.push_back(0);

  std::string out;
  out.reserve(flat.size() / 2 * 3);
  for (size_t i = 0; i < flat.size(); i += 2) {
    const uint32_t a = flat[i], b = flat[i + 1];
    out.push_back(char(a & 0xFF));
    out.push_back(char((a >> 8 & 0x0F) | (b >> 8 & 0x0F) << 4));
    out.push_back(char(b & 0xFF));
  }
  return out;
}

inline std::string encode_signal_16(const std::vector<std::vector<int32_t>>& channels) {
  require(!channels.empty(), "no channels to encode");
  const size_t nsig = channels.size(), len = channels[0].size();
  for (const auto& ch : channels)
    require(ch.size() == len, "channels must share a length");
  std::string out;
  out.reserve(nsig * len * 2);
  for (size_t i = 0; i < len; ++i)
    for (size_t c = 0; c < nsig; ++c) {
      int32_t v = channels[c][i];
      require(v >= -32768 && v <= 32767, "sample out of 16-bit range");
      uint16_t w = uint16_t(int16_t(v));
      out.push_back(char(w & 0xFF));
      out.push_back(char(w >> 8));
    }
  return out;
}

// Encodes beats (symbol code + absolute sample index, nondecreasing); gaps
// beyond the 10-bit delta field go through SKIP pseudo-annotations.
inline std::string encode_annotations(const std::vector<Annotation>& anns) {
  std::string out;
  int64_t time = 0;
  auto put_word = [&out](uint16_t w) {
    out.push_back(char(w & 0xFF));
    out.push_back(char(w >> 8));
  };
  for (const auto& a : anns) {
    require(a.symbol_code >= 1 && a.symbol_code <= 49, "not a storable annotation code");
    int64_t gap = a.sample_index - time;
    require(gap >= 0, "annotation indices must be nondecreasing");
    if (gap > 1023) {
      put_word(uint16_t(59 << 10));  // SKIP
      put_word(uint16_t(uint64_t(gap) >> 16 & 0xFFFF));
      put_word(uint16_t(gap & 0xFFFF));
      gap = 0;
    }
    put_word(uint16_t(a.symbol_code << 10 | int(gap)));
    if (!a.aux.empty()) {
      require(a.aux.size() <= 1023, "aux text too long");
      put_word(uint16_t(63 << 10 | int(a.aux.size())));
      out += a.aux;
      if (a.aux.size() % 2) out.push_back('\0');
    }
    time = a.sample_index;
  }
  put_word(0);
  return out;
}

}  // namespace cfan::wfdb
