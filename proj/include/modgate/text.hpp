#pragma once

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "modgate/errors.hpp"

namespace modgate {

namespace detail {

inline const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw Error("ICU NFC normalizer unavailable");
  }
  return *n;
}

inline icu::UnicodeString to_nfc(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc().normalize(s, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  return out;
}

inline std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

inline UChar32 map_typographic(UChar32 c) {
  switch (c) {
    case 0x2018: case 0x2019: case 0x201A: case 0x201B:
      return '\'';
    case 0x201C: case 0x201D: case 0x201E: case 0x201F:
      return '"';
    case 0x2010: case 0x2011: case 0x2012: case 0x2013:
    case 0x2014: case 0x2015: case 0x2212:
      return '-';
    default:
      return c;
  }
}

inline bool is_line_control(UChar32 c) {
  return c == '\n' || c == '\r' || c == '\t' || c == '\v' || c == '\f' ||
         c == 0x85;
}

}  // namespace detail

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Unicode full case folding; used for every case-insensitive comparison.
inline std::string casefold(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.foldCase();
  return detail::to_utf8(u);
}

inline std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

/// Cleans a raw comment before it is labeled or sent to a model.
///
/// Steps, in order: NFC composition; curly quotes and dashes to ASCII;
/// control characters dropped (line/tab controls become spaces); whitespace
/// runs collapsed to one space; runs of three or more of the same
/// punctuation mark collapsed to one; trim. A final NFC pass recomposes
/// sequences exposed by control removal, which keeps the function
/// idempotent. Invalid UTF-8 decodes to U+FFFD.
inline std::string normalize_text(std::string_view raw) {
  icu::UnicodeString src = detail::to_nfc(icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size()))));

  // Typographic mapping and control removal.
  std::vector<UChar32> cps;
  cps.reserve(static_cast<std::size_t>(src.length()));
  for (int32_t i = 0; i < src.length(); i = src.moveIndex32(i, 1)) {
    UChar32 c = detail::map_typographic(src.char32At(i));
    if (u_charType(c) == U_CONTROL_CHAR) {
      if (!detail::is_line_control(c)) continue;
      c = ' ';
    }
    cps.push_back(c);
  }

  // Whitespace collapse.
  std::vector<UChar32> ws;
  ws.reserve(cps.size());
  for (UChar32 c : cps) {
    if (u_isUWhiteSpace(c)) {
      if (!ws.empty() && ws.back() == ' ') continue;
      ws.push_back(' ');
    } else {
      ws.push_back(c);
    }
  }

  // Punctuation runs of 3+ identical marks become one mark.
  std::vector<UChar32> punct;
  punct.reserve(ws.size());
  for (std::size_t i = 0; i < ws.size();) {
    std::size_t j = i + 1;
    while (j < ws.size() && ws[j] == ws[i]) ++j;
    std::size_t run = j - i;
    if (run >= 3 && u_ispunct(ws[i])) run = 1;
    punct.insert(punct.end(), run, ws[i]);
    i = j;
  }

  std::size_t b = 0;
  std::size_t e = punct.size();
  while (b < e && punct[b] == ' ') ++b;
  while (e > b && punct[e - 1] == ' ') --e;

  icu::UnicodeString out;
  for (std::size_t i = b; i < e; ++i) out.append(punct[i]);
  return detail::to_utf8(detail::to_nfc(out));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw FileError(path.string(), "cannot read file");
  return buf.str();
}

// Writes through a temporary sibling and renames, so readers never observe a
// partially written output.
inline void write_file(const std::filesystem::path& path,
                       std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError(tmp.string(), "cannot create file");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw FileError(tmp.string(), "cannot write file");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FileError(path.string(), "cannot rename output");
}

// Splits on '\n', dropping a trailing '\r' from each line.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      std::string_view line = text.substr(start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) lines.push_back(line);
      break;
    }
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

}  // namespace modgate
