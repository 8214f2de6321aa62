#include "vitag/text.hpp"

#include <algorithm>

namespace vitag::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

int sequence_length(unsigned char b) {
  if (b < 0x80) return 1;
  if ((b & 0xE0) == 0xC0) return 2;
  if ((b & 0xF0) == 0xE0) return 3;
  if ((b & 0xF8) == 0xF0) return 4;
  return 0;
}

}  // namespace

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char b = static_cast<unsigned char>(s[i]);
    int len = sequence_length(b);
    if (len == 0 || i + static_cast<std::size_t>(len) > s.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    char32_t cp = 0;
    switch (len) {
      case 1: cp = b; break;
      case 2: cp = b & 0x1F; break;
      case 3: cp = b & 0x0F; break;
      case 4: cp = b & 0x07; break;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      unsigned char c = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((c & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (c & 0x3F);
    }
    if (!ok) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
  std::string out;
  for (char32_t cp : cps) out += encode_utf8(cp);
  return out;
}

std::size_t cp_length(std::string_view s) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    int len = sequence_length(static_cast<unsigned char>(s[i]));
    i += (len == 0) ? 1 : static_cast<std::size_t>(len);
    ++n;
  }
  return n;
}

std::string cp_suffix(std::string_view s, std::size_t k) {
  auto cps = decode_utf8(s);
  if (k >= cps.size()) return std::string(s);
  return encode_utf8(std::vector<char32_t>(cps.end() - static_cast<long>(k), cps.end()));
}

bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

bool is_upper(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return true;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return true;  // À–Þ minus ×
  // Latin Extended-A. The even/odd pairing holds except in the Ĺ–ň span.
  if (cp >= 0x100 && cp <= 0x137) return (cp % 2) == 0;
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2) == 1;
  if (cp >= 0x14A && cp <= 0x177) return (cp % 2) == 0;
  if (cp == 0x178) return true;  // Ÿ
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2) == 1;
  if (cp == 0x1A0 || cp == 0x1AF) return true;  // Ơ Ư
  // Latin Extended Additional (Vietnamese vowels with tone marks).
  if (cp >= 0x1E00 && cp <= 0x1EFF) return (cp % 2) == 0;
  return false;
}

bool is_lower(char32_t cp) {
  if (cp >= U'a' && cp <= U'z') return true;
  if (cp == 0xDF) return true;  // ß
  if (cp >= 0xE0 && cp <= 0xFF && cp != 0xF7) return true;
  if (cp >= 0x100 && cp <= 0x137) return (cp % 2) == 1;
  if (cp == 0x138) return true;  // ĸ
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2) == 0;
  if (cp == 0x149) return true;
  if (cp >= 0x14A && cp <= 0x177) return (cp % 2) == 1;
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2) == 0;
  if (cp == 0x17F) return true;  // ſ
  if (cp == 0x1A1 || cp == 0x1B0) return true;  // ơ ư
  if (cp >= 0x1E00 && cp <= 0x1EFF) return (cp % 2) == 1;
  return false;
}

bool is_letter(char32_t cp) {
  if (is_upper(cp) || is_lower(cp)) return true;
  // Treat the rest of the Latin blocks as letters even where casing is
  // not modeled above.
  if (cp >= 0x180 && cp <= 0x24F) return true;
  return false;
}

bool is_punct(char32_t cp) {
  // ASCII P* minus '_' (reserved syllable joiner).
  switch (cp) {
    case U'!': case U'"': case U'#': case U'%': case U'&': case U'\'':
    case U'(': case U')': case U'*': case U',': case U'-': case U'.':
    case U'/': case U':': case U';': case U'?': case U'@': case U'[':
    case U'\\': case U']': case U'{': case U'}':
      return true;
    default:
      break;
  }
  // Latin-1 punctuation marks.
  if (cp == 0xA1 || cp == 0xA7 || cp == 0xAB || cp == 0xB6 || cp == 0xB7 ||
      cp == 0xBB || cp == 0xBF) {
    return true;
  }
  // General Punctuation: dashes, quotes, '…', '‰', primes.
  if (cp >= 0x2010 && cp <= 0x2027) return true;
  if (cp >= 0x2030 && cp <= 0x205E) return true;
  return false;
}

bool contains_digit(std::string_view word) {
  return std::any_of(word.begin(), word.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

bool all_digits(std::string_view word) {
  if (word.empty()) return false;
  return std::all_of(word.begin(), word.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

bool is_numeric_word(std::string_view word) {
  if (word.empty()) return false;
  bool has_digit = false;
  for (char c : word) {
    if (c >= '0' && c <= '9') {
      has_digit = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return has_digit;
}

bool contains_punct(std::string_view word) {
  for (char32_t cp : decode_utf8(word)) {
    if (is_punct(cp)) return true;
  }
  return false;
}

bool contains_hyphen(std::string_view word) {
  return word.find('-') != std::string_view::npos;
}

bool contains_comma(std::string_view word) {
  return word.find(',') != std::string_view::npos;
}

bool is_single_punct(std::string_view word) {
  auto cps = decode_utf8(word);
  return cps.size() == 1 && is_punct(cps[0]);
}

bool all_punct(std::string_view word) {
  auto cps = decode_utf8(word);
  if (cps.empty()) return false;
  return std::all_of(cps.begin(), cps.end(), [](char32_t cp) { return is_punct(cp); });
}

bool starts_uppercase(std::string_view word) {
  auto cps = decode_utf8(word);
  return !cps.empty() && is_upper(cps[0]);
}

bool contains_uppercase(std::string_view word) {
  for (char32_t cp : decode_utf8(word)) {
    if (is_upper(cp)) return true;
  }
  return false;
}

bool all_uppercase(std::string_view word) {
  bool saw_letter = false;
  for (char32_t cp : decode_utf8(word)) {
    if (is_lower(cp)) return false;
    if (is_upper(cp)) saw_letter = true;
  }
  return saw_letter;
}

std::vector<std::string> syllables(std::string_view word) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = word.find('_', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(word.substr(start));
      break;
    }
    out.emplace_back(word.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string first_syllable(std::string_view word) {
  std::size_t pos = word.find('_');
  return std::string(pos == std::string_view::npos ? word : word.substr(0, pos));
}

std::string last_syllable(std::string_view word) {
  std::size_t pos = word.rfind('_');
  return std::string(pos == std::string_view::npos ? word : word.substr(pos + 1));
}

std::size_t syllable_count(std::string_view word) {
  return static_cast<std::size_t>(std::count(word.begin(), word.end(), '_')) + 1;
}

char32_t base_letter(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp >= U'a' && cp <= U'z') return cp;
  // Latin-1 accented vowels.
  auto in = [cp](char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; };
  char32_t c = cp;
  if (in(0xC0, 0xDE) && cp != 0xD7) c = cp + 0x20;  // lowercase Latin-1 first
  if (c >= 0xE0 && c <= 0xE5) return U'a';
  if (c == 0xE8 || c == 0xE9 || c == 0xEA || c == 0xEB) return U'e';
  if (c >= 0xEC && c <= 0xEF) return U'i';
  if ((c >= 0xF2 && c <= 0xF6) || c == 0xF8) return U'o';
  if (c >= 0xF9 && c <= 0xFC) return U'u';
  if (c == 0xFD || c == 0xFF) return U'y';
  if (c == 0xF0) return U'd';  // ð, repaired to đ upstream
  if (cp == 0x102 || cp == 0x103) return U'a';   // Ă ă
  if (cp == 0x110 || cp == 0x111) return U'd';   // Đ đ
  if (cp == 0x128 || cp == 0x129) return U'i';   // Ĩ ĩ
  if (cp == 0x168 || cp == 0x169) return U'u';   // Ũ ũ
  if (cp == 0x1A0 || cp == 0x1A1) return U'o';   // Ơ ơ
  if (cp == 0x1AF || cp == 0x1B0) return U'u';   // Ư ư
  // Latin Extended Additional: Vietnamese vowel + tone block.
  if (cp >= 0x1EA0 && cp <= 0x1EB7) return U'a';
  if (cp >= 0x1EB8 && cp <= 0x1EC7) return U'e';
  if (cp >= 0x1EC8 && cp <= 0x1ECB) return U'i';
  if (cp >= 0x1ECC && cp <= 0x1EE3) return U'o';
  if (cp >= 0x1EE4 && cp <= 0x1EF1) return U'u';
  if (cp >= 0x1EF2 && cp <= 0x1EF9) return U'y';
  return cp;
}

bool is_vowel_letter(char32_t cp) {
  switch (base_letter(cp)) {
    case U'a': case U'e': case U'i': case U'o': case U'u': case U'y':
      return true;
    default:
      return false;
  }
}

std::string onset(std::string_view syllable) {
  auto cps = decode_utf8(syllable);
  std::vector<char32_t> head;
  for (char32_t cp : cps) {
    if (is_letter(cp) && !is_vowel_letter(cp)) {
      head.push_back(cp);
    } else {
      break;
    }
  }
  return encode_utf8(head);
}

std::string final_grapheme(std::string_view syllable) {
  auto cps = decode_utf8(syllable);
  if (cps.empty()) return {};
  return encode_utf8(cps.back());
}

}  // namespace vitag::text
