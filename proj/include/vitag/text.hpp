#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Character-level helpers for the treebank encoding: UTF-8 text, syllables
// joined by '_', Latin script with Vietnamese diacritics.
namespace vitag::text {

// Decodes UTF-8 into code points. Invalid byte sequences decode to U+FFFD,
// one replacement per bad byte, so the function is total.
std::vector<char32_t> decode_utf8(std::string_view s);

std::string encode_utf8(char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

// Number of code points in s.
std::size_t cp_length(std::string_view s);

// Last k code points of s, or all of s when it is shorter.
std::string cp_suffix(std::string_view s, std::size_t k);

bool is_ascii_digit(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
bool is_letter(char32_t cp);

// Unicode punctuation classes P* over the blocks this corpus uses (ASCII,
// Latin-1 marks, General Punctuation incl. '…' and '–'). '_' is excluded:
// it is the reserved syllable joiner, not punctuation, in this encoding.
bool is_punct(char32_t cp);

bool contains_digit(std::string_view word);
bool all_digits(std::string_view word);
// Digits optionally containing '.' or ',' separators ("21", "3,5", "1.000").
bool is_numeric_word(std::string_view word);
bool contains_punct(std::string_view word);
bool contains_hyphen(std::string_view word);
bool contains_comma(std::string_view word);
// Word is exactly one punctuation code point.
bool is_single_punct(std::string_view word);
// Word consists only of punctuation code points (and is non-empty).
bool all_punct(std::string_view word);

bool starts_uppercase(std::string_view word);
bool contains_uppercase(std::string_view word);
// Every cased letter is uppercase and at least one letter is present.
bool all_uppercase(std::string_view word);

// Split on '_'. Empty segments are preserved (raw corpora may carry
// doubled separators until cleaned).
std::vector<std::string> syllables(std::string_view word);
std::string first_syllable(std::string_view word);
std::string last_syllable(std::string_view word);
std::size_t syllable_count(std::string_view word);

// Diacritic-stripped base letter, lowercased, for the Vietnamese repertoire
// ('Ậ' -> 'a', 'đ' -> 'd'). Code points outside the known tables map to
// themselves lowercased where ASCII.
char32_t base_letter(char32_t cp);
bool is_vowel_letter(char32_t cp);

// Leading consonant cluster of a syllable ("đẹp" -> "đ", "nghe" -> "ngh");
// empty when the syllable starts with a vowel.
std::string onset(std::string_view syllable);
// Last code point of the syllable.
std::string final_grapheme(std::string_view syllable);

}  // namespace vitag::text
