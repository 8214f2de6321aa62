#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vitag/error.hpp"

namespace vitag {

// Tags are short strings ("N", "Np", ","). Invariants (non-empty, no
// whitespace, no '/') are enforced by TagSet::validate and at parse time.
using Tag = std::string;

struct TransparentHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const {
    return std::hash<std::string_view>{}(s);
  }
};
struct TransparentEq {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const { return a == b; }
};
template <class V>
using StringMap = std::unordered_map<std::string, V, TransparentHash, TransparentEq>;
using StringSet = std::unordered_set<std::string, TransparentHash, TransparentEq>;

// The tag inventory. Open sets admit unseen tags (the caller warns once per
// distinct tag); closed sets reject them at parse time.
class TagSet {
 public:
  TagSet() = default;
  TagSet(std::vector<Tag> tags, bool open);

  // The 18 base categories, open mode (compound tags such as Ny, Nb, Vb and
  // punctuation tags are admitted with a warning).
  static TagSet builtin();
  static TagSet from_file(const std::string& path, bool open);

  bool contains(std::string_view tag) const;
  bool open() const { return open_; }
  const std::vector<Tag>& tags() const { return tags_; }

  // Throws ParseError when the label shape is invalid (empty, whitespace,
  // '/'); returns false when the tag is merely absent from a closed set.
  static bool valid_label(std::string_view tag);

 private:
  std::vector<Tag> tags_;
  StringSet index_;
  bool open_ = true;
};

struct Token {
  std::string word;
  Tag tag;  // empty = raw (untagged) text
  bool operator==(const Token&) const = default;
};

using Sentence = std::vector<Token>;

struct TaggedCorpus {
  std::vector<Sentence> sentences;
  std::string source_id;

  std::size_t token_count() const;
};

// word -> tag frequency table built from a tagged corpus. Per-word tag lists
// are ordered by descending count, ties by ascending tag label, so
// most_frequent is deterministic.
class Lexicon {
 public:
  struct Entry {
    Tag tag;
    std::uint64_t count;
    bool operator==(const Entry&) const = default;
  };

  static Lexicon from_corpus(const TaggedCorpus& corpus);
  static Lexicon load(const std::string& path);
  void save(const std::string& path) const;

  bool contains(std::string_view word) const;
  // nullptr when the word is absent.
  const Tag* most_frequent(std::string_view word) const;
  const std::vector<Entry>* entries(std::string_view word) const;
  std::uint64_t total_count(std::string_view word) const;

  // Tag with the highest corpus-wide count (ties by ascending label).
  const Tag& default_tag() const { return default_tag_; }
  std::size_t vocab_size() const { return entries_.size(); }

  const StringMap<std::vector<Entry>>& all() const { return entries_; }

 private:
  StringMap<std::vector<Entry>> entries_;
  StringMap<std::uint64_t> totals_;
  Tag default_tag_;

  void finalize();
  friend class LinearModel;
};

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // sentence index -> fold index
  std::uint64_t seed = 0;
  bool shuffled = true;

  std::vector<std::vector<std::size_t>> folds() const;
};

struct CleanReport {
  // Rule application counts, R1..R6 in spec order:
  //   R1 ("VN","Np") -> ("VN","Ny")
  //   R2 <numeric>/M followed by tuổi/Nu -> tuổi/N
  //   R3 collapse doubled '_' runs
  //   R4 split a token made of two (or more) punctuation marks
  //   R5 ð -> đ
  //   R6 token carrying more than one tag segment
  std::array<std::uint64_t, 6> counts{};
  // Tokens needing manual review: multi-tag tokens (R6) and punctuation
  // runs longer than two (R4).
  std::vector<std::string> flagged;

  std::uint64_t total() const;
  // Two-column table (rule id, occurrence count), flagged tokens appended.
  std::string render() const;
};

// One sentence per line, tokens "word/TAG" separated by spaces; the word/tag
// split is at the LAST '/'. Blank lines are skipped with a warning. Unknown
// tags warn (once per tag) on open tag sets and throw on closed ones.
TaggedCorpus parse_slash_format(std::string_view text, const TagSet& tagset,
                                std::string source_id = "<string>",
                                std::vector<std::string>* warnings = nullptr);

// Untagged text: one sentence per line, whitespace-separated words.
std::vector<Sentence> parse_raw(std::string_view text,
                                std::vector<std::string>* warnings = nullptr);

// Inverse of parse_slash_format on valid corpora.
std::string write_slash_format(const TaggedCorpus& corpus);

// Applies the six repair rules in order; total (never throws). The tag set
// is consulted by R6 to decide which trailing segments count as tags.
std::pair<TaggedCorpus, CleanReport> clean_corpus(const TaggedCorpus& corpus,
                                                  const TagSet& tagset = TagSet::builtin());

// Throws DataError on an empty corpus.
Lexicon build_lexicon(const TaggedCorpus& corpus);

// Deterministic partition of sentence indices into k folds whose sizes
// differ by at most one. shuffle=false assigns contiguous blocks.
FoldPlan split_kfold(const TaggedCorpus& corpus, int k, std::uint64_t seed,
                     bool shuffle = true);

// (total tokens, tokens whose word is absent from the lexicon).
std::pair<std::uint64_t, std::uint64_t> count_unknown(const TaggedCorpus& test,
                                                      const Lexicon& train_lexicon);

std::string read_file(const std::string& path);
// Writes via a temp file in the same directory, renamed on success, so a
// failed run never leaves partial output.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace vitag
