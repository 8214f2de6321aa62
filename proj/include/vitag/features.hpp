#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vitag/corpus.hpp"

namespace vitag {

namespace sentinel {
// Reserved boundary strings. Real tokens come from whitespace-split text and
// can never start with a space, so collisions are impossible.
inline constexpr std::string_view kBosWord1 = " BOS1";
inline constexpr std::string_view kBosWord2 = " BOS2";
inline constexpr std::string_view kEosWord1 = " EOS1";
inline constexpr std::string_view kEosWord2 = " EOS2";
inline constexpr std::string_view kBosTag = " BOS";
// Right-boundary tag, also standing in for right tags that have no
// assignment yet during left-to-right decoding.
inline constexpr std::string_view kEosTag = " EOS";
}  // namespace sentinel

// A 5-word window centered on one token. Slot 0 holds w-2, slot 4 holds
// w+2. The tag slots carry whatever tag sequence the caller is working
// with: gold tags while training, the initial tagger's output for rule
// tagging, partial assignments while decoding.
struct Context {
  std::array<std::string_view, 5> words{};
  std::array<std::string_view, 5> tags{};
  std::size_t position = 0;
  std::size_t sentence_length = 0;

  std::string_view word(int offset) const {
    return words[static_cast<std::size_t>(offset + 2)];
  }
  std::string_view tag(int offset) const {
    return tags[static_cast<std::size_t>(offset + 2)];
  }
};

enum class RightTags { Available, Hidden };

// Builds the window around `position`. Out-of-range slots take the boundary
// sentinels. With RightTags::Hidden the tags at offsets 0..+2 read as the
// right-boundary sentinel regardless of the span's contents; the
// left-to-right decoder uses this for positions it has not reached yet.
// words and tags must be the same length; the string_views must outlive the
// Context.
Context make_context(std::span<const std::string_view> words,
                     std::span<const std::string_view> tags,
                     std::size_t position,
                     RightTags right = RightTags::Available);

// word -> cluster-id bit-string, from a Brown clustering run. Lookup of an
// absent word yields kUnknownId. prefix_lengths selects which bit-string
// prefixes are emitted as features alongside the full id.
class ClusterMap {
 public:
  static constexpr std::string_view kUnknownId = "UNK";

  ClusterMap() = default;
  explicit ClusterMap(StringMap<std::string> assignments,
                      std::vector<int> prefix_lengths = {4, 6, 10});

  std::string_view lookup(std::string_view word) const;
  bool empty() const { return assignments_.empty(); }
  std::size_t size() const { return assignments_.size(); }

  const std::vector<int>& prefix_lengths() const { return prefix_lengths_; }
  void set_prefix_lengths(std::vector<int> lengths);
  const StringMap<std::string>& all() const { return assignments_; }

 private:
  StringMap<std::string> assignments_;
  std::vector<int> prefix_lengths_{4, 6, 10};
};

// Parses "bitstring<TAB>word[<TAB>count]" lines, the output format of the
// usual Brown clustering tools. The last line wins on duplicate words (one
// warning per duplicate). Malformed lines throw ParseError with the line
// number.
ClusterMap load_cluster_file(const std::string& path,
                             std::vector<std::string>* warnings = nullptr);

enum class TemplateSet { Spl, Bi, Affix, Ds, Jvn, Vn };

std::string_view to_string(TemplateSet set);
// Parses selections such as "spl" or "spl+bi+affix+ds".
std::vector<TemplateSet> parse_feature_sets(std::string_view text);
std::string feature_sets_name(std::span<const TemplateSet> sets);

// Bi features read t+1; a left-to-right decoder has no value for it, which
// is what the two-pass decoding mode exists to supply.
bool uses_right_tags(TemplateSet set);
bool uses_right_tags(std::span<const TemplateSet> sets);
bool needs_clusters(TemplateSet set);
bool needs_clusters(std::span<const TemplateSet> sets);
bool needs_lexicon(TemplateSet set);
bool needs_lexicon(std::span<const TemplateSet> sets);

// Feature keys are "template=value" strings. Template ids never contain
// '=', so the first '=' splits a key unambiguously; composite values join
// their parts with a single space, which cannot occur inside a word or tag.
//
// Appends the keys for every requested set, in a fixed order, to out.
// Throws ConfigError when a set needs clusters or a lexicon that was not
// supplied.
void extract(const Context& ctx, std::span<const TemplateSet> sets,
             std::vector<std::string>& out,
             const ClusterMap* clusters = nullptr,
             const Lexicon* lexicon = nullptr);

std::vector<std::string> extract(const Context& ctx,
                                 std::span<const TemplateSet> sets,
                                 const ClusterMap* clusters = nullptr,
                                 const Lexicon* lexicon = nullptr);

// The two legacy preset extractors, also reachable through extract() with
// TemplateSet::Jvn / TemplateSet::Vn.
void extract_jvn(const Context& ctx, const Lexicon& lexicon,
                 std::vector<std::string>& out);
void extract_vn(const Context& ctx, std::vector<std::string>& out);

// Reduplication predicates over the syllables of a word, exposed for tests.
// A word is fully repetitive when it has at least two syllables and they
// are all identical. It is partially repetitive when it has at least two
// syllables and every adjacent pair shares a non-empty onset or shares its
// final grapheme; this operational test is the one place that definition
// lives.
bool is_full_repetitive(std::string_view word);
bool is_partial_repetitive(std::string_view word);

}  // namespace vitag
