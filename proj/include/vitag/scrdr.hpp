#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vitag/corpus.hpp"
#include "vitag/features.hpp"

namespace vitag {

// The window slots a rule condition can test. Word and tag slots read the
// Context directly; SfxK tests the last K code points of w0 and never
// matches a word shorter than K code points.
enum class Slot : std::uint8_t {
  WM2, WM1, W0, WP1, WP2,
  TM2, TM1, T0, TP1, TP2,
  Sfx1, Sfx2, Sfx3, Sfx4,
};

std::string_view to_string(Slot slot);
Slot parse_slot(std::string_view name);
// View of the slot's value in this context; suffix slots are excluded
// (their value is computed, see RuleCondition::matches).
std::string_view slot_view(const Context& ctx, Slot slot);

struct Conjunct {
  Slot slot;
  std::string value;
  bool operator==(const Conjunct&) const = default;
};

struct RuleCondition {
  // Empty conjunct list = always true (only the tree root uses that).
  std::vector<Conjunct> conjuncts;

  bool matches(const Context& ctx) const;
  // "w0=bàn && t-1=E". Unambiguous: words and tags contain no spaces (the
  // boundary sentinels carry one leading space, which cannot form " && ").
  std::string serialize() const;
  bool operator==(const RuleCondition&) const = default;
};

struct Rule {
  RuleCondition condition;
  Tag conclusion;

  std::string serialize() const;  // "<condition> -> <conclusion>"
  bool operator==(const Rule&) const = default;
};

// Instantiates every rule template on this context: the five window words;
// word bigrams (w-2,w0),(w-1,w0),(w-1,w+1),(w0,w+1),(w0,w+2); word trigrams
// (w-2,w-1,w0),(w-1,w0,w+1),(w0,w+1,w+2); the five window tags; tag bigrams
// (t-2,t-1),(t-1,t+1),(t+1,t+2); combined (t-1,w0),(w0,t+1),(t-1,w0,t+1),
// (t-2,t-1,w0),(w0,t+1,t+2); and suffixes of w0 of length 1..4, emitted
// only while shorter than the whole word. 30 rules when w0 has 5 or more
// code points. Every rule concludes `correct`.
std::vector<Rule> generate_candidates(const Context& ctx, const Tag& correct);

// Lexicon lookup plus ordered fallback heuristics for out-of-lexicon words:
// all digits -> M; initial uppercase -> Np; a single punctuation mark ->
// that mark (the mark "/" cannot be a tag, it falls through to the
// default); contains a digit -> M; otherwise the corpus-wide most frequent
// tag.
class InitialTagger {
 public:
  InitialTagger() = default;
  explicit InitialTagger(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}

  static InitialTagger from_corpus(const TaggedCorpus& corpus);
  static InitialTagger load(const std::string& path);
  void save(const std::string& path) const;

  const Lexicon& lexicon() const { return lexicon_; }
  Tag tag_word(std::string_view word) const;
  std::vector<Tag> tag(std::span<const std::string_view> words) const;
  Sentence tag(const Sentence& sentence) const;

 private:
  Lexicon lexicon_;
};

// One entry per training token: the token's window context carrying the
// initial tagger's output in its tag slots, plus the gold tag. Contexts
// view storage owned by the dictionary, so it is movable but not copyable.
class ObjectDictionary {
 public:
  ObjectDictionary() = default;
  ObjectDictionary(const ObjectDictionary&) = delete;
  ObjectDictionary& operator=(const ObjectDictionary&) = delete;
  ObjectDictionary(ObjectDictionary&&) = default;
  ObjectDictionary& operator=(ObjectDictionary&&) = default;

  static ObjectDictionary build(const TaggedCorpus& train, const InitialTagger& tagger);

  std::size_t size() const { return contexts_.size(); }
  const Context& context(std::size_t i) const { return contexts_[i]; }
  const Tag& correct_tag(std::size_t i) const { return correct_[i]; }
  std::string_view initial_tag(std::size_t i) const { return contexts_[i].tag(0); }
  std::size_t initial_error_count() const;

 private:
  struct SentenceStore {
    std::vector<std::string> words;
    std::vector<Tag> tags;
    std::vector<std::string_view> word_views;
    std::vector<std::string_view> tag_views;
  };
  std::vector<SentenceStore> sentences_;
  std::vector<Context> contexts_;
  std::vector<Tag> correct_;
};

struct ScrdrNode {
  Rule rule;
  int except_child = -1;
  int if_not_child = -1;
  int depth = 0;
};

// Exception tree over an arena of nodes. Node 0 is the default rule: its
// condition is empty (always fires) and its conclusion is the pass-through
// of the context's own t0, written "*" in the text format.
class ScrdrTree {
 public:
  ScrdrTree();

  const std::vector<ScrdrNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  int add_except_child(int parent, Rule rule);
  int add_if_not_sibling(int node, Rule rule);
  // Appends at the end of the node's exception chain: becomes the except
  // child when there is none, otherwise the last chain node's if-not.
  int attach_exception(int node, Rule rule);

  // Index of the last node whose condition fired; 0 when only the default
  // fired. The walk descends to a node's except child on a match and to
  // its if-not child on a failure.
  std::size_t walk(const Context& ctx) const;
  // Conclusion of the last fired node; the default node passes t0 through.
  Tag conclude(const Context& ctx) const;

  // Indented text, one node per line, "EXCEPT"/"IF-NOT" markers, two
  // spaces per depth level. if-not siblings print at their chain's depth.
  std::string serialize() const;
  static ScrdrTree deserialize(std::string_view text);
  void save(const std::string& path) const;
  static ScrdrTree load(const std::string& path);
  static bool sniff(std::string_view bytes);

 private:
  std::vector<ScrdrNode> nodes_;
};

struct GrowParams {
  // A rule is attached only when it fires on at least min_fired of the
  // node's objects and repairs at least min_gain more of them than it
  // breaks; nodes at max_depth get no exceptions.
  int min_fired = 2;
  int min_gain = 2;
  int max_depth = 6;
};

struct GrowStats {
  std::size_t initial_errors = 0;
  std::size_t final_errors = 0;
  std::size_t rules_attached = 0;
  std::size_t layer1_nodes = 0;
  std::vector<std::size_t> errors_after_each_attachment;
};

// Builds the default node, one layer-1 node "if t0=T then T" per distinct
// initial tag (in ascending tag order), then grows exceptions node by node.
// At each node the candidate maximizing the net error reduction over that
// node's objects wins; ties prefer fewer newly-broken objects, then the
// lexicographically smallest serialized condition, then the smallest
// conclusion. Total training errors never increase during growth; the
// function verifies its error bookkeeping against a full re-count before
// returning.
ScrdrTree grow_tree(const ObjectDictionary& dict, const GrowParams& params = {},
                    GrowStats* stats = nullptr);

// Initial-tags the words, then walks each token's context (tags = initial
// output, never the partially corrected sequence) through the tree.
std::vector<Tag> scrdr_tag(const ScrdrTree& tree, const InitialTagger& tagger,
                           std::span<const std::string_view> words);
Sentence scrdr_tag(const ScrdrTree& tree, const InitialTagger& tagger,
                   const Sentence& sentence);

}  // namespace vitag
