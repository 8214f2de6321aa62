#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vitag/corpus.hpp"
#include "vitag/linear.hpp"
#include "vitag/scrdr.hpp"

namespace vitag {

// Uniform decoding interface over the two tagger families, so evaluation
// and timing drive either through the same calls.
class SentenceTagger {
 public:
  virtual ~SentenceTagger() = default;
  virtual std::vector<Tag> tag(std::span<const std::string_view> words) const = 0;
  virtual std::string id() const = 0;        // "linear" or "scrdr"
  virtual std::string features() const = 0;  // "spl+bi+...", "-" for scrdr
  virtual const Lexicon& lexicon() const = 0;
};

class LinearSentenceTagger final : public SentenceTagger {
 public:
  explicit LinearSentenceTagger(LinearModel model, DecodeMode mode = DecodeMode::TwoPass)
      : model_(std::move(model)), mode_(mode) {}

  std::vector<Tag> tag(std::span<const std::string_view> words) const override {
    return model_.decode(words, mode_);
  }
  std::string id() const override { return "linear"; }
  std::string features() const override { return feature_sets_name(model_.sets()); }
  const Lexicon& lexicon() const override { return model_.lexicon(); }
  const LinearModel& model() const { return model_; }

 private:
  LinearModel model_;
  DecodeMode mode_;
};

class ScrdrSentenceTagger final : public SentenceTagger {
 public:
  ScrdrSentenceTagger(ScrdrTree tree, InitialTagger initial)
      : tree_(std::move(tree)), initial_(std::move(initial)) {}

  std::vector<Tag> tag(std::span<const std::string_view> words) const override {
    return scrdr_tag(tree_, initial_, words);
  }
  std::string id() const override { return "scrdr"; }
  std::string features() const override { return "-"; }
  const Lexicon& lexicon() const override { return initial_.lexicon(); }
  const ScrdrTree& tree() const { return tree_; }

 private:
  ScrdrTree tree_;
  InitialTagger initial_;
};

struct FoldRow {
  int fold = 0;  // 1-based
  std::uint64_t total_tokens = 0;
  std::uint64_t unknown_tokens = 0;
  std::uint64_t correct_tokens = 0;
  std::uint64_t unknown_correct = 0;

  double overall_acc() const {
    return total_tokens == 0 ? 0.0
                             : static_cast<double>(correct_tokens) / static_cast<double>(total_tokens);
  }
  // Absent (not zero) when the row has no unknown tokens.
  std::optional<double> unknown_acc() const {
    if (unknown_tokens == 0) return std::nullopt;
    return static_cast<double>(unknown_correct) / static_cast<double>(unknown_tokens);
  }
};

// Accuracy (overall and over unknown words) plus optional throughput for
// one tagger configuration. Aggregates are micro-averaged: every per-fold
// count is summed before dividing, so the report can be recomputed from
// its own fold rows.
struct EvalReport {
  std::string tagger_id;
  std::string feature_sets;
  double overall_acc = 0.0;
  std::optional<double> unknown_acc;
  std::uint64_t total_tokens = 0;
  std::uint64_t unknown_tokens = 0;
  std::optional<double> speed_wps;
  std::vector<FoldRow> fold_breakdown;

  // Both renderings are byte-deterministic: percentages fixed to two
  // decimals, speed to two decimals, absent values printed as "-" (text)
  // or an empty field (CSV).
  std::string render_text() const;
  std::string render_csv() const;
};

// Token-level comparison of a predicted corpus against gold. Throws
// DataError naming the first divergent sentence when the two corpora are
// not token-aligned. tagger_id/feature_sets/speed are left for the caller.
EvalReport evaluate(const TaggedCorpus& pred, const TaggedCorpus& gold,
                    const Lexicon& train_lexicon);

struct TaggerConfig {
  std::string tagger = "linear";  // "linear" | "scrdr"
  std::vector<TemplateSet> sets{TemplateSet::Spl};
  TrainConfig train;
  GrowParams grow;
  const ClusterMap* clusters = nullptr;
  DecodeMode mode = DecodeMode::TwoPass;
  bool shuffle_folds = true;
  bool parallel_folds = false;
};

// Trains the configured tagger (linear or scrdr) on the given corpus.
std::unique_ptr<SentenceTagger> train_tagger(const TaggedCorpus& train,
                                             const TaggerConfig& config);

// k-fold cross-validation: trains on k-1 folds, tests on the held-out one,
// micro-averages across folds. Unknown words are counted against the
// training lexicon of each fold separately. Errors raised while processing
// a fold are rethrown with the fold id prefixed. With parallel_folds the
// folds run on separate threads (each fold's model is private and the
// result order is fixed), which cannot change the report.
EvalReport crossvalidate(const TaggedCorpus& corpus, int k, std::uint64_t seed,
                         const TaggerConfig& config);

// Test seam for the throughput timer; the default reads a monotonic clock.
struct SpeedHooks {
  std::function<std::uint64_t()> now_ns;
};

// Mean words-per-second over `repetitions` timed runs of the tagger across
// the whole corpus. The timed region of each run contains only tag()
// calls: sentence views are prepared before the clock starts and the clock
// is read exactly twice per repetition. Single-threaded by design.
// repetitions < 3 is a ConfigError, an empty corpus a DataError.
double measure_speed(const SentenceTagger& tagger,
                     const std::vector<Sentence>& raw_corpus,
                     int repetitions, const SpeedHooks* hooks = nullptr);

struct AblationRow {
  std::string label;  // "spl", "spl+bi", ..., "scrdr"
  bool skipped = false;
  std::string skip_reason;
  EvalReport report;  // empty when skipped
};

// Cross-validated accuracy for the four cumulative linear feature sets and
// the rule tagger, in a fixed row order.
struct AblationReport {
  std::vector<AblationRow> rows;
  std::string footnote;

  std::string render_text() const;
  std::string render_csv() const;
};

// Runs crossvalidate for spl, spl+bi, spl+bi+affix, spl+bi+affix+ds (the
// ds row is marked skipped when no clusters are given; the others still
// run), then the SCRDR tagger as a fifth row.
AblationReport ablate(const TaggedCorpus& corpus, int k, std::uint64_t seed,
                      const ClusterMap* clusters = nullptr,
                      const TrainConfig& train = {}, const GrowParams& grow = {},
                      bool parallel_folds = false);

}  // namespace vitag
