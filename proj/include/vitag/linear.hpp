#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vitag/corpus.hpp"
#include "vitag/features.hpp"

namespace vitag {

enum class Loss { MultinomialLogistic, AveragedPerceptron };
enum class DecodeMode { LeftToRight, TwoPass };

Loss parse_loss(std::string_view name);            // "logistic" | "perceptron"
DecodeMode parse_decode_mode(std::string_view name);  // "ltr" | "two-pass"
std::string_view to_string(Loss loss);
std::string_view to_string(DecodeMode mode);

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 0.1;
  double l2 = 0.0;
  std::uint64_t seed = 42;
  bool shuffle = true;
  Loss loss = Loss::MultinomialLogistic;
};

struct TrainStats {
  std::size_t examples = 0;
  std::size_t features = 0;
  std::size_t labels = 0;
  // Exact batch objective after each epoch (multinomial logistic only).
  std::vector<double> epoch_loss;
  // Fraction of examples predicted correctly during each epoch's pass,
  // measured before each update, with gold context tags.
  std::vector<double> epoch_accuracy;
};

// A multiclass training problem in indexed form: per example the active
// feature ids and the gold label id. Weights are row-major, one row of
// num_labels values per feature.
struct Problem {
  std::vector<std::vector<std::int32_t>> features;
  std::vector<std::int32_t> labels;
  std::size_t num_features = 0;
  std::size_t num_labels = 0;
};

// J(w) = sum_i -log softmax(scores_i)[y_i] + (l2/2)*|w|^2. When grad is
// non-null it receives dJ/dw, same layout as weights. This is the exact
// objective the SGD loop descends; tests compare its gradient against
// finite differences.
double logistic_loss_and_grad(const Problem& problem,
                              std::span<const double> weights, double l2,
                              std::vector<double>* grad);

class LinearModel {
 public:
  LinearModel() = default;

  // Deterministic given (corpus, sets, cfg, clusters). Training contexts
  // carry gold tags on both sides; the exposure mismatch with decode-time
  // predicted tags is inherent to this training scheme. The feature index
  // is built during the first pass over the data and frozen; keys unseen
  // in training score zero later.
  static LinearModel train(const TaggedCorpus& corpus,
                           std::span<const TemplateSet> sets,
                           const TrainConfig& cfg,
                           const ClusterMap* clusters = nullptr,
                           TrainStats* stats = nullptr);

  // LeftToRight assigns greedily, reading already-assigned tags on the left
  // and the boundary sentinel on the right. TwoPass first decodes with the
  // right-tag-reading template sets disabled, then re-decodes reading right
  // tags from the first pass and left tags from its own assignments.
  std::vector<Tag> decode(std::span<const std::string_view> words,
                          DecodeMode mode = DecodeMode::TwoPass) const;
  Sentence decode(const Sentence& sentence,
                  DecodeMode mode = DecodeMode::TwoPass) const;

  // Scores every label for one context (all template sets). Exposed for
  // tests; the decoder uses the same path.
  void score(const Context& ctx, std::vector<double>& scores) const;
  // Argmax label, ties broken by lowest label index.
  const Tag& predict(const Context& ctx) const;

  const std::vector<Tag>& labels() const { return labels_; }
  const std::vector<TemplateSet>& sets() const { return sets_; }
  std::size_t feature_count() const { return feature_keys_.size(); }
  const Lexicon& lexicon() const { return lexicon_; }
  bool has_clusters() const { return has_clusters_; }
  const ClusterMap& clusters() const { return clusters_; }
  double weight(std::string_view feature_key, std::string_view label) const;

  // Single versioned binary file, magic "VTLM". The training lexicon (and
  // cluster map, when the model uses one) is embedded so that tagging and
  // unknown-word evaluation need nothing beyond the model file.
  std::string serialize() const;
  static LinearModel deserialize(std::string_view bytes);
  void save(const std::string& path) const;
  static LinearModel load(const std::string& path);

  static bool sniff(std::string_view bytes);  // starts with the magic?

 private:
  std::vector<Tag> labels_;
  std::vector<std::string> feature_keys_;  // index order
  StringMap<std::int32_t> feature_index_;
  std::vector<double> weights_;  // [features x labels], row-major
  std::vector<TemplateSet> sets_;
  Lexicon lexicon_;
  ClusterMap clusters_;
  bool has_clusters_ = false;

  void score_sets(const Context& ctx, std::span<const TemplateSet> sets,
                  std::vector<std::string>& key_buf,
                  std::vector<double>& scores) const;
  std::size_t argmax_sets(const Context& ctx, std::span<const TemplateSet> sets,
                          std::vector<std::string>& key_buf,
                          std::vector<double>& score_buf) const;
  void decode_into(std::span<const std::string_view> words,
                   DecodeMode mode, std::vector<std::size_t>& out) const;
};

}  // namespace vitag
