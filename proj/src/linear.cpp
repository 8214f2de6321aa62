#include "vitag/linear.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

namespace vitag {

Loss parse_loss(std::string_view name) {
  if (name == "logistic") return Loss::MultinomialLogistic;
  if (name == "perceptron") return Loss::AveragedPerceptron;
  throw ConfigError("unknown loss '" + std::string(name) +
                    "' (expected logistic or perceptron)");
}

DecodeMode parse_decode_mode(std::string_view name) {
  if (name == "ltr") return DecodeMode::LeftToRight;
  if (name == "two-pass") return DecodeMode::TwoPass;
  throw ConfigError("unknown decode mode '" + std::string(name) +
                    "' (expected ltr or two-pass)");
}

std::string_view to_string(Loss loss) {
  return loss == Loss::MultinomialLogistic ? "logistic" : "perceptron";
}

std::string_view to_string(DecodeMode mode) {
  return mode == DecodeMode::LeftToRight ? "ltr" : "two-pass";
}

double logistic_loss_and_grad(const Problem& problem,
                              std::span<const double> weights, double l2,
                              std::vector<double>* grad) {
  const std::size_t F = problem.num_features;
  const std::size_t L = problem.num_labels;
  if (weights.size() != F * L) throw DataError("weight vector size mismatch");
  if (problem.features.size() != problem.labels.size()) {
    throw DataError("example/label count mismatch");
  }
  if (grad) grad->assign(F * L, 0.0);

  std::vector<double> scores(L);
  std::vector<double> p(L);
  double loss = 0.0;
  for (std::size_t i = 0; i < problem.features.size(); ++i) {
    const auto& feats = problem.features[i];
    const std::int32_t y = problem.labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= L) throw DataError("label id out of range");
    std::fill(scores.begin(), scores.end(), 0.0);
    for (std::int32_t f : feats) {
      if (f < 0 || static_cast<std::size_t>(f) >= F) throw DataError("feature id out of range");
      const double* row = weights.data() + static_cast<std::size_t>(f) * L;
      for (std::size_t l = 0; l < L; ++l) scores[l] += row[l];
    }
    double mx = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      p[l] = std::exp(scores[l] - mx);
      z += p[l];
    }
    loss -= scores[static_cast<std::size_t>(y)] - mx - std::log(z);
    if (grad) {
      for (std::size_t l = 0; l < L; ++l) p[l] /= z;
      p[static_cast<std::size_t>(y)] -= 1.0;
      for (std::int32_t f : feats) {
        double* row = grad->data() + static_cast<std::size_t>(f) * L;
        for (std::size_t l = 0; l < L; ++l) row[l] += p[l];
      }
    }
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    loss += 0.5 * l2 * weights[i] * weights[i];
    if (grad) (*grad)[i] += l2 * weights[i];
  }
  return loss;
}

namespace {

void fisher_yates(std::vector<std::size_t>& order, std::mt19937_64& rng) {
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
}

std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t l = 1; l < scores.size(); ++l) {
    if (scores[l] > scores[best]) best = l;
  }
  return best;
}

}  // namespace

LinearModel LinearModel::train(const TaggedCorpus& corpus,
                               std::span<const TemplateSet> sets,
                               const TrainConfig& cfg,
                               const ClusterMap* clusters, TrainStats* stats) {
  if (corpus.sentences.empty()) throw DataError("cannot train on an empty corpus");
  if (sets.empty()) throw ConfigError("no feature sets selected");
  if (cfg.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (cfg.learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
  if (cfg.l2 < 0.0) throw ConfigError("l2 must be non-negative");
  if (needs_clusters(sets) && !clusters) {
    throw ConfigError("feature set 'ds' needs a word-cluster file");
  }

  LinearModel model;
  model.sets_.assign(sets.begin(), sets.end());
  model.lexicon_ = Lexicon::from_corpus(corpus);
  if (needs_clusters(sets)) {
    model.clusters_ = *clusters;
    model.has_clusters_ = true;
  }

  // Label inventory, most frequent first so that the argmax tie-break
  // (lowest index) prefers the more frequent tag.
  StringMap<std::uint64_t> tag_freq;
  for (const auto& sentence : corpus.sentences) {
    for (const auto& tok : sentence) ++tag_freq[tok.tag];
  }
  std::vector<std::pair<std::string, std::uint64_t>> freq(tag_freq.begin(), tag_freq.end());
  std::sort(freq.begin(), freq.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  StringMap<std::int32_t> label_index;
  for (auto& [tag, n] : freq) {
    label_index.emplace(tag, static_cast<std::int32_t>(model.labels_.size()));
    model.labels_.push_back(tag);
  }
  const std::size_t L = model.labels_.size();

  // Index every training example. This single pass defines the feature
  // space; nothing is added to it afterwards.
  Problem problem;
  problem.num_labels = L;
  std::vector<std::string> key_buf;
  std::vector<std::string_view> word_views;
  std::vector<std::string_view> tag_views;
  const ClusterMap* cl = model.has_clusters_ ? &model.clusters_ : nullptr;
  for (const auto& sentence : corpus.sentences) {
    word_views.clear();
    tag_views.clear();
    for (const auto& tok : sentence) {
      word_views.push_back(tok.word);
      tag_views.push_back(tok.tag);
    }
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      Context ctx = make_context(word_views, tag_views, i, RightTags::Available);
      key_buf.clear();
      extract(ctx, sets, key_buf, cl, &model.lexicon_);
      std::vector<std::int32_t> ids;
      ids.reserve(key_buf.size());
      for (auto& key : key_buf) {
        auto it = model.feature_index_.find(key);
        if (it == model.feature_index_.end()) {
          auto id = static_cast<std::int32_t>(model.feature_keys_.size());
          model.feature_keys_.push_back(key);
          it = model.feature_index_.emplace(std::move(key), id).first;
        }
        ids.push_back(it->second);
      }
      problem.features.push_back(std::move(ids));
      problem.labels.push_back(label_index.find(sentence[i].tag)->second);
    }
  }
  problem.num_features = model.feature_keys_.size();
  const std::size_t N = problem.features.size();
  model.weights_.assign(problem.num_features * L, 0.0);

  if (stats) {
    *stats = TrainStats{};
    stats->examples = N;
    stats->features = problem.num_features;
    stats->labels = L;
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> scores(L);
  std::vector<double> p(L);
  double* w = model.weights_.data();

  // Averaged perceptron bookkeeping: u accumulates step-weighted updates so
  // the average over all post-step weight vectors comes out in O(1) extra
  // work per update.
  std::vector<double> u;
  if (cfg.loss == Loss::AveragedPerceptron) u.assign(model.weights_.size(), 0.0);
  double step = 1.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) fisher_yates(order, rng);
    std::size_t correct = 0;
    for (std::size_t idx : order) {
      const auto& feats = problem.features[idx];
      const auto y = static_cast<std::size_t>(problem.labels[idx]);
      std::fill(scores.begin(), scores.end(), 0.0);
      for (std::int32_t f : feats) {
        const double* row = w + static_cast<std::size_t>(f) * L;
        for (std::size_t l = 0; l < L; ++l) scores[l] += row[l];
      }
      std::size_t best = argmax(scores);
      if (best == y) ++correct;

      if (cfg.loss == Loss::MultinomialLogistic) {
        double mx = scores[argmax(scores)];
        double z = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
          p[l] = std::exp(scores[l] - mx);
          z += p[l];
        }
        for (std::size_t l = 0; l < L; ++l) p[l] /= z;
        p[y] -= 1.0;
        for (std::int32_t f : feats) {
          double* row = w + static_cast<std::size_t>(f) * L;
          for (std::size_t l = 0; l < L; ++l) {
            row[l] -= cfg.learning_rate * (p[l] + cfg.l2 * row[l]);
          }
        }
      } else if (best != y) {
        for (std::int32_t f : feats) {
          auto fy = static_cast<std::size_t>(f) * L + y;
          auto fb = static_cast<std::size_t>(f) * L + best;
          w[fy] += 1.0;
          u[fy] += step;
          w[fb] -= 1.0;
          u[fb] -= step;
        }
      }
      step += 1.0;
    }
    if (stats) {
      stats->epoch_accuracy.push_back(N ? static_cast<double>(correct) / static_cast<double>(N) : 0.0);
      if (cfg.loss == Loss::MultinomialLogistic) {
        stats->epoch_loss.push_back(
            logistic_loss_and_grad(problem, model.weights_, cfg.l2, nullptr));
      }
    }
  }

  if (cfg.loss == Loss::AveragedPerceptron) {
    // mean of the weight vectors after each of the T steps:
    //   sum_t W_t = (T+1) * W_final - sum_updates step * delta
    const double T = step - 1.0;
    if (T > 0) {
      for (std::size_t i = 0; i < model.weights_.size(); ++i) {
        model.weights_[i] = ((T + 1.0) * model.weights_[i] - u[i]) / T;
      }
    }
  }
  return model;
}

void LinearModel::score_sets(const Context& ctx,
                             std::span<const TemplateSet> sets,
                             std::vector<std::string>& key_buf,
                             std::vector<double>& scores) const {
  const std::size_t L = labels_.size();
  scores.assign(L, 0.0);
  key_buf.clear();
  extract(ctx, sets, key_buf, has_clusters_ ? &clusters_ : nullptr, &lexicon_);
  for (const auto& key : key_buf) {
    auto it = feature_index_.find(key);
    if (it == feature_index_.end()) continue;
    const double* row = weights_.data() + static_cast<std::size_t>(it->second) * L;
    for (std::size_t l = 0; l < L; ++l) scores[l] += row[l];
  }
}

std::size_t LinearModel::argmax_sets(const Context& ctx,
                                     std::span<const TemplateSet> sets,
                                     std::vector<std::string>& key_buf,
                                     std::vector<double>& score_buf) const {
  score_sets(ctx, sets, key_buf, score_buf);
  return argmax(score_buf);
}

void LinearModel::score(const Context& ctx, std::vector<double>& scores) const {
  if (labels_.empty()) throw DataError("model has not been trained");
  std::vector<std::string> key_buf;
  score_sets(ctx, sets_, key_buf, scores);
}

const Tag& LinearModel::predict(const Context& ctx) const {
  if (labels_.empty()) throw DataError("model has not been trained");
  std::vector<std::string> key_buf;
  std::vector<double> score_buf;
  return labels_[argmax_sets(ctx, sets_, key_buf, score_buf)];
}

double LinearModel::weight(std::string_view feature_key, std::string_view label) const {
  auto lit = std::find(labels_.begin(), labels_.end(), label);
  if (lit == labels_.end()) throw DataError("unknown label '" + std::string(label) + "'");
  auto fit = feature_index_.find(feature_key);
  if (fit == feature_index_.end()) return 0.0;
  auto l = static_cast<std::size_t>(lit - labels_.begin());
  return weights_[static_cast<std::size_t>(fit->second) * labels_.size() + l];
}

void LinearModel::decode_into(std::span<const std::string_view> words,
                              DecodeMode mode, std::vector<std::size_t>& out) const {
  const std::size_t n = words.size();
  out.assign(n, 0);
  if (n == 0) return;
  std::vector<std::string> key_buf;
  std::vector<double> score_buf;
  std::vector<std::string_view> tag_views(n);

  if (mode == DecodeMode::LeftToRight) {
    for (std::size_t i = 0; i < n; ++i) {
      Context ctx = make_context(words, tag_views, i, RightTags::Hidden);
      std::size_t best = argmax_sets(ctx, sets_, key_buf, score_buf);
      out[i] = best;
      tag_views[i] = labels_[best];
    }
    return;
  }

  std::vector<TemplateSet> first_pass;
  for (TemplateSet s : sets_) {
    if (!uses_right_tags(s)) first_pass.push_back(s);
  }
  for (std::size_t i = 0; i < n; ++i) {
    Context ctx = make_context(words, tag_views, i, RightTags::Hidden);
    tag_views[i] = labels_[argmax_sets(ctx, first_pass, key_buf, score_buf)];
  }
  // Second pass reads right tags from the first pass; positions already
  // re-decoded are overwritten in tag_views, so left context comes from
  // this pass.
  for (std::size_t i = 0; i < n; ++i) {
    Context ctx = make_context(words, tag_views, i, RightTags::Available);
    std::size_t best = argmax_sets(ctx, sets_, key_buf, score_buf);
    out[i] = best;
    tag_views[i] = labels_[best];
  }
}

std::vector<Tag> LinearModel::decode(std::span<const std::string_view> words,
                                     DecodeMode mode) const {
  if (labels_.empty()) throw DataError("model has not been trained");
  std::vector<std::size_t> ids;
  decode_into(words, mode, ids);
  std::vector<Tag> tags;
  tags.reserve(ids.size());
  for (std::size_t id : ids) tags.push_back(labels_[id]);
  return tags;
}

Sentence LinearModel::decode(const Sentence& sentence, DecodeMode mode) const {
  std::vector<std::string_view> words;
  words.reserve(sentence.size());
  for (const auto& tok : sentence) words.push_back(tok.word);
  std::vector<Tag> tags = decode(words, mode);
  Sentence out = sentence;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].tag = std::move(tags[i]);
  return out;
}

namespace {

constexpr std::string_view kMagic = "VTLM";
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

struct Cursor {
  std::string_view data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw ParseError("model file truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    std::uint32_t len = u32();
    need(len);
    std::string s(data.substr(pos, len));
    pos += len;
    return s;
  }
};

std::vector<std::string_view> sorted_keys(const StringMap<std::vector<Lexicon::Entry>>& m) {
  std::vector<std::string_view> keys;
  keys.reserve(m.size());
  for (const auto& [k, v] : m) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace

std::string LinearModel::serialize() const {
  if (feature_keys_.empty()) throw DataError("refusing to save a model with no features");
  if (labels_.empty()) throw DataError("refusing to save a model with no labels");
  std::string out;
  out.append(kMagic);
  put_u32(out, kVersion);
  std::uint32_t flags = 0x1;  // lexicon always embedded
  if (has_clusters_) flags |= 0x2;
  put_u32(out, flags);

  put_u32(out, static_cast<std::uint32_t>(sets_.size()));
  for (TemplateSet s : sets_) put_str(out, to_string(s));
  put_u32(out, static_cast<std::uint32_t>(labels_.size()));
  for (const auto& l : labels_) put_str(out, l);
  put_u64(out, feature_keys_.size());
  for (const auto& k : feature_keys_) put_str(out, k);
  for (double v : weights_) put_f64(out, v);

  put_u64(out, lexicon_.entries_.size());
  for (auto word : sorted_keys(lexicon_.entries_)) {
    const auto& entries = lexicon_.entries_.find(word)->second;
    put_str(out, word);
    put_u32(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
      put_str(out, e.tag);
      put_u64(out, e.count);
    }
  }

  if (has_clusters_) {
    std::vector<std::string_view> words;
    words.reserve(clusters_.all().size());
    for (const auto& [w, bits] : clusters_.all()) words.push_back(w);
    std::sort(words.begin(), words.end());
    put_u64(out, words.size());
    for (auto w : words) {
      put_str(out, w);
      put_str(out, clusters_.all().find(w)->second);
    }
    put_u32(out, static_cast<std::uint32_t>(clusters_.prefix_lengths().size()));
    for (int len : clusters_.prefix_lengths()) {
      put_u32(out, static_cast<std::uint32_t>(len));
    }
  }
  return out;
}

LinearModel LinearModel::deserialize(std::string_view bytes) {
  Cursor cur{bytes};
  cur.need(4);
  if (bytes.substr(0, 4) != kMagic) throw ParseError("not a linear model file");
  cur.pos = 4;
  std::uint32_t version = cur.u32();
  if (version != kVersion) {
    throw ParseError("unsupported model version " + std::to_string(version));
  }
  std::uint32_t flags = cur.u32();
  if (!(flags & 0x1)) throw ParseError("model file lacks the embedded lexicon");

  LinearModel model;
  std::uint32_t num_sets = cur.u32();
  for (std::uint32_t i = 0; i < num_sets; ++i) {
    auto parsed = parse_feature_sets(cur.str());
    model.sets_.push_back(parsed.at(0));
  }
  if (model.sets_.empty()) throw ParseError("model file names no feature sets");

  std::uint32_t num_labels = cur.u32();
  if (num_labels == 0) throw ParseError("model file has no labels");
  for (std::uint32_t i = 0; i < num_labels; ++i) model.labels_.push_back(cur.str());

  std::uint64_t num_features = cur.u64();
  if (num_features == 0) throw ParseError("model file has no features");
  for (std::uint64_t i = 0; i < num_features; ++i) {
    std::string key = cur.str();
    auto id = static_cast<std::int32_t>(model.feature_keys_.size());
    model.feature_keys_.push_back(key);
    if (!model.feature_index_.emplace(std::move(key), id).second) {
      throw ParseError("model file repeats a feature key");
    }
  }
  model.weights_.resize(num_features * num_labels);
  for (auto& v : model.weights_) {
    v = cur.f64();
    if (!std::isfinite(v)) throw ParseError("model file holds a non-finite weight");
  }

  std::uint64_t vocab = cur.u64();
  for (std::uint64_t i = 0; i < vocab; ++i) {
    std::string word = cur.str();
    std::uint32_t n = cur.u32();
    if (word.empty() || n == 0) throw ParseError("model file holds a bad lexicon entry");
    auto& entries = model.lexicon_.entries_[word];
    std::uint64_t total = 0;
    for (std::uint32_t j = 0; j < n; ++j) {
      std::string tag = cur.str();
      std::uint64_t count = cur.u64();
      if (tag.empty() || count == 0) throw ParseError("model file holds a bad lexicon entry");
      entries.push_back(Lexicon::Entry{std::move(tag), count});
      total += count;
    }
    model.lexicon_.totals_[word] = total;
  }
  if (model.lexicon_.entries_.empty()) throw ParseError("model file lexicon is empty");
  model.lexicon_.finalize();

  if (flags & 0x2) {
    std::uint64_t n = cur.u64();
    StringMap<std::string> assignments;
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string word = cur.str();
      std::string bits = cur.str();
      if (word.empty() || bits.find_first_not_of("01") != std::string::npos) {
        throw ParseError("model file holds a bad cluster entry");
      }
      assignments.emplace(std::move(word), std::move(bits));
    }
    std::uint32_t num_prefixes = cur.u32();
    std::vector<int> prefixes;
    for (std::uint32_t i = 0; i < num_prefixes; ++i) {
      prefixes.push_back(static_cast<int>(cur.u32()));
    }
    model.clusters_ = ClusterMap(std::move(assignments), std::move(prefixes));
    model.has_clusters_ = true;
  }
  if (needs_clusters(model.sets_) && !model.has_clusters_) {
    throw ParseError("model uses ds features but embeds no clusters");
  }
  if (cur.pos != bytes.size()) throw ParseError("model file has trailing bytes");
  return model;
}

void LinearModel::save(const std::string& path) const {
  write_file_atomic(path, serialize());
}

LinearModel LinearModel::load(const std::string& path) {
  try {
    return deserialize(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

bool LinearModel::sniff(std::string_view bytes) {
  return bytes.substr(0, std::min<std::size_t>(4, bytes.size())) == kMagic;
}

}  // namespace vitag
