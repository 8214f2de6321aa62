#include "vitag/cli.hpp"

#include <cstdio>
#include <functional>
#include <iostream>

#include "CLI11.hpp"

#include "vitag/bench.hpp"
#include "vitag/corpus.hpp"
#include "vitag/features.hpp"
#include "vitag/linear.hpp"
#include "vitag/scrdr.hpp"

namespace vitag {
namespace {

struct GlobalArgs {
  std::uint64_t seed = 42;
  std::string tagset_path;
  bool closed_tagset = false;
  bool quiet = false;
};

// Parsers print their own warnings to stderr when given no sink; under
// --quiet we hand them a sink and drop it.
std::vector<std::string>* warn_sink(std::vector<std::string>& storage, const GlobalArgs& g) {
  return g.quiet ? &storage : nullptr;
}

TagSet load_tagset(const GlobalArgs& g) {
  if (g.tagset_path.empty()) {
    if (!g.closed_tagset) return TagSet::builtin();
    return TagSet(TagSet::builtin().tags(), false);
  }
  return TagSet::from_file(g.tagset_path, !g.closed_tagset);
}

TaggedCorpus parse_corpus_file(const std::string& path, const TagSet& tagset,
                               const GlobalArgs& g) {
  std::vector<std::string> sink;
  return parse_slash_format(read_file(path), tagset, path, warn_sink(sink, g));
}

ClusterMap load_clusters_cli(const std::string& path, const GlobalArgs& g) {
  std::vector<std::string> warnings;
  ClusterMap map = load_cluster_file(path, &warnings);
  if (!g.quiet) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
  }
  return map;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file_atomic(out_path, text);
  }
}

struct TrainKnobs {
  std::string loss = "logistic";
  int epochs = 10;
  double lr = 0.1;
  double l2 = 0.0;
  bool no_shuffle = false;
};

void add_train_knobs(CLI::App* cmd, TrainKnobs& k) {
  cmd->add_option("--loss", k.loss, "Training objective: logistic or perceptron");
  cmd->add_option("--epochs", k.epochs, "Training epochs (default 10)");
  cmd->add_option("--lr", k.lr, "Learning rate for the logistic objective (default 0.1)");
  cmd->add_option("--l2", k.l2, "L2 regularization strength (default 0)");
  cmd->add_flag("--no-shuffle", k.no_shuffle, "Keep training examples in corpus order");
}

TrainConfig to_train_config(const TrainKnobs& k, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.loss = parse_loss(k.loss);
  cfg.epochs = k.epochs;
  cfg.learning_rate = k.lr;
  cfg.l2 = k.l2;
  cfg.shuffle = !k.no_shuffle;
  cfg.seed = seed;
  return cfg;
}

struct GrowKnobs {
  int min_fired = 2;
  int min_gain = 2;
  int max_depth = 6;
};

void add_grow_knobs(CLI::App* cmd, GrowKnobs& k) {
  cmd->add_option("--min-fired", k.min_fired, "Minimum objects a rule must fire on (default 2)");
  cmd->add_option("--min-gain", k.min_gain, "Minimum net error reduction per rule (default 2)");
  cmd->add_option("--max-depth", k.max_depth, "Maximum exception depth (default 6)");
}

GrowParams to_grow_params(const GrowKnobs& k) {
  return GrowParams{k.min_fired, k.min_gain, k.max_depth};
}

struct CleanArgs {
  std::string input;
  std::string output;
  std::string report;
};

void cmd_clean(const CleanArgs& a, const GlobalArgs& g) {
  TagSet tagset = load_tagset(g);
  TaggedCorpus corpus = parse_corpus_file(a.input, tagset, g);
  auto [cleaned, report] = clean_corpus(corpus, tagset);
  write_file_atomic(a.output, write_slash_format(cleaned));
  std::string rendered = report.render();
  if (a.report.empty()) {
    std::cout << rendered;
  } else {
    write_file_atomic(a.report, rendered);
  }
}

struct LexiconArgs {
  std::string input;
  std::string output;
};

void cmd_lexicon(const LexiconArgs& a, const GlobalArgs& g) {
  TagSet tagset = load_tagset(g);
  TaggedCorpus corpus = parse_corpus_file(a.input, tagset, g);
  build_lexicon(corpus).save(a.output);
}

struct TrainLinearArgs {
  std::string input;
  std::string output;
  std::string features = "spl";
  std::string clusters;
  TrainKnobs knobs;
};

void cmd_train_linear(const TrainLinearArgs& a, const GlobalArgs& g) {
  TagSet tagset = load_tagset(g);
  std::vector<TemplateSet> sets = parse_feature_sets(a.features);
  ClusterMap clusters;
  const ClusterMap* cluster_ptr = nullptr;
  if (!a.clusters.empty()) {
    clusters = load_clusters_cli(a.clusters, g);
    cluster_ptr = &clusters;
  }
  if (needs_clusters(sets) && cluster_ptr == nullptr) {
    throw ConfigError("--features includes 'ds' but no --clusters file was given");
  }
  TaggedCorpus corpus = parse_corpus_file(a.input, tagset, g);
  TrainStats stats;
  LinearModel model =
      LinearModel::train(corpus, sets, to_train_config(a.knobs, g.seed), cluster_ptr, &stats);
  model.save(a.output);
  if (!g.quiet) {
    for (std::size_t e = 0; e < stats.epoch_accuracy.size(); ++e) {
      std::fprintf(stderr, "epoch %zu: accuracy %.4f", e + 1, stats.epoch_accuracy[e]);
      if (e < stats.epoch_loss.size()) std::fprintf(stderr, ", loss %.6f", stats.epoch_loss[e]);
      std::fputc('\n', stderr);
    }
  }
}

struct TrainScrdrArgs {
  std::string input;
  std::string output;
  GrowKnobs knobs;
};

void cmd_train_scrdr(const TrainScrdrArgs& a, const GlobalArgs& g) {
  TagSet tagset = load_tagset(g);
  TaggedCorpus corpus = parse_corpus_file(a.input, tagset, g);
  InitialTagger initial = InitialTagger::from_corpus(corpus);
  ObjectDictionary dict = ObjectDictionary::build(corpus, initial);
  GrowStats stats;
  ScrdrTree tree = grow_tree(dict, to_grow_params(a.knobs), &stats);
  tree.save(a.output);
  initial.save(a.output + ".lex");
  if (!g.quiet) {
    std::fprintf(stderr, "rules: %zu exceptions over %zu first-layer nodes, training errors %zu -> %zu\n",
                 stats.rules_attached, stats.layer1_nodes, stats.initial_errors,
                 stats.final_errors);
  }
}

struct TagArgs {
  std::string input;
  std::string model;
  std::string output;
  std::string mode = "two-pass";
};

void cmd_tag(const TagArgs& a, const GlobalArgs& g) {
  std::string model_bytes = read_file(a.model);
  std::vector<std::string> sink;
  std::vector<Sentence> sentences = parse_raw(read_file(a.input), warn_sink(sink, g));
  TaggedCorpus result;
  result.source_id = a.input;
  result.sentences.reserve(sentences.size());
  if (LinearModel::sniff(model_bytes)) {
    LinearModel model = LinearModel::load(a.model);
    DecodeMode mode = parse_decode_mode(a.mode);
    for (const Sentence& s : sentences) result.sentences.push_back(model.decode(s, mode));
  } else if (ScrdrTree::sniff(model_bytes)) {
    ScrdrTree tree = ScrdrTree::load(a.model);
    InitialTagger initial = InitialTagger::load(a.model + ".lex");
    for (const Sentence& s : sentences) result.sentences.push_back(scrdr_tag(tree, initial, s));
  } else {
    throw ParseError(a.model + ": unrecognized model format");
  }
  emit(write_slash_format(result), a.output);
}

struct EvalArgs {
  std::string pred;
  std::string gold;
  std::string lexicon;
  std::string output;
  std::string csv;
};

void cmd_eval(const EvalArgs& a, const GlobalArgs& g) {
  TagSet tagset = load_tagset(g);
  TaggedCorpus pred = parse_corpus_file(a.pred, tagset, g);
  TaggedCorpus gold = parse_corpus_file(a.gold, tagset, g);
  Lexicon lexicon = Lexicon::load(a.lexicon);
  EvalReport report = evaluate(pred, gold, lexicon);
  report.tagger_id = "file";
  report.feature_sets = "-";
  emit(report.render_text(), a.output);
  if (!a.csv.empty()) write_file_atomic(a.csv, report.render_csv());
}

struct KfoldArgs {
  std::string input;
  int k = 10;
  bool contiguous = false;
  std::string out_prefix;
};

void cmd_kfold(const KfoldArgs& a, const GlobalArgs& g) {
  TagSet tagset = load_tagset(g);
  TaggedCorpus corpus = parse_corpus_file(a.input, tagset, g);
  FoldPlan plan = split_kfold(corpus, a.k, g.seed, !a.contiguous);
  std::vector<std::vector<std::size_t>> folds = plan.folds();
  std::string table = "fold  sentences    tokens   unknown\n";
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<char> in_test(corpus.sentences.size(), 0);
    for (std::size_t s : folds[f]) in_test[s] = 1;
    TaggedCorpus train;
    TaggedCorpus test;
    for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
      (in_test[s] ? test : train).sentences.push_back(corpus.sentences[s]);
    }
    auto [total, unknown] = count_unknown(test, build_lexicon(train));
    char row[128];
    std::snprintf(row, sizeof row, "%4zu %10zu %9llu %9llu\n", f + 1, folds[f].size(),
                  static_cast<unsigned long long>(total),
                  static_cast<unsigned long long>(unknown));
    table += row;
    if (!a.out_prefix.empty()) {
      std::string base = a.out_prefix + ".fold" + std::to_string(f + 1);
      write_file_atomic(base + ".train", write_slash_format(train));
      write_file_atomic(base + ".test", write_slash_format(test));
    }
  }
  std::cout << table;
  std::cout.flush();
}

struct BenchArgs {
  std::string input;
  std::string tagger = "linear";
  std::string features = "spl";
  int folds = 10;
  std::string speed_corpus;
  int reps = 3;
  std::string clusters;
  std::string csv;
  std::string output;
  std::string mode = "two-pass";
  bool contiguous_folds = false;
  bool parallel_folds = false;
  TrainKnobs train;
  GrowKnobs grow;
};

void cmd_bench(const BenchArgs& a, const GlobalArgs& g) {
  TagSet tagset = load_tagset(g);
  TaggedCorpus corpus = parse_corpus_file(a.input, tagset, g);
  ClusterMap clusters;
  const ClusterMap* cluster_ptr = nullptr;
  if (!a.clusters.empty()) {
    clusters = load_clusters_cli(a.clusters, g);
    cluster_ptr = &clusters;
  }
  TaggerConfig cfg;
  cfg.tagger = a.tagger;
  cfg.sets = parse_feature_sets(a.features);
  cfg.train = to_train_config(a.train, g.seed);
  cfg.grow = to_grow_params(a.grow);
  cfg.clusters = cluster_ptr;
  cfg.mode = parse_decode_mode(a.mode);
  cfg.shuffle_folds = !a.contiguous_folds;
  cfg.parallel_folds = a.parallel_folds;
  if (cfg.tagger == "linear" && needs_clusters(cfg.sets) && cluster_ptr == nullptr) {
    throw ConfigError("--features includes 'ds' but no --clusters file was given");
  }

  EvalReport report = crossvalidate(corpus, a.folds, g.seed, cfg);
  if (!a.speed_corpus.empty()) {
    std::vector<std::string> sink;
    std::vector<Sentence> raw = parse_raw(read_file(a.speed_corpus), warn_sink(sink, g));
    std::unique_ptr<SentenceTagger> tagger = train_tagger(corpus, cfg);
    report.speed_wps = measure_speed(*tagger, raw, a.reps);
  }
  emit(report.render_text(), a.output);
  if (!a.csv.empty()) write_file_atomic(a.csv, report.render_csv());
}

struct AblateArgs {
  std::string input;
  int folds = 10;
  std::string clusters;
  std::string csv;
  std::string output;
  bool parallel_folds = false;
  TrainKnobs train;
  GrowKnobs grow;
};

void cmd_ablate(const AblateArgs& a, const GlobalArgs& g) {
  TagSet tagset = load_tagset(g);
  TaggedCorpus corpus = parse_corpus_file(a.input, tagset, g);
  ClusterMap clusters;
  const ClusterMap* cluster_ptr = nullptr;
  if (!a.clusters.empty()) {
    clusters = load_clusters_cli(a.clusters, g);
    cluster_ptr = &clusters;
  }
  AblationReport report =
      ablate(corpus, a.folds, g.seed, cluster_ptr, to_train_config(a.train, g.seed),
             to_grow_params(a.grow), a.parallel_folds);
  emit(report.render_text(), a.output);
  if (!a.csv.empty()) write_file_atomic(a.csv, report.render_csv());
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Vietnamese-style sequence tagging toolkit"};
  app.name("vitag");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--seed", g.seed, "Seed for every random choice (default 42)");
  app.add_option("--tagset", g.tagset_path, "Tag inventory file, one tag per line (default: built-in)");
  app.add_flag("--closed-tagset", g.closed_tagset, "Reject tags outside the tag set instead of warning");
  app.add_flag("--quiet", g.quiet, "Suppress warnings and progress output");

  std::function<void()> action;

  CleanArgs clean_args;
  CLI::App* clean = app.add_subcommand("clean", "Repair known annotation errors in a tagged corpus");
  clean->add_option("input", clean_args.input, "Tagged corpus (word/TAG format)")->required();
  clean->add_option("-o,--output", clean_args.output, "Cleaned corpus path")->required();
  clean->add_option("--report", clean_args.report, "Write the repair report here instead of stdout");
  clean->callback([&] { action = [&] { cmd_clean(clean_args, g); }; });

  LexiconArgs lexicon_args;
  CLI::App* lexicon = app.add_subcommand("lexicon", "Build a word/tag frequency lexicon from a tagged corpus");
  lexicon->add_option("input", lexicon_args.input, "Tagged corpus")->required();
  lexicon->add_option("-o,--output", lexicon_args.output, "Lexicon path")->required();
  lexicon->callback([&] { action = [&] { cmd_lexicon(lexicon_args, g); }; });

  TrainLinearArgs train_linear_args;
  CLI::App* train_linear = app.add_subcommand("train-linear", "Train the statistical linear tagger");
  train_linear->add_option("input", train_linear_args.input, "Tagged training corpus")->required();
  train_linear->add_option("-o,--output", train_linear_args.output, "Model output path")->required();
  train_linear->add_option("--features", train_linear_args.features,
                           "'+'-joined template sets: spl, bi, affix, ds, jvn, vn (default spl)");
  train_linear->add_option("--clusters", train_linear_args.clusters,
                           "Word-cluster file (required by the ds set)");
  add_train_knobs(train_linear, train_linear_args.knobs);
  train_linear->callback([&] { action = [&] { cmd_train_linear(train_linear_args, g); }; });

  TrainScrdrArgs train_scrdr_args;
  CLI::App* train_scrdr = app.add_subcommand("train-scrdr", "Train the rule-exception-tree tagger");
  train_scrdr->add_option("input", train_scrdr_args.input, "Tagged training corpus")->required();
  train_scrdr->add_option("-o,--output", train_scrdr_args.output,
                          "Tree output path (the initial-tagger lexicon lands next to it as <path>.lex)")
      ->required();
  add_grow_knobs(train_scrdr, train_scrdr_args.knobs);
  train_scrdr->callback([&] { action = [&] { cmd_train_scrdr(train_scrdr_args, g); }; });

  TagArgs tag_args;
  CLI::App* tag = app.add_subcommand("tag", "Tag raw text (one sentence per line) with a trained model");
  tag->add_option("input", tag_args.input, "Raw text file")->required();
  tag->add_option("-m,--model", tag_args.model, "Model path (type detected from the file)")->required();
  tag->add_option("-o,--output", tag_args.output, "Tagged output path (default stdout)");
  tag->add_option("--mode", tag_args.mode, "Linear decoding: two-pass (default) or ltr");
  tag->callback([&] { action = [&] { cmd_tag(tag_args, g); }; });

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Score a predicted corpus against gold");
  eval->add_option("--pred", eval_args.pred, "Predicted tagged corpus")->required();
  eval->add_option("--gold", eval_args.gold, "Gold tagged corpus")->required();
  eval->add_option("--lexicon", eval_args.lexicon,
                   "Training lexicon used to classify words as unknown")
      ->required();
  eval->add_option("-o,--output", eval_args.output, "Report path (default stdout)");
  eval->add_option("--csv", eval_args.csv, "Also write the report as CSV here");
  eval->callback([&] { action = [&] { cmd_eval(eval_args, g); }; });

  KfoldArgs kfold_args;
  CLI::App* kfold = app.add_subcommand("kfold", "Partition a corpus into folds and report their sizes");
  kfold->add_option("input", kfold_args.input, "Tagged corpus")->required();
  kfold->add_option("-k,--folds", kfold_args.k, "Number of folds (default 10)")
      ->check(CLI::Range(2, 1000000));
  kfold->add_flag("--contiguous", kfold_args.contiguous,
                  "Assign contiguous blocks instead of shuffling");
  kfold->add_option("--out-prefix", kfold_args.out_prefix,
                    "Write <prefix>.foldN.train/.test corpus files");
  kfold->callback([&] { action = [&] { cmd_kfold(kfold_args, g); }; });

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Cross-validated accuracy and optional throughput");
  bench->add_option("input", bench_args.input, "Tagged corpus")->required();
  bench->add_option("--tagger", bench_args.tagger, "linear (default) or scrdr");
  bench->add_option("--features", bench_args.features, "Template sets for the linear tagger (default spl)");
  bench->add_option("--folds", bench_args.folds, "Number of folds (default 10)")
      ->check(CLI::Range(2, 1000000));
  bench->add_option("--speed-corpus", bench_args.speed_corpus,
                    "Raw text for the throughput run (trains on the full corpus first)");
  bench->add_option("--reps", bench_args.reps, "Timed repetitions over the speed corpus (default 3)");
  bench->add_option("--clusters", bench_args.clusters, "Word-cluster file for the ds set");
  bench->add_option("--mode", bench_args.mode, "Linear decoding: two-pass (default) or ltr");
  bench->add_flag("--contiguous-folds", bench_args.contiguous_folds,
                  "Assign contiguous fold blocks instead of shuffling");
  bench->add_flag("--parallel-folds", bench_args.parallel_folds, "Run the folds on separate threads");
  bench->add_option("-o,--output", bench_args.output, "Report path (default stdout)");
  bench->add_option("--csv", bench_args.csv, "Also write the report as CSV here");
  add_train_knobs(bench, bench_args.train);
  add_grow_knobs(bench, bench_args.grow);
  bench->callback([&] { action = [&] { cmd_bench(bench_args, g); }; });

  AblateArgs ablate_args;
  CLI::App* ablate_cmd = app.add_subcommand("ablate", "Cross-validate the cumulative feature sets plus the rule tagger");
  ablate_cmd->add_option("input", ablate_args.input, "Tagged corpus")->required();
  ablate_cmd->add_option("--folds", ablate_args.folds, "Number of folds (default 10)")
      ->check(CLI::Range(2, 1000000));
  ablate_cmd->add_option("--clusters", ablate_args.clusters, "Word-cluster file for the ds row");
  ablate_cmd->add_flag("--parallel-folds", ablate_args.parallel_folds,
                       "Run the folds on separate threads");
  ablate_cmd->add_option("-o,--output", ablate_args.output, "Report path (default stdout)");
  ablate_cmd->add_option("--csv", ablate_args.csv, "Also write the report as CSV here");
  add_train_knobs(ablate_cmd, ablate_args.train);
  add_grow_knobs(ablate_cmd, ablate_args.grow);
  ablate_cmd->callback([&] { action = [&] { cmd_ablate(ablate_args, g); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!action) {
      std::cerr << "error: no subcommand selected\n";
      return 1;
    }
    action();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace vitag
