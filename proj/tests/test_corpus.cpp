#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "testutil.hpp"
#include "vitag/corpus.hpp"

using namespace vitag;
using testutil::TempDir;
using testutil::corpus_from;

TEST_CASE("parse_slash_format splits at the last slash") {
  auto corpus = corpus_from("Ông/Np già/A đi/V nhanh/A ./.\nmột/M câu/N nữa/A ./.\n");
  REQUIRE(corpus.sentences.size() == 2);
  CHECK(corpus.sentences[0].size() == 5);
  CHECK(corpus.sentences[0][0] == Token{"Ông", "Np"});
  CHECK(corpus.sentences[0][4] == Token{".", "."});
  CHECK(corpus.token_count() == 9);

  auto tricky = corpus_from("3/4/M ngày/N\n");
  REQUIRE(tricky.sentences.size() == 1);
  CHECK(tricky.sentences[0][0] == Token{"3/4", "M"});
}

TEST_CASE("parse_slash_format handles whitespace variants") {
  auto corpus = corpus_from("a/N\t b/V  c/A\r\nd/N\n");
  REQUIRE(corpus.sentences.size() == 2);
  CHECK(corpus.sentences[0].size() == 3);
  CHECK(corpus.sentences[0][2] == Token{"c", "A"});
  CHECK(corpus.sentences[1][0] == Token{"d", "N"});
}

TEST_CASE("parse_slash_format warns on blank lines and unknown tags") {
  std::vector<std::string> warnings;
  auto corpus = parse_slash_format("a/N\n\nb/Ny c/Ny\n", TagSet::builtin(), "f.txt", &warnings);
  CHECK(corpus.sentences.size() == 2);
  REQUIRE(warnings.size() == 2);
  CHECK(warnings[0] == "f.txt: line 2: blank line skipped");
  // one warning per distinct admitted tag, not per occurrence
  CHECK(warnings[1] == "f.txt: line 3: tag 'Ny' not in tag set, admitting");
}

TEST_CASE("parse_slash_format rejects malformed tokens") {
  CHECK_THROWS_AS(corpus_from("word\n"), ParseError);
  CHECK_THROWS_AS(corpus_from("/N\n"), ParseError);
  CHECK_THROWS_AS(corpus_from("word/\n"), ParseError);
  try {
    corpus_from("a/N bad\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("line 1") != std::string::npos);
    CHECK(msg.find("column 5") != std::string::npos);
    CHECK(msg.find("'bad'") != std::string::npos);
  }
}

TEST_CASE("closed tag sets reject unseen tags") {
  TagSet closed({"N", "V"}, /*open=*/false);
  std::vector<std::string> warnings;
  CHECK_THROWS_AS(parse_slash_format("a/N b/X\n", closed, "f", &warnings), ParseError);
  auto ok = parse_slash_format("a/N b/V\n", closed, "f", &warnings);
  CHECK(ok.token_count() == 2);
}

TEST_CASE("tag label validation") {
  CHECK(TagSet::valid_label("N"));
  CHECK(TagSet::valid_label(","));
  CHECK_THROWS_AS(TagSet::valid_label(""), ParseError);
  CHECK_THROWS_AS(TagSet::valid_label("a b"), ParseError);
  CHECK_THROWS_AS(TagSet::valid_label("a/b"), ParseError);
}

TEST_CASE("builtin tag set") {
  auto tags = TagSet::builtin();
  CHECK(tags.open());
  CHECK(tags.contains("N"));
  CHECK(tags.contains("Np"));
  CHECK(tags.contains("X"));
  CHECK_FALSE(tags.contains("Ny"));
  CHECK(tags.tags().size() == 18);
}

TEST_CASE("write_slash_format round trips") {
  std::string text = "Ông/Np già/A đi/V ./.\nnhà/N xanh/A\n";
  auto corpus = corpus_from(text);
  CHECK(write_slash_format(corpus) == text);
  auto again = corpus_from(write_slash_format(corpus));
  CHECK(again.sentences == corpus.sentences);
}

TEST_CASE("parse_raw splits untagged text") {
  std::vector<std::string> warnings;
  auto sentences = parse_raw("một câu\n\nhai  từ\n", &warnings);
  REQUIRE(sentences.size() == 2);
  CHECK(sentences[0].size() == 2);
  CHECK(sentences[0][0].word == "một");
  CHECK(sentences[0][0].tag.empty());
  CHECK(sentences[1][1].word == "từ");
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0] == "line 2: blank line skipped");
}

TEST_CASE("lexicon orders tags by count then label") {
  auto corpus = corpus_from("bàn/N bàn/N bàn/V ghế/N\nbàn/V sách/N\n");
  auto lex = build_lexicon(corpus);
  CHECK(lex.vocab_size() == 3);
  CHECK(lex.contains("bàn"));
  CHECK_FALSE(lex.contains("vở"));
  REQUIRE(lex.entries("bàn") != nullptr);
  const auto& entries = *lex.entries("bàn");
  REQUIRE(entries.size() == 2);
  // 2x N vs 2x V: equal counts, label order decides
  CHECK(entries[0] == Lexicon::Entry{"N", 2});
  CHECK(entries[1] == Lexicon::Entry{"V", 2});
  CHECK(*lex.most_frequent("bàn") == "N");
  CHECK(lex.most_frequent("vở") == nullptr);
  CHECK(lex.total_count("bàn") == 4);
  CHECK(lex.total_count("vở") == 0);
  CHECK(lex.default_tag() == "N");  // 4x N > 2x V
}

TEST_CASE("lexicon from empty corpus throws") {
  TaggedCorpus empty;
  CHECK_THROWS_AS(build_lexicon(empty), DataError);
}

TEST_CASE("lexicon save and load round trip") {
  TempDir dir;
  auto corpus = corpus_from("bàn/N bàn/V ghế/N đèn/A\nbàn/N\n");
  auto lex = build_lexicon(corpus);
  lex.save(dir.file("lex.tsv"));
  auto back = Lexicon::load(dir.file("lex.tsv"));
  CHECK(back.vocab_size() == lex.vocab_size());
  CHECK(back.default_tag() == lex.default_tag());
  for (const auto& [word, entries] : lex.all()) {
    REQUIRE(back.entries(word) != nullptr);
    CHECK(*back.entries(word) == entries);
  }
  // the file itself is sorted, tab-separated
  auto text = read_file(dir.file("lex.tsv"));
  CHECK(text.substr(0, text.find('\n')) == "bàn\tN\t2");
}

TEST_CASE("lexicon load rejects malformed files") {
  TempDir dir;
  write_file_atomic(dir.file("a"), "word only line\n");
  CHECK_THROWS_AS(Lexicon::load(dir.file("a")), ParseError);
  write_file_atomic(dir.file("b"), "w\tN\tnotanumber\n");
  CHECK_THROWS_AS(Lexicon::load(dir.file("b")), ParseError);
  write_file_atomic(dir.file("c"), "w\tN\t0\n");
  CHECK_THROWS_AS(Lexicon::load(dir.file("c")), ParseError);
  write_file_atomic(dir.file("d"), "\n");
  CHECK_THROWS_AS(Lexicon::load(dir.file("d")), ParseError);
}

TEST_CASE("cleaning the golden dirty corpus applies each rule once") {
  auto corpus = corpus_from(read_file(std::string(TEST_DATA_DIR) + "/dirty.txt"));
  auto [cleaned, report] = clean_corpus(corpus);

  for (int i = 0; i < 6; ++i) {
    INFO("rule R" << (i + 1));
    CHECK(report.counts[static_cast<std::size_t>(i)] == 1);
  }
  CHECK(report.total() == 6);
  REQUIRE(report.flagged.size() == 1);
  CHECK(report.flagged[0] == "R6 multiple tags: nhà/N/V");

  CHECK(cleaned.sentences[0][0] == Token{"VN", "Ny"});
  CHECK(cleaned.sentences[1][2] == Token{"tuổi", "N"});
  CHECK(cleaned.sentences[2][0] == Token{"học_sinh", "N"});
  REQUIRE(cleaned.sentences[3].size() == 4);  // "()" split into two tokens
  CHECK(cleaned.sentences[3][1] == Token{"(", "X"});
  CHECK(cleaned.sentences[3][2] == Token{")", "X"});
  CHECK(cleaned.sentences[4][0] == Token{"đà_nẵng", "Np"});
  CHECK(cleaned.sentences[5][0] == Token{"nhà", "N"});

  // cleaning is idempotent: a second pass changes nothing
  auto [twice, second] = clean_corpus(cleaned);
  CHECK(second.total() == 0);
  CHECK(second.flagged.empty());
  CHECK(twice.sentences == cleaned.sentences);
}

TEST_CASE("long punctuation runs are flagged for review") {
  auto corpus = corpus_from("à/I !!!/X\n");
  auto [cleaned, report] = clean_corpus(corpus);
  CHECK(report.counts[3] == 1);
  REQUIRE(cleaned.sentences[0].size() == 4);
  CHECK(cleaned.sentences[0][1] == Token{"!", "X"});
  REQUIRE(report.flagged.size() == 1);
  CHECK(report.flagged[0] == "R4 long punctuation run: !!!/X");
}

TEST_CASE("clean report renders a rule table") {
  auto corpus = corpus_from(read_file(std::string(TEST_DATA_DIR) + "/dirty.txt"));
  auto [cleaned, report] = clean_corpus(corpus);
  std::string text = report.render();
  CHECK(text.find("rule  occurrences") == 0);
  for (int i = 1; i <= 6; ++i) {
    CHECK(text.find("R" + std::to_string(i) + "    1") != std::string::npos);
  }
  CHECK(text.find("flagged for manual review:") != std::string::npos);
  CHECK(text.find("  R6 multiple tags: nhà/N/V") != std::string::npos);
}

TEST_CASE("kfold splits evenly and covers every sentence") {
  std::mt19937_64 rng(3);
  auto vocab = testutil::small_vocab();
  auto corpus = testutil::random_corpus(rng, vocab, 23);
  auto plan = split_kfold(corpus, 4, 99);
  CHECK(plan.k == 4);
  CHECK(plan.assignments.size() == 23);
  auto folds = plan.folds();
  REQUIRE(folds.size() == 4);
  std::size_t covered = 0;
  std::size_t smallest = corpus.sentences.size();
  std::size_t largest = 0;
  std::set<std::size_t> seen;
  for (const auto& fold : folds) {
    covered += fold.size();
    smallest = std::min(smallest, fold.size());
    largest = std::max(largest, fold.size());
    seen.insert(fold.begin(), fold.end());
  }
  CHECK(covered == 23);
  CHECK(seen.size() == 23);
  CHECK(largest - smallest <= 1);
}

TEST_CASE("kfold shuffling is deterministic per seed") {
  std::mt19937_64 rng(5);
  auto corpus = testutil::random_corpus(rng, testutil::small_vocab(), 10);
  auto a = split_kfold(corpus, 3, 42);
  auto b = split_kfold(corpus, 3, 42);
  CHECK(a.assignments == b.assignments);
  // pinned permutation for seed 42: fold assignment must reproduce exactly
  CHECK(a.assignments == std::vector<int>{0, 0, 2, 1, 1, 2, 2, 0, 1, 0});

  auto c = split_kfold(corpus, 3, 43);
  CHECK(c.assignments != a.assignments);

  std::mt19937_64 rng2(6);
  auto seven = testutil::random_corpus(rng2, testutil::small_vocab(), 7);
  auto singles = split_kfold(seven, 7, 1);
  CHECK(singles.assignments == std::vector<int>{5, 1, 6, 0, 2, 4, 3});
}

TEST_CASE("kfold without shuffling assigns contiguous blocks") {
  std::mt19937_64 rng(5);
  auto corpus = testutil::random_corpus(rng, testutil::small_vocab(), 10);
  auto plan = split_kfold(corpus, 3, 42, /*shuffle=*/false);
  CHECK_FALSE(plan.shuffled);
  CHECK(plan.assignments == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 2, 2, 2});
}

TEST_CASE("kfold validates its inputs") {
  std::mt19937_64 rng(5);
  auto corpus = testutil::random_corpus(rng, testutil::small_vocab(), 4);
  CHECK_THROWS_AS(split_kfold(corpus, 1, 0), DataError);
  CHECK_THROWS_AS(split_kfold(corpus, 5, 0), DataError);
  CHECK_NOTHROW(split_kfold(corpus, 4, 0));
}

TEST_CASE("count_unknown measures lexicon coverage") {
  auto train = corpus_from("bàn/N ghế/N\n");
  auto lex = build_lexicon(train);
  auto test = corpus_from("bàn/N sách/N vở/N\nghế/N\n");
  auto [total, unknown] = count_unknown(test, lex);
  CHECK(total == 4);
  CHECK(unknown == 2);
}

TEST_CASE("file io") {
  TempDir dir;
  write_file_atomic(dir.file("x.txt"), "nội dung\n");
  CHECK(read_file(dir.file("x.txt")) == "nội dung\n");
  // overwrite in place
  write_file_atomic(dir.file("x.txt"), "khác\n");
  CHECK(read_file(dir.file("x.txt")) == "khác\n");

  CHECK_THROWS_AS(read_file(dir.file("missing.txt")), IoError);
  CHECK_THROWS_AS(write_file_atomic(dir.file("no/such/dir/x"), "a"), IoError);
}
