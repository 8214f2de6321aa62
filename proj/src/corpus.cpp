#include "vitag/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "vitag/text.hpp"

namespace vitag {

namespace {

void warn(std::vector<std::string>* sink, std::string msg) {
  if (sink) {
    sink->push_back(std::move(msg));
  } else {
    std::cerr << "warning: " << msg << "\n";
  }
}

const char* kBuiltinTags[] = {"Np", "Nc", "Nu", "N", "V", "A", "P", "R", "L",
                              "M", "E", "C", "Cc", "I", "T", "Y", "Z", "X"};

}  // namespace

TagSet::TagSet(std::vector<Tag> tags, bool open) : tags_(std::move(tags)), open_(open) {
  for (const auto& t : tags_) index_.insert(t);
}

TagSet TagSet::builtin() {
  std::vector<Tag> tags(std::begin(kBuiltinTags), std::end(kBuiltinTags));
  return TagSet(std::move(tags), /*open=*/true);
}

TagSet TagSet::from_file(const std::string& path, bool open) {
  std::string text = read_file(path);
  std::vector<Tag> tags;
  std::istringstream in{text};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!valid_label(line)) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": invalid tag label '" + line + "'");
    }
    tags.push_back(line);
  }
  if (tags.empty()) throw ParseError(path + ": tag set file contains no tags");
  return TagSet(std::move(tags), open);
}

bool TagSet::contains(std::string_view tag) const {
  return index_.find(tag) != index_.end();
}

bool TagSet::valid_label(std::string_view tag) {
  if (tag.empty()) return false;
  for (char c : tag) {
    if (c == '/' || c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
  }
  return true;
}

std::size_t TaggedCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

TaggedCorpus parse_slash_format(std::string_view text, const TagSet& tagset,
                                std::string source_id,
                                std::vector<std::string>* warnings) {
  TaggedCorpus corpus;
  corpus.source_id = std::move(source_id);
  StringSet warned_tags;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = (eol == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    Sentence sentence;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i >= line.size()) break;
      std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      std::string_view raw = line.substr(start, i - start);

      std::size_t slash = raw.rfind('/');
      if (slash == std::string_view::npos || slash == 0 || slash + 1 == raw.size()) {
        throw ParseError(corpus.source_id + ": line " + std::to_string(lineno) +
                         ", column " + std::to_string(start + 1) + ": token '" +
                         std::string(raw) + "' has no word/TAG separator");
      }
      std::string word(raw.substr(0, slash));
      Tag tag(raw.substr(slash + 1));
      if (!tagset.contains(tag)) {
        if (!tagset.open()) {
          throw ParseError(corpus.source_id + ": line " + std::to_string(lineno) +
                           ", column " + std::to_string(start + 1) + ": tag '" + tag +
                           "' not in closed tag set");
        }
        if (warned_tags.insert(tag).second) {
          warn(warnings, corpus.source_id + ": line " + std::to_string(lineno) +
                             ": tag '" + tag + "' not in tag set, admitting");
        }
      }
      sentence.push_back(Token{std::move(word), std::move(tag)});
    }

    if (sentence.empty()) {
      bool at_end = (eol == std::string_view::npos);
      bool last_line_missing_newline = at_end && pos == text.size();
      if (!last_line_missing_newline && !(at_end && line.empty())) {
        warn(warnings, corpus.source_id + ": line " + std::to_string(lineno) +
                           ": blank line skipped");
      }
    } else {
      corpus.sentences.push_back(std::move(sentence));
    }

    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return corpus;
}

std::vector<Sentence> parse_raw(std::string_view text, std::vector<std::string>* warnings) {
  std::vector<Sentence> sentences;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = (eol == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    Sentence sentence;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i >= line.size()) break;
      std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      sentence.push_back(Token{std::string(line.substr(start, i - start)), {}});
    }
    if (sentence.empty()) {
      if (!(eol == std::string_view::npos && pos == text.size())) {
        warn(warnings, "line " + std::to_string(lineno) + ": blank line skipped");
      }
    } else {
      sentences.push_back(std::move(sentence));
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return sentences;
}

std::string write_slash_format(const TaggedCorpus& corpus) {
  std::string out;
  for (const auto& sentence : corpus.sentences) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (i > 0) out += ' ';
      out += sentence[i].word;
      out += '/';
      out += sentence[i].tag;
    }
    out += '\n';
  }
  return out;
}

namespace {

// R6 helper: does this segment look like a tag? Closed sets require
// membership; open sets also accept short alphabetic uppercase-initial
// labels (compound tags such as Ny, Nb, Vb).
bool tag_like(std::string_view seg, const TagSet& tagset) {
  if (seg.empty()) return false;
  if (tagset.contains(seg)) return true;
  if (!tagset.open()) return false;
  if (seg.size() > 3) return false;
  if (!(seg[0] >= 'A' && seg[0] <= 'Z')) return false;
  return std::all_of(seg.begin(), seg.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
  });
}

std::string collapse_underscores(const std::string& word, std::uint64_t* runs) {
  std::string out;
  out.reserve(word.size());
  std::size_t i = 0;
  while (i < word.size()) {
    if (word[i] == '_') {
      std::size_t j = i;
      while (j < word.size() && word[j] == '_') ++j;
      if (j - i > 1) ++*runs;
      out += '_';
      i = j;
    } else {
      out += word[i];
      ++i;
    }
  }
  return out;
}

}  // namespace

std::uint64_t CleanReport::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::string CleanReport::render() const {
  static const char* kDescriptions[6] = {
      "VN/Np retagged to VN/Ny",
      "<number>/M tuoi/Nu retagged to tuoi/N",
      "doubled syllable separator collapsed",
      "multi-punctuation token split",
      "Icelandic dh replaced by dd",
      "extra tag segments dropped",
  };
  std::string out = "rule  occurrences\n";
  char buf[96];
  for (int i = 0; i < 6; ++i) {
    std::snprintf(buf, sizeof(buf), "R%d    %llu\n", i + 1,
                  static_cast<unsigned long long>(counts[static_cast<std::size_t>(i)]));
    out += buf;
  }
  out += "\n";
  for (int i = 0; i < 6; ++i) {
    std::snprintf(buf, sizeof(buf), "R%d: %s\n", i + 1, kDescriptions[i]);
    out += buf;
  }
  if (!flagged.empty()) {
    out += "\nflagged for manual review:\n";
    for (const auto& f : flagged) {
      out += "  ";
      out += f;
      out += '\n';
    }
  }
  return out;
}

std::pair<TaggedCorpus, CleanReport> clean_corpus(const TaggedCorpus& corpus,
                                                  const TagSet& tagset) {
  TaggedCorpus out;
  out.source_id = corpus.source_id;
  out.sentences = corpus.sentences;
  CleanReport report;

  for (auto& sentence : out.sentences) {
    // R1: "VN" mis-tagged as proper noun.
    for (auto& tok : sentence) {
      if (tok.word == "VN" && tok.tag == "Np") {
        tok.tag = "Ny";
        ++report.counts[0];
      }
    }
    // R2: number + tuổi/Nu -> tuổi/N.
    for (std::size_t i = 0; i + 1 < sentence.size(); ++i) {
      if (sentence[i].tag == "M" && text::is_numeric_word(sentence[i].word) &&
          sentence[i + 1].word == "tuổi" && sentence[i + 1].tag == "Nu") {
        sentence[i + 1].tag = "N";
        ++report.counts[1];
      }
    }
    // R3: doubled separators.
    for (auto& tok : sentence) {
      if (tok.word.find("__") != std::string::npos) {
        tok.word = collapse_underscores(tok.word, &report.counts[2]);
      }
    }
    // R4: tokens made of two or more punctuation marks split apart, each
    // piece keeping the original tag. Runs longer than two are reported.
    {
      Sentence rebuilt;
      rebuilt.reserve(sentence.size());
      for (auto& tok : sentence) {
        auto cps = text::decode_utf8(tok.word);
        bool punct_run = cps.size() >= 2 &&
                         std::all_of(cps.begin(), cps.end(),
                                     [](char32_t c) { return text::is_punct(c); });
        if (punct_run) {
          ++report.counts[3];
          if (cps.size() > 2) {
            report.flagged.push_back("R4 long punctuation run: " + tok.word + "/" + tok.tag);
          }
          for (char32_t cp : cps) {
            rebuilt.push_back(Token{text::encode_utf8(cp), tok.tag});
          }
        } else {
          rebuilt.push_back(std::move(tok));
        }
      }
      sentence = std::move(rebuilt);
    }
    // R5: ð (U+00F0) -> đ.
    for (auto& tok : sentence) {
      static const std::string eth = text::encode_utf8(0x00F0);
      static const std::string dstroke = text::encode_utf8(0x0111);
      std::size_t at = 0;
      while ((at = tok.word.find(eth, at)) != std::string::npos) {
        tok.word.replace(at, eth.size(), dstroke);
        at += dstroke.size();
        ++report.counts[4];
      }
    }
    // R6: more than one trailing tag segment; keep the first valid tag.
    for (auto& tok : sentence) {
      if (tok.word.find('/') == std::string::npos) continue;
      std::string raw = tok.word + "/" + tok.tag;
      std::vector<std::string> segs;
      std::size_t start = 0;
      while (true) {
        std::size_t slash = raw.find('/', start);
        if (slash == std::string::npos) {
          segs.push_back(raw.substr(start));
          break;
        }
        segs.push_back(raw.substr(start, slash - start));
        start = slash + 1;
      }
      std::size_t first_tag = segs.size();
      while (first_tag > 1 && tag_like(segs[first_tag - 1], tagset)) --first_tag;
      std::size_t tag_count = segs.size() - first_tag;
      if (tag_count >= 2 && first_tag >= 1) {
        std::string word;
        for (std::size_t s = 0; s < first_tag; ++s) {
          if (s > 0) word += '/';
          word += segs[s];
        }
        tok.word = std::move(word);
        tok.tag = segs[first_tag];
        ++report.counts[5];
        report.flagged.push_back("R6 multiple tags: " + raw);
      }
    }
  }
  return {std::move(out), std::move(report)};
}

Lexicon Lexicon::from_corpus(const TaggedCorpus& corpus) {
  if (corpus.sentences.empty()) {
    throw DataError("cannot build a lexicon from an empty corpus");
  }
  Lexicon lex;
  StringMap<StringMap<std::uint64_t>> counts;
  for (const auto& sentence : corpus.sentences) {
    for (const auto& tok : sentence) {
      ++counts[tok.word][tok.tag];
    }
  }
  for (auto& [word, tag_counts] : counts) {
    std::vector<Entry> entries;
    entries.reserve(tag_counts.size());
    std::uint64_t total = 0;
    for (auto& [tag, n] : tag_counts) {
      entries.push_back(Entry{tag, n});
      total += n;
    }
    lex.entries_[word] = std::move(entries);
    lex.totals_[word] = total;
  }
  lex.finalize();
  return lex;
}

void Lexicon::finalize() {
  for (auto& [word, entries] : entries_) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.count != b.count) return a.count > b.count;
      return a.tag < b.tag;
    });
  }
  StringMap<std::uint64_t> tag_totals;
  for (const auto& [word, entries] : entries_) {
    for (const auto& e : entries) tag_totals[e.tag] += e.count;
  }
  default_tag_.clear();
  std::uint64_t best = 0;
  for (const auto& [tag, n] : tag_totals) {
    if (n > best || (n == best && (default_tag_.empty() || tag < default_tag_))) {
      best = n;
      default_tag_ = tag;
    }
  }
}

bool Lexicon::contains(std::string_view word) const {
  return entries_.find(word) != entries_.end();
}

const Tag* Lexicon::most_frequent(std::string_view word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) return nullptr;
  return &it->second.front().tag;
}

const std::vector<Lexicon::Entry>* Lexicon::entries(std::string_view word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) return nullptr;
  return &it->second;
}

std::uint64_t Lexicon::total_count(std::string_view word) const {
  auto it = totals_.find(word);
  return it == totals_.end() ? 0 : it->second;
}

void Lexicon::save(const std::string& path) const {
  std::vector<std::string_view> words;
  words.reserve(entries_.size());
  for (const auto& [word, entries] : entries_) words.push_back(word);
  std::sort(words.begin(), words.end());
  std::string out;
  for (auto word : words) {
    for (const auto& e : entries_.find(word)->second) {
      out += word;
      out += '\t';
      out += e.tag;
      out += '\t';
      out += std::to_string(e.count);
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

Lexicon Lexicon::load(const std::string& path) {
  std::string text = read_file(path);
  Lexicon lex;
  std::istringstream in{text};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = (t1 == std::string::npos) ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected 'word<TAB>tag<TAB>count'");
    }
    std::string word = line.substr(0, t1);
    std::string tag = line.substr(t1 + 1, t2 - t1 - 1);
    std::uint64_t count = 0;
    try {
      count = std::stoull(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad count");
    }
    if (word.empty() || tag.empty() || count == 0) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad lexicon entry");
    }
    lex.entries_[word].push_back(Entry{tag, count});
    lex.totals_[word] += count;
  }
  if (lex.entries_.empty()) throw ParseError(path + ": empty lexicon file");
  lex.finalize();
  return lex;
}

Lexicon build_lexicon(const TaggedCorpus& corpus) { return Lexicon::from_corpus(corpus); }

std::vector<std::vector<std::size_t>> FoldPlan::folds() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    out[static_cast<std::size_t>(assignments[i])].push_back(i);
  }
  return out;
}

FoldPlan split_kfold(const TaggedCorpus& corpus, int k, std::uint64_t seed, bool shuffle) {
  std::size_t n = corpus.sentences.size();
  if (k < 2) throw DataError("k must be at least 2");
  if (static_cast<std::size_t>(k) > n) {
    throw DataError("cannot split " + std::to_string(n) + " sentences into " +
                    std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (shuffle) {
    // Hand-rolled Fisher-Yates: std::shuffle output is not pinned by the
    // standard, and fold assignments must reproduce across toolchains.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
      std::swap(order[i], order[j]);
    }
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.shuffled = shuffle;
  plan.assignments.assign(n, 0);
  std::size_t base = n / static_cast<std::size_t>(k);
  std::size_t remainder = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    std::size_t size = base + (static_cast<std::size_t>(f) < remainder ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) {
      plan.assignments[order[pos++]] = f;
    }
  }
  return plan;
}

std::pair<std::uint64_t, std::uint64_t> count_unknown(const TaggedCorpus& test,
                                                      const Lexicon& train_lexicon) {
  std::uint64_t total = 0;
  std::uint64_t unknown = 0;
  for (const auto& sentence : test.sentences) {
    for (const auto& tok : sentence) {
      ++total;
      if (!train_lexicon.contains(tok.word)) ++unknown;
    }
  }
  return {total, unknown};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path);
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path dir = target.parent_path();
  fs::path tmp = (dir.empty() ? fs::path(".") : dir) /
                 (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("error writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
  }
}

}  // namespace vitag
