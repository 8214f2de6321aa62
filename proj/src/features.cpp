#include "vitag/features.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "vitag/text.hpp"

namespace vitag {

Context make_context(std::span<const std::string_view> words,
                     std::span<const std::string_view> tags,
                     std::size_t position, RightTags right) {
  assert(words.size() == tags.size());
  assert(position < words.size());
  Context ctx;
  ctx.position = position;
  ctx.sentence_length = words.size();
  const auto n = static_cast<std::ptrdiff_t>(words.size());
  const auto p = static_cast<std::ptrdiff_t>(position);
  for (int off = -2; off <= 2; ++off) {
    std::ptrdiff_t i = p + off;
    std::string_view w;
    std::string_view t;
    if (i < 0) {
      w = (i == -1) ? sentinel::kBosWord1 : sentinel::kBosWord2;
      t = sentinel::kBosTag;
    } else if (i >= n) {
      w = (i == n) ? sentinel::kEosWord1 : sentinel::kEosWord2;
      t = sentinel::kEosTag;
    } else {
      w = words[static_cast<std::size_t>(i)];
      t = (right == RightTags::Hidden && off >= 0)
              ? sentinel::kEosTag
              : tags[static_cast<std::size_t>(i)];
    }
    ctx.words[static_cast<std::size_t>(off + 2)] = w;
    ctx.tags[static_cast<std::size_t>(off + 2)] = t;
  }
  return ctx;
}

ClusterMap::ClusterMap(StringMap<std::string> assignments,
                       std::vector<int> prefix_lengths)
    : assignments_(std::move(assignments)),
      prefix_lengths_(std::move(prefix_lengths)) {}

std::string_view ClusterMap::lookup(std::string_view word) const {
  auto it = assignments_.find(word);
  return it == assignments_.end() ? kUnknownId : std::string_view(it->second);
}

void ClusterMap::set_prefix_lengths(std::vector<int> lengths) {
  prefix_lengths_ = std::move(lengths);
}

ClusterMap load_cluster_file(const std::string& path,
                             std::vector<std::string>* warnings) {
  std::string text = read_file(path);
  StringMap<std::string> assignments;
  std::istringstream in{text};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t');
    if (t1 == std::string::npos || t1 == 0) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected 'bitstring<TAB>word'");
    }
    std::string bits = line.substr(0, t1);
    if (bits.find_first_not_of("01") != std::string::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": cluster id '" + bits + "' is not a bit-string");
    }
    std::size_t t2 = line.find('\t', t1 + 1);
    std::string word = (t2 == std::string::npos)
                           ? line.substr(t1 + 1)
                           : line.substr(t1 + 1, t2 - t1 - 1);
    if (word.empty()) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": empty word");
    }
    auto [it, inserted] = assignments.insert_or_assign(std::move(word), std::move(bits));
    if (!inserted && warnings) {
      warnings->push_back(path + ":" + std::to_string(lineno) +
                          ": duplicate word '" + it->first + "', keeping the last line");
    }
  }
  if (assignments.empty()) {
    throw ParseError(path + ": cluster file contains no assignments");
  }
  return ClusterMap(std::move(assignments));
}

std::string_view to_string(TemplateSet set) {
  switch (set) {
    case TemplateSet::Spl: return "spl";
    case TemplateSet::Bi: return "bi";
    case TemplateSet::Affix: return "affix";
    case TemplateSet::Ds: return "ds";
    case TemplateSet::Jvn: return "jvn";
    case TemplateSet::Vn: return "vn";
  }
  return "?";
}

std::vector<TemplateSet> parse_feature_sets(std::string_view text) {
  std::vector<TemplateSet> sets;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t plus = text.find('+', pos);
    std::string_view name = (plus == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, plus - pos);
    TemplateSet set;
    if (name == "spl") set = TemplateSet::Spl;
    else if (name == "bi") set = TemplateSet::Bi;
    else if (name == "affix") set = TemplateSet::Affix;
    else if (name == "ds") set = TemplateSet::Ds;
    else if (name == "jvn" || name == "jvn_maxent") set = TemplateSet::Jvn;
    else if (name == "vn") set = TemplateSet::Vn;
    else {
      throw ConfigError("unknown feature set '" + std::string(name) +
                        "' (expected spl, bi, affix, ds, jvn or vn)");
    }
    if (std::find(sets.begin(), sets.end(), set) != sets.end()) {
      throw ConfigError("feature set '" + std::string(name) + "' given twice");
    }
    sets.push_back(set);
    if (plus == std::string_view::npos) break;
    pos = plus + 1;
  }
  if (sets.empty()) throw ConfigError("empty feature set selection");
  return sets;
}

std::string feature_sets_name(std::span<const TemplateSet> sets) {
  std::string out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (i > 0) out += '+';
    out += to_string(sets[i]);
  }
  return out;
}

bool uses_right_tags(TemplateSet set) { return set == TemplateSet::Bi; }
bool needs_clusters(TemplateSet set) { return set == TemplateSet::Ds; }
bool needs_lexicon(TemplateSet set) { return set == TemplateSet::Jvn; }

bool uses_right_tags(std::span<const TemplateSet> sets) {
  return std::any_of(sets.begin(), sets.end(),
                     [](TemplateSet s) { return uses_right_tags(s); });
}
bool needs_clusters(std::span<const TemplateSet> sets) {
  return std::any_of(sets.begin(), sets.end(),
                     [](TemplateSet s) { return needs_clusters(s); });
}
bool needs_lexicon(std::span<const TemplateSet> sets) {
  return std::any_of(sets.begin(), sets.end(),
                     [](TemplateSet s) { return needs_lexicon(s); });
}

namespace {

void emit(std::vector<std::string>& out, std::string_view id, std::string_view value) {
  std::string key;
  key.reserve(id.size() + 1 + value.size());
  key.append(id);
  key.push_back('=');
  key.append(value);
  out.push_back(std::move(key));
}

void emit2(std::vector<std::string>& out, std::string_view id,
           std::string_view a, std::string_view b) {
  std::string value;
  value.reserve(a.size() + 1 + b.size());
  value.append(a);
  value.push_back(' ');
  value.append(b);
  emit(out, id, value);
}

void emit_bool(std::vector<std::string>& out, std::string_view id, bool v) {
  emit(out, id, v ? "true" : "false");
}

void emit_spl(const Context& ctx, std::vector<std::string>& out) {
  emit(out, "w-2", ctx.word(-2));
  emit(out, "w-1", ctx.word(-1));
  emit(out, "w0", ctx.word(0));
  emit(out, "w+1", ctx.word(1));
  emit(out, "w+2", ctx.word(2));
  emit2(out, "w-1|w0", ctx.word(-1), ctx.word(0));
  emit2(out, "w0|w+1", ctx.word(0), ctx.word(1));
  emit2(out, "w-1|w+1", ctx.word(-1), ctx.word(1));
  emit_bool(out, "cap0", text::starts_uppercase(ctx.word(0)));
  emit_bool(out, "num0", text::contains_digit(ctx.word(0)));
  emit_bool(out, "pct0", text::contains_punct(ctx.word(0)));
  emit_bool(out, "acap0", text::all_uppercase(ctx.word(0)));
  if (ctx.sentence_length == 1) {
    emit(out, "pos", "first");
    emit(out, "pos", "last");
  } else if (ctx.position == 0) {
    emit(out, "pos", "first");
  } else if (ctx.position + 1 == ctx.sentence_length) {
    emit(out, "pos", "last");
  } else {
    emit(out, "pos", "mid");
  }
}

void emit_bi(const Context& ctx, std::vector<std::string>& out) {
  emit2(out, "w0|t-1", ctx.word(0), ctx.tag(-1));
  emit2(out, "w0|t+1", ctx.word(0), ctx.tag(1));
}

void emit_affix(const Context& ctx, std::vector<std::string>& out) {
  emit(out, "fsyl", text::first_syllable(ctx.word(0)));
  emit(out, "lsyl", text::last_syllable(ctx.word(0)));
}

void emit_ds(const Context& ctx, const ClusterMap& clusters,
             std::vector<std::string>& out) {
  static constexpr std::string_view kIds[3] = {"ds-1", "ds0", "ds+1"};
  for (int off = -1; off <= 1; ++off) {
    std::string_view id = clusters.lookup(ctx.word(off));
    std::string_view name = kIds[off + 1];
    emit(out, name, id);
    for (int len : clusters.prefix_lengths()) {
      auto plen = std::min<std::size_t>(static_cast<std::size_t>(len), id.size());
      emit(out, std::string(name) + ":" + std::to_string(len), id.substr(0, plen));
    }
  }
}

std::string possible_tags(const Lexicon& lexicon, std::string_view word) {
  const auto* entries = lexicon.entries(word);
  if (!entries) return "NONE";
  std::vector<std::string_view> tags;
  tags.reserve(entries->size());
  for (const auto& e : *entries) tags.push_back(e.tag);
  std::sort(tags.begin(), tags.end());
  std::string out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (i > 0) out += ' ';
    out += tags[i];
  }
  return out;
}

}  // namespace

bool is_full_repetitive(std::string_view word) {
  auto syls = text::syllables(word);
  if (syls.size() < 2) return false;
  return std::all_of(syls.begin(), syls.end(),
                     [&](const std::string& s) { return s == syls.front(); });
}

bool is_partial_repetitive(std::string_view word) {
  auto syls = text::syllables(word);
  if (syls.size() < 2) return false;
  for (std::size_t i = 0; i + 1 < syls.size(); ++i) {
    std::string on_a = text::onset(syls[i]);
    std::string on_b = text::onset(syls[i + 1]);
    bool share_onset = !on_a.empty() && on_a == on_b;
    bool share_final = text::final_grapheme(syls[i]) == text::final_grapheme(syls[i + 1]);
    if (!share_onset && !share_final) return false;
  }
  return true;
}

void extract_jvn(const Context& ctx, const Lexicon& lexicon,
                 std::vector<std::string>& out) {
  emit(out, "w-2", ctx.word(-2));
  emit(out, "w-1", ctx.word(-1));
  emit(out, "w0", ctx.word(0));
  emit(out, "w+1", ctx.word(1));
  emit(out, "w+2", ctx.word(2));
  emit2(out, "w-1|w0", ctx.word(-1), ctx.word(0));
  emit2(out, "w0|w+1", ctx.word(0), ctx.word(1));

  emit_bool(out, "acap-1", text::all_uppercase(ctx.word(-1)));
  emit_bool(out, "acap0", text::all_uppercase(ctx.word(0)));
  emit_bool(out, "cap-1", text::starts_uppercase(ctx.word(-1)));
  emit_bool(out, "cap0", text::starts_uppercase(ctx.word(0)));
  emit_bool(out, "isnum-1", text::is_numeric_word(ctx.word(-1)));
  emit_bool(out, "isnum0", text::is_numeric_word(ctx.word(0)));
  emit_bool(out, "isnum+1", text::is_numeric_word(ctx.word(1)));
  emit_bool(out, "num-1", text::contains_digit(ctx.word(-1)));
  emit_bool(out, "num0", text::contains_digit(ctx.word(0)));
  emit_bool(out, "num+1", text::contains_digit(ctx.word(1)));
  emit_bool(out, "hyph-1", text::contains_hyphen(ctx.word(-1)));
  emit_bool(out, "hyph0", text::contains_hyphen(ctx.word(0)));
  emit_bool(out, "comma-1", text::contains_comma(ctx.word(-1)));
  emit_bool(out, "comma0", text::contains_comma(ctx.word(0)));
  emit_bool(out, "ispct-1", text::all_punct(ctx.word(-1)));
  emit_bool(out, "ispct0", text::all_punct(ctx.word(0)));
  emit_bool(out, "ispct+1", text::all_punct(ctx.word(1)));

  emit(out, "ptags-1", possible_tags(lexicon, ctx.word(-1)));
  emit(out, "ptags0", possible_tags(lexicon, ctx.word(0)));
  emit(out, "ptags+1", possible_tags(lexicon, ctx.word(1)));
  emit_bool(out, "fullrep", is_full_repetitive(ctx.word(0)));
  emit_bool(out, "partrep", is_partial_repetitive(ctx.word(0)));
  emit(out, "fsyl", text::first_syllable(ctx.word(0)));
  emit(out, "lsyl", text::last_syllable(ctx.word(0)));
}

void extract_vn(const Context& ctx, std::vector<std::string>& out) {
  emit(out, "w-1", ctx.word(-1));
  emit(out, "w0", ctx.word(0));
  emit(out, "w+1", ctx.word(1));
  emit(out, "t-1", ctx.tag(-1));
  emit2(out, "t-2|t-1", ctx.tag(-2), ctx.tag(-1));

  emit_bool(out, "num0", text::contains_digit(ctx.word(0)));
  emit_bool(out, "anycap0", text::contains_uppercase(ctx.word(0)));
  emit_bool(out, "acap0", text::all_uppercase(ctx.word(0)));
  emit_bool(out, "hyph0", text::contains_hyphen(ctx.word(0)));
  emit(out, "fsyl", text::first_syllable(ctx.word(0)));
  emit(out, "lsyl", text::last_syllable(ctx.word(0)));

  auto syls = text::syllables(ctx.word(0));
  auto join = [](const std::string& a, const std::string& b) { return a + "_" + b; };
  if (syls.size() >= 2) {
    emit(out, "fsyl2", join(syls[0], syls[1]));
    emit(out, "lsyl2", join(syls[syls.size() - 2], syls[syls.size() - 1]));
  } else {
    emit(out, "fsyl2", syls.empty() ? std::string(ctx.word(0)) : syls[0]);
    emit(out, "lsyl2", syls.empty() ? std::string(ctx.word(0)) : syls[0]);
  }
  emit(out, "nsyl", std::to_string(text::syllable_count(ctx.word(0))));
}

void extract(const Context& ctx, std::span<const TemplateSet> sets,
             std::vector<std::string>& out, const ClusterMap* clusters,
             const Lexicon* lexicon) {
  for (TemplateSet set : sets) {
    switch (set) {
      case TemplateSet::Spl:
        emit_spl(ctx, out);
        break;
      case TemplateSet::Bi:
        emit_bi(ctx, out);
        break;
      case TemplateSet::Affix:
        emit_affix(ctx, out);
        break;
      case TemplateSet::Ds:
        if (!clusters) {
          throw ConfigError("feature set 'ds' needs a word-cluster file");
        }
        emit_ds(ctx, *clusters, out);
        break;
      case TemplateSet::Jvn:
        if (!lexicon) {
          throw ConfigError("feature set 'jvn' needs a training lexicon");
        }
        extract_jvn(ctx, *lexicon, out);
        break;
      case TemplateSet::Vn:
        extract_vn(ctx, out);
        break;
    }
  }
}

std::vector<std::string> extract(const Context& ctx,
                                 std::span<const TemplateSet> sets,
                                 const ClusterMap* clusters,
                                 const Lexicon* lexicon) {
  std::vector<std::string> out;
  extract(ctx, sets, out, clusters, lexicon);
  return out;
}

}  // namespace vitag
