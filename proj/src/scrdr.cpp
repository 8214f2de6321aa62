#include "vitag/scrdr.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "vitag/text.hpp"

namespace vitag {

std::string_view to_string(Slot slot) {
  switch (slot) {
    case Slot::WM2: return "w-2";
    case Slot::WM1: return "w-1";
    case Slot::W0: return "w0";
    case Slot::WP1: return "w+1";
    case Slot::WP2: return "w+2";
    case Slot::TM2: return "t-2";
    case Slot::TM1: return "t-1";
    case Slot::T0: return "t0";
    case Slot::TP1: return "t+1";
    case Slot::TP2: return "t+2";
    case Slot::Sfx1: return "sfx1";
    case Slot::Sfx2: return "sfx2";
    case Slot::Sfx3: return "sfx3";
    case Slot::Sfx4: return "sfx4";
  }
  return "?";
}

Slot parse_slot(std::string_view name) {
  static constexpr Slot kAll[] = {
      Slot::WM2, Slot::WM1, Slot::W0, Slot::WP1, Slot::WP2,
      Slot::TM2, Slot::TM1, Slot::T0, Slot::TP1, Slot::TP2,
      Slot::Sfx1, Slot::Sfx2, Slot::Sfx3, Slot::Sfx4,
  };
  for (Slot s : kAll) {
    if (to_string(s) == name) return s;
  }
  throw ParseError("unknown condition slot '" + std::string(name) + "'");
}

std::string_view slot_view(const Context& ctx, Slot slot) {
  switch (slot) {
    case Slot::WM2: return ctx.word(-2);
    case Slot::WM1: return ctx.word(-1);
    case Slot::W0: return ctx.word(0);
    case Slot::WP1: return ctx.word(1);
    case Slot::WP2: return ctx.word(2);
    case Slot::TM2: return ctx.tag(-2);
    case Slot::TM1: return ctx.tag(-1);
    case Slot::T0: return ctx.tag(0);
    case Slot::TP1: return ctx.tag(1);
    case Slot::TP2: return ctx.tag(2);
    default:
      throw ConfigError("suffix slots have no stored view");
  }
}

namespace {

std::size_t suffix_len(Slot slot) {
  switch (slot) {
    case Slot::Sfx1: return 1;
    case Slot::Sfx2: return 2;
    case Slot::Sfx3: return 3;
    case Slot::Sfx4: return 4;
    default: return 0;
  }
}

Slot suffix_slot(std::size_t k) {
  return static_cast<Slot>(static_cast<int>(Slot::Sfx1) + static_cast<int>(k) - 1);
}

}  // namespace

bool RuleCondition::matches(const Context& ctx) const {
  for (const auto& c : conjuncts) {
    std::size_t k = suffix_len(c.slot);
    if (k == 0) {
      if (slot_view(ctx, c.slot) != c.value) return false;
    } else {
      std::string_view w0 = ctx.word(0);
      if (text::cp_length(w0) < k) return false;
      if (text::cp_suffix(w0, k) != c.value) return false;
    }
  }
  return true;
}

std::string RuleCondition::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < conjuncts.size(); ++i) {
    if (i > 0) out += " && ";
    out += to_string(conjuncts[i].slot);
    out += '=';
    out += conjuncts[i].value;
  }
  return out;
}

std::string Rule::serialize() const {
  return condition.serialize() + " -> " + conclusion;
}

namespace {

const std::vector<std::vector<Slot>>& context_templates() {
  static const std::vector<std::vector<Slot>> kTemplates = {
      {Slot::WM2}, {Slot::WM1}, {Slot::W0}, {Slot::WP1}, {Slot::WP2},
      {Slot::WM2, Slot::W0}, {Slot::WM1, Slot::W0}, {Slot::WM1, Slot::WP1},
      {Slot::W0, Slot::WP1}, {Slot::W0, Slot::WP2},
      {Slot::WM2, Slot::WM1, Slot::W0}, {Slot::WM1, Slot::W0, Slot::WP1},
      {Slot::W0, Slot::WP1, Slot::WP2},
      {Slot::TM2}, {Slot::TM1}, {Slot::T0}, {Slot::TP1}, {Slot::TP2},
      {Slot::TM2, Slot::TM1}, {Slot::TM1, Slot::TP1}, {Slot::TP1, Slot::TP2},
      {Slot::TM1, Slot::W0}, {Slot::W0, Slot::TP1},
      {Slot::TM1, Slot::W0, Slot::TP1}, {Slot::TM2, Slot::TM1, Slot::W0},
      {Slot::W0, Slot::TP1, Slot::TP2},
  };
  return kTemplates;
}

}  // namespace

std::vector<Rule> generate_candidates(const Context& ctx, const Tag& correct) {
  std::vector<Rule> rules;
  rules.reserve(30);
  for (const auto& slots : context_templates()) {
    RuleCondition cond;
    cond.conjuncts.reserve(slots.size());
    for (Slot s : slots) {
      cond.conjuncts.push_back(Conjunct{s, std::string(slot_view(ctx, s))});
    }
    rules.push_back(Rule{std::move(cond), correct});
  }
  std::size_t len = text::cp_length(ctx.word(0));
  for (std::size_t k = 1; k <= 4 && k + 1 <= len; ++k) {
    RuleCondition cond;
    cond.conjuncts.push_back(Conjunct{suffix_slot(k), text::cp_suffix(ctx.word(0), k)});
    rules.push_back(Rule{std::move(cond), correct});
  }
  return rules;
}

InitialTagger InitialTagger::from_corpus(const TaggedCorpus& corpus) {
  return InitialTagger(Lexicon::from_corpus(corpus));
}

InitialTagger InitialTagger::load(const std::string& path) {
  return InitialTagger(Lexicon::load(path));
}

void InitialTagger::save(const std::string& path) const { lexicon_.save(path); }

Tag InitialTagger::tag_word(std::string_view word) const {
  if (const Tag* t = lexicon_.most_frequent(word)) return *t;
  if (text::all_digits(word)) return "M";
  if (text::starts_uppercase(word)) return "Np";
  if (text::is_single_punct(word) && word != "/") return Tag(word);
  if (text::contains_digit(word)) return "M";
  return lexicon_.default_tag();
}

std::vector<Tag> InitialTagger::tag(std::span<const std::string_view> words) const {
  std::vector<Tag> out;
  out.reserve(words.size());
  for (auto w : words) out.push_back(tag_word(w));
  return out;
}

Sentence InitialTagger::tag(const Sentence& sentence) const {
  Sentence out = sentence;
  for (auto& tok : out) tok.tag = tag_word(tok.word);
  return out;
}

ObjectDictionary ObjectDictionary::build(const TaggedCorpus& train,
                                         const InitialTagger& tagger) {
  ObjectDictionary dict;
  dict.sentences_.reserve(train.sentences.size());
  std::vector<std::string_view> wv;
  for (const auto& sentence : train.sentences) {
    SentenceStore store;
    store.words.reserve(sentence.size());
    wv.clear();
    for (const auto& tok : sentence) store.words.push_back(tok.word);
    for (const auto& w : store.words) wv.push_back(w);
    store.tags = tagger.tag(wv);
    dict.sentences_.push_back(std::move(store));
    for (const auto& tok : sentence) dict.correct_.push_back(tok.tag);
  }
  // Views are taken only now that every container has reached its final
  // location.
  for (auto& store : dict.sentences_) {
    store.word_views.assign(store.words.begin(), store.words.end());
    store.tag_views.assign(store.tags.begin(), store.tags.end());
    for (std::size_t i = 0; i < store.words.size(); ++i) {
      dict.contexts_.push_back(make_context(store.word_views, store.tag_views, i));
    }
  }
  return dict;
}

std::size_t ObjectDictionary::initial_error_count() const {
  std::size_t errors = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (initial_tag(i) != correct_[i]) ++errors;
  }
  return errors;
}

ScrdrTree::ScrdrTree() {
  ScrdrNode root;
  root.rule.conclusion = "*";
  nodes_.push_back(std::move(root));
}

int ScrdrTree::add_except_child(int parent, Rule rule) {
  if (parent < 0 || static_cast<std::size_t>(parent) >= nodes_.size()) {
    throw DataError("bad parent node id");
  }
  if (rule.condition.conjuncts.empty()) {
    throw DataError("exception rules need a condition");
  }
  auto p = static_cast<std::size_t>(parent);
  if (nodes_[p].except_child != -1) {
    throw DataError("node already has an except child");
  }
  int depth = nodes_[p].depth + 1;
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(ScrdrNode{std::move(rule), -1, -1, depth});
  nodes_[p].except_child = id;
  return id;
}

int ScrdrTree::add_if_not_sibling(int node, Rule rule) {
  if (node <= 0 || static_cast<std::size_t>(node) >= nodes_.size()) {
    throw DataError("bad node id for an if-not sibling");
  }
  if (rule.condition.conjuncts.empty()) {
    throw DataError("exception rules need a condition");
  }
  auto n = static_cast<std::size_t>(node);
  if (nodes_[n].if_not_child != -1) {
    throw DataError("node already has an if-not child");
  }
  int depth = nodes_[n].depth;
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(ScrdrNode{std::move(rule), -1, -1, depth});
  nodes_[n].if_not_child = id;
  return id;
}

int ScrdrTree::attach_exception(int node, Rule rule) {
  if (node < 0 || static_cast<std::size_t>(node) >= nodes_.size()) {
    throw DataError("bad node id");
  }
  int cur = nodes_[static_cast<std::size_t>(node)].except_child;
  if (cur == -1) return add_except_child(node, std::move(rule));
  while (nodes_[static_cast<std::size_t>(cur)].if_not_child != -1) {
    cur = nodes_[static_cast<std::size_t>(cur)].if_not_child;
  }
  return add_if_not_sibling(cur, std::move(rule));
}

std::size_t ScrdrTree::walk(const Context& ctx) const {
  std::size_t last_fired = 0;
  int cur = nodes_[0].except_child;
  while (cur != -1) {
    const ScrdrNode& node = nodes_[static_cast<std::size_t>(cur)];
    if (node.rule.condition.matches(ctx)) {
      last_fired = static_cast<std::size_t>(cur);
      cur = node.except_child;
    } else {
      cur = node.if_not_child;
    }
  }
  return last_fired;
}

Tag ScrdrTree::conclude(const Context& ctx) const {
  std::size_t fired = walk(ctx);
  if (fired == 0) return Tag(ctx.tag(0));
  return nodes_[fired].rule.conclusion;
}

namespace {

struct Candidate {
  Rule rule;
  long long net = 0;
  long long broken = 0;
  long long fired = 0;
  std::string cond_key;
};

// Picks the qualifying rule with the greatest net repair over this node's
// objects. All of them currently carry the node's conclusion, so a rule
// (condition -> z) repairs the matching objects whose gold tag is z and
// breaks the matching ones whose gold tag is the current conclusion.
std::optional<Candidate> select_rule(const ObjectDictionary& dict,
                                     const std::vector<std::uint32_t>& pool,
                                     const Tag& current,
                                     const GrowParams& params) {
  std::optional<Candidate> best;
  auto consider = [&](Candidate cand) {
    if (cand.fired < params.min_fired || cand.net < params.min_gain) return;
    if (!best) {
      best = std::move(cand);
      return;
    }
    const Candidate& b = *best;
    bool better;
    if (cand.net != b.net) better = cand.net > b.net;
    else if (cand.broken != b.broken) better = cand.broken < b.broken;
    else if (cand.cond_key != b.cond_key) better = cand.cond_key < b.cond_key;
    else better = cand.rule.conclusion < b.rule.conclusion;
    if (better) best = std::move(cand);
  };

  struct Group {
    std::vector<Conjunct> conjuncts;
    long long fired = 0;
    std::map<std::string_view, long long> per_tag;
    std::map<std::string_view, long long> generators;
  };

  for (const auto& slots : context_templates()) {
    StringMap<Group> groups;
    std::string key;
    for (std::uint32_t id : pool) {
      const Context& ctx = dict.context(id);
      key.clear();
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (i > 0) key += " && ";
        key += to_string(slots[i]);
        key += '=';
        key += slot_view(ctx, slots[i]);
      }
      auto it = groups.find(key);
      if (it == groups.end()) {
        Group g;
        g.conjuncts.reserve(slots.size());
        for (Slot s : slots) g.conjuncts.push_back(Conjunct{s, std::string(slot_view(ctx, s))});
        it = groups.emplace(key, std::move(g)).first;
      }
      Group& g = it->second;
      ++g.fired;
      ++g.per_tag[dict.correct_tag(id)];
    }
    for (auto& [cond_key, g] : groups) {
      auto bit = g.per_tag.find(current);
      long long broken = (bit == g.per_tag.end()) ? 0 : bit->second;
      for (const auto& [tag, cnt] : g.per_tag) {
        if (tag == current) continue;
        Candidate cand;
        cand.rule = Rule{RuleCondition{g.conjuncts}, Tag(tag)};
        cand.net = cnt - broken;
        cand.broken = broken;
        cand.fired = g.fired;
        cand.cond_key = cond_key;
        consider(std::move(cand));
      }
    }
  }

  // Suffix templates: a rule fires on any word long enough to carry the
  // suffix, but may only be generated from a word strictly longer than it,
  // so a conclusion needs at least one such generator in the group.
  for (std::size_t k = 1; k <= 4; ++k) {
    StringMap<Group> groups;
    for (std::uint32_t id : pool) {
      std::string_view w0 = dict.context(id).word(0);
      std::size_t len = text::cp_length(w0);
      if (len < k) continue;
      std::string sfx = text::cp_suffix(w0, k);
      auto it = groups.find(sfx);
      if (it == groups.end()) {
        Group g;
        g.conjuncts.push_back(Conjunct{suffix_slot(k), sfx});
        it = groups.emplace(sfx, std::move(g)).first;
      }
      Group& g = it->second;
      ++g.fired;
      ++g.per_tag[dict.correct_tag(id)];
      if (len >= k + 1) ++g.generators[dict.correct_tag(id)];
    }
    for (auto& [value, g] : groups) {
      auto bit = g.per_tag.find(current);
      long long broken = (bit == g.per_tag.end()) ? 0 : bit->second;
      for (const auto& [tag, cnt] : g.per_tag) {
        if (tag == current) continue;
        auto git = g.generators.find(tag);
        if (git == g.generators.end() || git->second == 0) continue;
        Candidate cand;
        cand.rule = Rule{RuleCondition{g.conjuncts}, Tag(tag)};
        cand.net = cnt - broken;
        cand.broken = broken;
        cand.fired = g.fired;
        cand.cond_key = cand.rule.condition.serialize();
        consider(std::move(cand));
      }
    }
  }
  return best;
}

}  // namespace

ScrdrTree grow_tree(const ObjectDictionary& dict, const GrowParams& params,
                    GrowStats* stats) {
  if (dict.size() == 0) throw DataError("cannot grow a tree from an empty dictionary");
  if (params.min_fired < 1) throw ConfigError("min_fired must be at least 1");
  if (params.min_gain < 1) throw ConfigError("min_gain must be at least 1");
  if (params.max_depth < 1) throw ConfigError("max_depth must be at least 1");

  GrowStats local;
  GrowStats& st = stats ? *stats : local;
  st = GrowStats{};
  st.initial_errors = dict.initial_error_count();

  ScrdrTree tree;
  std::vector<Tag> layer1_tags;
  {
    StringSet seen;
    for (std::size_t i = 0; i < dict.size(); ++i) {
      auto t = dict.initial_tag(i);
      if (seen.insert(std::string(t)).second) layer1_tags.emplace_back(t);
    }
    std::sort(layer1_tags.begin(), layer1_tags.end());
  }
  StringMap<int> layer1;
  for (const Tag& t : layer1_tags) {
    int id = tree.attach_exception(
        0, Rule{RuleCondition{{Conjunct{Slot::T0, t}}}, t});
    layer1.emplace(t, id);
  }
  st.layer1_nodes = layer1_tags.size();

  std::vector<std::vector<std::uint32_t>> pools(tree.size());
  for (std::size_t i = 0; i < dict.size(); ++i) {
    int owner = layer1.find(dict.initial_tag(i))->second;
    pools[static_cast<std::size_t>(owner)].push_back(static_cast<std::uint32_t>(i));
  }

  auto total_errors = static_cast<long long>(st.initial_errors);
  for (std::size_t node_id = 1; node_id < tree.size(); ++node_id) {
    if (tree.nodes()[node_id].depth >= params.max_depth) continue;
    while (true) {
      auto cand = select_rule(dict, pools[node_id],
                              tree.nodes()[node_id].rule.conclusion, params);
      if (!cand) break;
      int child = tree.attach_exception(static_cast<int>(node_id), cand->rule);
      pools.resize(tree.size());
      auto& pool = pools[node_id];
      auto& child_pool = pools[static_cast<std::size_t>(child)];
      std::vector<std::uint32_t> stay;
      stay.reserve(pool.size());
      for (std::uint32_t id : pool) {
        if (cand->rule.condition.matches(dict.context(id))) {
          child_pool.push_back(id);
        } else {
          stay.push_back(id);
        }
      }
      if (static_cast<long long>(child_pool.size()) != cand->fired) {
        throw Error("internal: rule fired-count bookkeeping diverged");
      }
      pool = std::move(stay);
      total_errors -= cand->net;
      ++st.rules_attached;
      st.errors_after_each_attachment.push_back(static_cast<std::size_t>(total_errors));
    }
  }

  // The incremental accounting above is the learner's own view; verify it
  // against the built tree before anyone relies on the result.
  long long recount = 0;
  for (std::size_t i = 0; i < dict.size(); ++i) {
    const Context& ctx = dict.context(i);
    std::size_t fired = tree.walk(ctx);
    std::string_view tag = (fired == 0) ? ctx.tag(0)
                                        : std::string_view(tree.nodes()[fired].rule.conclusion);
    if (tag != dict.correct_tag(i)) ++recount;
  }
  if (recount != total_errors) {
    throw Error("internal: error bookkeeping diverged during tree growth");
  }
  st.final_errors = static_cast<std::size_t>(recount);
  return tree;
}

std::vector<Tag> scrdr_tag(const ScrdrTree& tree, const InitialTagger& tagger,
                           std::span<const std::string_view> words) {
  std::vector<Tag> initial = tagger.tag(words);
  std::vector<std::string_view> tag_views(initial.begin(), initial.end());
  std::vector<Tag> out;
  out.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    Context ctx = make_context(words, tag_views, i);
    out.push_back(tree.conclude(ctx));
  }
  return out;
}

Sentence scrdr_tag(const ScrdrTree& tree, const InitialTagger& tagger,
                   const Sentence& sentence) {
  std::vector<std::string_view> words;
  words.reserve(sentence.size());
  for (const auto& tok : sentence) words.push_back(tok.word);
  std::vector<Tag> tags = scrdr_tag(tree, tagger, words);
  Sentence out = sentence;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].tag = std::move(tags[i]);
  return out;
}

namespace {

constexpr std::string_view kTreeMagic = "scrdr tree";
constexpr std::string_view kTreeHeader = "scrdr tree v1";

}  // namespace

std::string ScrdrTree::serialize() const {
  std::string out{kTreeHeader};
  out += '\n';
  // Pre-order, except subtree before the if-not chain; two stack pushes in
  // reverse order give that with no recursion.
  std::vector<std::pair<int, int>> stack;  // (node id, 0 root / 1 except / 2 if-not)
  stack.emplace_back(0, 0);
  while (!stack.empty()) {
    auto [id, kind] = stack.back();
    stack.pop_back();
    const ScrdrNode& n = nodes_[static_cast<std::size_t>(id)];
    out.append(static_cast<std::size_t>(2 * n.depth), ' ');
    if (kind == 0) {
      out += "DEFAULT -> *";
    } else {
      out += (kind == 1) ? "EXCEPT " : "IF-NOT ";
      out += n.rule.condition.serialize();
      out += " -> ";
      out += n.rule.conclusion;
    }
    out += '\n';
    if (n.if_not_child != -1) stack.emplace_back(n.if_not_child, 2);
    if (n.except_child != -1) stack.emplace_back(n.except_child, 1);
  }
  return out;
}

ScrdrTree ScrdrTree::deserialize(std::string_view text) {
  std::size_t pos = 0;
  std::size_t lineno = 0;
  auto next_line = [&](std::string_view& line) {
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      line = (eol == std::string_view::npos) ? text.substr(pos)
                                             : text.substr(pos, eol - pos);
      pos = (eol == std::string_view::npos) ? text.size() : eol + 1;
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) return true;
    }
    return false;
  };
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("line " + std::to_string(lineno) + ": " + msg);
  };

  std::string_view line;
  if (!next_line(line)) throw ParseError("empty tree file");
  if (line != kTreeHeader) {
    if (line.substr(0, kTreeMagic.size()) == kTreeMagic) {
      throw ParseError("unsupported tree format '" + std::string(line) + "'");
    }
    throw ParseError("not a rule-tree file (missing '" + std::string(kTreeHeader) + "' header)");
  }
  if (!next_line(line)) throw ParseError("tree file has no default node");
  if (line != "DEFAULT -> *") {
    throw fail("expected 'DEFAULT -> *', got '" + std::string(line) + "'");
  }

  ScrdrTree tree;
  std::vector<int> last_at{0};          // per indent level, the latest node
  std::vector<std::string> path_at{"DEFAULT"};

  while (next_line(line)) {
    std::size_t spaces = 0;
    while (spaces < line.size() && line[spaces] == ' ') ++spaces;
    if (spaces % 2 != 0) throw fail("odd indentation");
    std::size_t indent = spaces / 2;
    std::string_view rest = line.substr(spaces);

    bool is_except;
    if (rest.substr(0, 7) == "EXCEPT ") {
      is_except = true;
      rest.remove_prefix(7);
    } else if (rest.substr(0, 7) == "IF-NOT ") {
      is_except = false;
      rest.remove_prefix(7);
    } else {
      throw fail("expected an EXCEPT or IF-NOT node");
    }

    std::size_t arrow = rest.rfind(" -> ");
    if (arrow == std::string_view::npos) throw fail("missing ' -> '");
    std::string_view cond_str = rest.substr(0, arrow);
    std::string_view conclusion = rest.substr(arrow + 4);
    if (conclusion.empty() || conclusion.find(' ') != std::string_view::npos) {
      throw fail("bad conclusion '" + std::string(conclusion) + "'");
    }

    Rule rule;
    rule.conclusion = Tag(conclusion);
    std::size_t cpos = 0;
    while (true) {
      std::size_t amp = cond_str.find(" && ", cpos);
      std::string_view part = (amp == std::string_view::npos)
                                  ? cond_str.substr(cpos)
                                  : cond_str.substr(cpos, amp - cpos);
      std::size_t eq = part.find('=');
      if (eq == std::string_view::npos || eq == 0 || eq + 1 == part.size()) {
        throw fail("bad conjunct '" + std::string(part) + "'");
      }
      Slot slot;
      try {
        slot = parse_slot(part.substr(0, eq));
      } catch (const ParseError& e) {
        throw fail(e.what());
      }
      rule.condition.conjuncts.push_back(Conjunct{slot, std::string(part.substr(eq + 1))});
      if (amp == std::string_view::npos) break;
      cpos = amp + 4;
    }

    auto path = [&](std::size_t level) {
      std::string p;
      for (std::size_t i = 0; i <= level && i < path_at.size(); ++i) {
        if (i > 0) p += " > ";
        p += path_at[i];
      }
      return p;
    };

    int id;
    if (is_except) {
      if (indent == 0 || indent > last_at.size()) {
        throw fail("EXCEPT node at depth " + std::to_string(indent) +
                   " has no parent (under " + path(last_at.size() - 1) + ")");
      }
      int parent = last_at[indent - 1];
      try {
        id = tree.add_except_child(parent, std::move(rule));
      } catch (const DataError& e) {
        throw fail(std::string(e.what()) + " (under " + path(indent - 1) + ")");
      }
    } else {
      if (indent >= last_at.size()) {
        throw fail("IF-NOT node at depth " + std::to_string(indent) +
                   " has no predecessor (under " + path(last_at.size() - 1) + ")");
      }
      int prev = last_at[indent];
      try {
        id = tree.add_if_not_sibling(prev, std::move(rule));
      } catch (const DataError& e) {
        throw fail(std::string(e.what()) + " (under " + path(indent) + ")");
      }
    }
    last_at.resize(indent + 1);
    path_at.resize(indent + 1);
    last_at[indent] = id;
    path_at[indent] = std::string(is_except ? "EXCEPT " : "IF-NOT ") +
                      tree.nodes()[static_cast<std::size_t>(id)].rule.condition.serialize();
  }
  return tree;
}

void ScrdrTree::save(const std::string& path) const {
  write_file_atomic(path, serialize());
}

ScrdrTree ScrdrTree::load(const std::string& path) {
  try {
    return deserialize(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

bool ScrdrTree::sniff(std::string_view bytes) {
  return bytes.substr(0, std::min(kTreeMagic.size(), bytes.size())) == kTreeMagic;
}

}  // namespace vitag
