#include "relex/synth.hpp"

#include <stdexcept>

#include <json.hpp>

namespace relex {

namespace {

using Ent = std::vector<std::string>;

constexpr int kPending = -1000;  // resolved to the root in finish()

class SentBuilder {
 public:
  int word(const std::string& tok, int head = kPending) {
    toks_.push_back(tok);
    heads_.push_back(head);
    return static_cast<int>(toks_.size()) - 1;
  }

  // multi-token entities chain onto their last token
  Span entity(const Ent& ent, int head_of_last = kPending) {
    const int start = static_cast<int>(toks_.size());
    const int last = start + static_cast<int>(ent.size()) - 1;
    for (int i = 0; i < static_cast<int>(ent.size()); ++i)
      word(ent[i], start + i == last ? head_of_last : last);
    return Span{start, last};
  }

  void set_head(int idx, int head) { heads_.at(idx) = head; }

  Instance finish(int root, Span e1, Span e2, std::string relation) {
    heads_.at(root) = -1;
    for (int& h : heads_)
      if (h == kPending) h = root;
    Instance inst;
    inst.tokens = std::move(toks_);
    inst.dep_heads = std::move(heads_);
    inst.entity1 = e1;
    inst.entity2 = e2;
    inst.relation = std::move(relation);
    inst.validate();  // a template bug must fail here, not downstream
    return inst;
  }

 private:
  std::vector<std::string> toks_;
  std::vector<int> heads_;
};

void prefix_distractor(SentBuilder& b, Rng& rng) {
  switch (rng.below_int(3)) {
    case 0: {  // according to a recent report ,
      const int acc = b.word("according");
      b.word("to", acc);
      const int a = b.word("a");
      const int recent = b.word("recent");
      const int report = b.word("report", acc + 1);
      b.set_head(a, report);
      b.set_head(recent, report);
      b.word(",");
      break;
    }
    case 1: {  // earlier this month ,
      const int earlier = b.word("earlier");
      const int this_ = b.word("this");
      const int month = b.word("month", earlier);
      b.set_head(this_, month);
      b.word(",");
      break;
    }
    default: {  // as the documents show ,
      const int as = b.word("as");
      const int the = b.word("the");
      const int docs = b.word("documents");
      const int show = b.word("show");
      b.set_head(as, show);
      b.set_head(the, docs);
      b.set_head(docs, show);
      b.word(",");
      break;
    }
  }
}

void suffix_distractor(SentBuilder& b, Rng& rng) {
  switch (rng.below_int(3)) {
    case 0: {  // during a short visit
      const int during = b.word("during");
      const int a = b.word("a");
      const int short_ = b.word("short");
      const int visit = b.word("visit", during);
      b.set_head(a, visit);
      b.set_head(short_, visit);
      break;
    }
    case 1: {  // after many years abroad
      const int after = b.word("after");
      const int many = b.word("many");
      const int years = b.word("years", after);
      b.set_head(many, years);
      b.word("abroad", years);
      break;
    }
    default: {  // with little fanfare
      const int with = b.word("with");
      const int little = b.word("little");
      const int fanfare = b.word("fanfare", with);
      b.set_head(little, fanfare);
      break;
    }
  }
}

// ------------------------------------------------------------- templates

Instance born_in_1(Rng& rng, const Ent& p, const Ent& l, bool pre, bool suf) {
  SentBuilder b;
  if (pre) prefix_distractor(b, rng);
  const Span e1 = b.entity(p);
  const int was = b.word("was");
  const int born = b.word("born");
  b.set_head(e1.end, born);
  b.set_head(was, born);
  const int in = b.word("in", born);
  const Span e2 = b.entity(l, in);
  if (suf) suffix_distractor(b, rng);
  b.word(".");
  return b.finish(born, e1, e2, "born_in");
}

Instance born_in_2(Rng&, const Ent& p, const Ent& l) {
  SentBuilder b;
  const Span e2 = b.entity(l);
  const int is = b.word("is");
  b.set_head(e2.end, is);
  const int the = b.word("the");
  const int bp = b.word("birthplace", is);
  b.set_head(the, bp);
  const int of = b.word("of", bp);
  const Span e1 = b.entity(p, of);
  b.word(".");
  return b.finish(is, e1, e2, "born_in");
}

Instance born_in_3(Rng&, const Ent& p, const Ent& l) {
  SentBuilder b;
  const Span e1 = b.entity(p);
  b.word(",", e1.end);
  const int who = b.word("who");
  const int led = b.word("led", e1.end);
  b.set_head(who, led);
  const int the = b.word("the");
  const int team = b.word("team", led);
  b.set_head(the, team);
  const int that = b.word("that");
  const int won = b.word("won", team);
  b.set_head(that, won);
  const int the2 = b.word("the");
  const int prize = b.word("prize", won);
  b.set_head(the2, prize);
  b.word(",", e1.end);
  const int was = b.word("was");
  const int born = b.word("born");
  b.set_head(e1.end, born);
  b.set_head(was, born);
  const int in = b.word("in", born);
  const Span e2 = b.entity(l, in);
  b.word(".");
  return b.finish(born, e1, e2, "born_in");
}

Instance works_for_1(Rng& rng, const Ent& p, const Ent& o, bool pre, bool suf) {
  SentBuilder b;
  if (pre) prefix_distractor(b, rng);
  const Span e1 = b.entity(p);
  const int works = b.word("works");
  b.set_head(e1.end, works);
  const int for_ = b.word("for", works);
  const Span e2 = b.entity(o, for_);
  if (suf) suffix_distractor(b, rng);
  b.word(".");
  return b.finish(works, e1, e2, "works_for");
}

Instance works_for_2(Rng&, const Ent& p, const Ent& o) {
  SentBuilder b;
  const Span e1 = b.entity(p);
  const int joined = b.word("joined");
  b.set_head(e1.end, joined);
  const Span e2 = b.entity(o, joined);
  const int as = b.word("as");
  const int an = b.word("an");
  const int eng = b.word("engineer", joined);
  b.set_head(as, eng);
  b.set_head(an, eng);
  b.word(".");
  return b.finish(joined, e1, e2, "works_for");
}

Instance works_for_3(Rng&, const Ent& p, const Ent& o) {
  SentBuilder b;
  const Span e1 = b.entity(p);
  b.word(",", e1.end);
  const int who = b.word("who");
  const int spent = b.word("spent", e1.end);
  b.set_head(who, spent);
  const int several = b.word("several");
  const int seasons = b.word("seasons", spent);
  b.set_head(several, seasons);
  b.word("overseas", spent);
  const int with = b.word("with", spent);
  const int the = b.word("the");
  const int group = b.word("group", with);
  b.set_head(the, group);
  b.word(",", e1.end);
  const int works = b.word("works");
  b.set_head(e1.end, works);
  const int for_ = b.word("for", works);
  const Span e2 = b.entity(o, for_);
  b.word(".");
  return b.finish(works, e1, e2, "works_for");
}

Instance located_in_1(Rng& rng, const Ent& o, const Ent& l, bool pre, bool suf) {
  SentBuilder b;
  if (pre) prefix_distractor(b, rng);
  const Span e1 = b.entity(o);
  const int is = b.word("is");
  const int located = b.word("located");
  b.set_head(e1.end, located);
  b.set_head(is, located);
  const int in = b.word("in", located);
  const Span e2 = b.entity(l, in);
  if (suf) suffix_distractor(b, rng);
  b.word(".");
  return b.finish(located, e1, e2, "located_in");
}

Instance located_in_2(Rng&, const Ent& o, const Ent& l) {
  SentBuilder b;
  const Span e1 = b.entity(o);
  const int has = b.word("has");
  b.set_head(e1.end, has);
  const int its = b.word("its");
  const int hq = b.word("headquarters", has);
  b.set_head(its, hq);
  const int in = b.word("in", has);
  const Span e2 = b.entity(l, in);
  b.word(".");
  return b.finish(has, e1, e2, "located_in");
}

Instance located_in_3(Rng&, const Ent& o, const Ent& l) {
  SentBuilder b;
  const Span e1 = b.entity(o);
  b.word(",", e1.end);
  const int which = b.word("which");
  const int analysts = b.word("analysts");
  const int praised = b.word("praised", e1.end);
  b.set_head(which, praised);
  b.set_head(analysts, praised);
  const int for_ = b.word("for", praised);
  const int steady = b.word("steady");
  const int growth = b.word("growth", for_);
  b.set_head(steady, growth);
  b.word(",", e1.end);
  const int is = b.word("is");
  const int located = b.word("located");
  b.set_head(e1.end, located);
  b.set_head(is, located);
  const int in = b.word("in", located);
  const Span e2 = b.entity(l, in);
  b.word(".");
  return b.finish(located, e1, e2, "located_in");
}

Instance founded_by_1(Rng& rng, const Ent& o, const Ent& p, bool pre, bool suf) {
  SentBuilder b;
  if (pre) prefix_distractor(b, rng);
  const Span e1 = b.entity(o);
  const int was = b.word("was");
  const int founded = b.word("founded");
  b.set_head(e1.end, founded);
  b.set_head(was, founded);
  const int by = b.word("by", founded);
  const Span e2 = b.entity(p, by);
  if (suf) suffix_distractor(b, rng);
  b.word(".");
  return b.finish(founded, e1, e2, "founded_by");
}

Instance founded_by_2(Rng&, const Ent& o, const Ent& p) {
  SentBuilder b;
  const Span e2 = b.entity(p);
  const int founded = b.word("founded");
  b.set_head(e2.end, founded);
  const Span e1 = b.entity(o, founded);
  const int in = b.word("in", founded);
  b.word("1990", in);
  b.word(".");
  return b.finish(founded, e1, e2, "founded_by");
}

Instance founded_by_3(Rng&, const Ent& o, const Ent& p) {
  SentBuilder b;
  const Span e1 = b.entity(o);
  b.word(",", e1.end);
  const int which = b.word("which");
  const int grew = b.word("grew", e1.end);
  b.set_head(which, grew);
  b.word("quickly", grew);
  const int in = b.word("in", grew);
  const int recent = b.word("recent");
  const int years = b.word("years", in);
  b.set_head(recent, years);
  b.word(",", e1.end);
  const int was = b.word("was");
  const int founded = b.word("founded");
  b.set_head(e1.end, founded);
  b.set_head(was, founded);
  const int by = b.word("by", founded);
  const Span e2 = b.entity(p, by);
  b.word(".");
  return b.finish(founded, e1, e2, "founded_by");
}

Instance married_to_1(Rng& rng, const Ent& p1, const Ent& p2, bool pre, bool suf) {
  SentBuilder b;
  if (pre) prefix_distractor(b, rng);
  const Span e1 = b.entity(p1);
  const int is = b.word("is");
  const int married = b.word("married");
  b.set_head(e1.end, married);
  b.set_head(is, married);
  const int to = b.word("to", married);
  const Span e2 = b.entity(p2, to);
  if (suf) suffix_distractor(b, rng);
  b.word(".");
  return b.finish(married, e1, e2, "married_to");
}

Instance married_to_2(Rng&, const Ent& p1, const Ent& p2, const Ent& place) {
  SentBuilder b;
  const Span e1 = b.entity(p1);
  const int and_ = b.word("and");
  const Span e2 = b.entity(p2, e1.end);
  b.set_head(and_, e2.end);
  const int were = b.word("were");
  const int married = b.word("married");
  b.set_head(e1.end, married);
  b.set_head(were, married);
  const int in = b.word("in", married);
  b.entity(place, in);  // distractor place mention, not an entity span
  b.word(".");
  return b.finish(married, e1, e2, "married_to");
}

Instance married_to_3(Rng&, const Ent& p1, const Ent& p2) {
  SentBuilder b;
  const Span e1 = b.entity(p1);
  b.word(",", e1.end);
  const int who = b.word("who");
  const int moved = b.word("moved", e1.end);
  b.set_head(who, moved);
  const int to = b.word("to", moved);
  const int the = b.word("the");
  const int coast = b.word("coast", to);
  b.set_head(the, coast);
  const int years = b.word("years");
  const int ago = b.word("ago", moved);
  b.set_head(years, ago);
  b.word(",", e1.end);
  const int is = b.word("is");
  const int married = b.word("married");
  b.set_head(e1.end, married);
  b.set_head(is, married);
  const int to2 = b.word("to", married);
  const Span e2 = b.entity(p2, to2);
  b.word(".");
  return b.finish(married, e1, e2, "married_to");
}

// None templates, one per entity-type signature so types alone never decide
Instance none_visited(Rng& rng, const Ent& p, const Ent& l, bool pre, bool suf) {
  SentBuilder b;
  if (pre) prefix_distractor(b, rng);
  const Span e1 = b.entity(p);
  const int visited = b.word("visited");
  b.set_head(e1.end, visited);
  const Span e2 = b.entity(l, visited);
  b.word("yesterday", visited);
  if (suf) suffix_distractor(b, rng);
  b.word(".");
  return b.finish(visited, e1, e2, "None");
}

Instance none_criticized(Rng&, const Ent& p, const Ent& o) {
  SentBuilder b;
  const Span e1 = b.entity(p);
  const int crit = b.word("criticized");
  b.set_head(e1.end, crit);
  const Span e2 = b.entity(o, crit);
  const int in = b.word("in", crit);
  const int a = b.word("a");
  const int speech = b.word("speech", in);
  b.set_head(a, speech);
  b.word(".");
  return b.finish(crit, e1, e2, "None");
}

Instance none_store(Rng&, const Ent& o, const Ent& l) {
  SentBuilder b;
  const Span e1 = b.entity(o);
  const int opened = b.word("opened");
  b.set_head(e1.end, opened);
  const int a = b.word("a");
  const int store = b.word("store", opened);
  b.set_head(a, store);
  const int near = b.word("near", opened);
  const Span e2 = b.entity(l, near);
  b.word(".");
  return b.finish(opened, e1, e2, "None");
}

Instance none_reception(Rng&, const Ent& o, const Ent& p) {
  SentBuilder b;
  const Span e1 = b.entity(o);
  const int hosted = b.word("hosted");
  b.set_head(e1.end, hosted);
  const int a = b.word("a");
  const int reception = b.word("reception", hosted);
  b.set_head(a, reception);
  const int for_ = b.word("for", hosted);
  const Span e2 = b.entity(p, for_);
  b.word(".");
  return b.finish(hosted, e1, e2, "None");
}

Instance none_met(Rng&, const Ent& p1, const Ent& p2) {
  SentBuilder b;
  const Span e1 = b.entity(p1);
  const int met = b.word("met");
  b.set_head(e1.end, met);
  const Span e2 = b.entity(p2, met);
  const int at = b.word("at", met);
  const int the = b.word("the");
  const int conf = b.word("conference", at);
  b.set_head(the, conf);
  b.word(".");
  return b.finish(met, e1, e2, "None");
}

Instance none_traveled(Rng&, const Ent& p, const Ent& l) {
  SentBuilder b;
  const Span e1 = b.entity(p);
  b.word(",", e1.end);
  const int along = b.word("along");
  const int with = b.word("with");
  const int several = b.word("several");
  const int colleagues = b.word("colleagues");
  const int from = b.word("from", colleagues);
  const int the = b.word("the");
  const int office = b.word("office", from);
  b.set_head(the, office);
  b.set_head(along, colleagues);
  b.set_head(with, colleagues);
  b.set_head(several, colleagues);
  b.word(",", e1.end);
  const int traveled = b.word("traveled");
  b.set_head(colleagues, traveled);
  b.set_head(e1.end, traveled);
  const int to = b.word("to", traveled);
  const Span e2 = b.entity(l, to);
  b.word(".");
  return b.finish(traveled, e1, e2, "None");
}

Instance none_report(Rng&, const Ent& p, const Ent& o) {
  SentBuilder b;
  const Span e1 = b.entity(p);
  const int wrote = b.word("wrote");
  b.set_head(e1.end, wrote);
  const int a = b.word("a");
  const int detailed = b.word("detailed");
  const int report = b.word("report", wrote);
  b.set_head(a, report);
  b.set_head(detailed, report);
  const int about = b.word("about", report);
  const Span e2 = b.entity(o, about);
  b.word(".");
  return b.finish(wrote, e1, e2, "None");
}

Instance none_building(Rng&, const Ent& o, const Ent& l) {
  SentBuilder b;
  const Span e1 = b.entity(o);
  const int sold = b.word("sold");
  b.set_head(e1.end, sold);
  const int its = b.word("its");
  const int oldest = b.word("oldest");
  const int building = b.word("building", sold);
  b.set_head(its, building);
  b.set_head(oldest, building);
  const int in = b.word("in", sold);
  const Span e2 = b.entity(l, in);
  b.word(".");
  return b.finish(sold, e1, e2, "None");
}

// ----------------------------------------------------------------- pools

const std::vector<Ent>& persons() {
  static const std::vector<Ent> pool = {
      {"Obama"},          {"Einstein"},       {"Mozart"},        {"Curie"},
      {"Turing"},         {"Darwin"},         {"Tesla"},         {"Noether"},
      {"John", "Carter"}, {"Maria", "Lopez"}, {"David", "Chen"}, {"Anna", "Schmidt"},
      {"Omar", "Hassan"}, {"Elena", "Petrova"}};
  return pool;
}

const std::vector<Ent>& places() {
  static const std::vector<Ent> pool = {
      {"Hawaii"},  {"Chicago"}, {"Texas"},        {"Nairobi"},      {"Oslo"},
      {"Madrid"},  {"Cairo"},   {"Lisbon"},       {"Denver"},       {"Mumbai"},
      {"New", "York"}, {"San", "Diego"}, {"Hong", "Kong"}, {"Los", "Angeles"}};
  return pool;
}

const std::vector<Ent>& orgs() {
  static const std::vector<Ent> pool = {
      {"Google"},  {"Pixar"},        {"Toyota"},        {"Nestle"},
      {"Siemens"}, {"Airbus"},       {"Bell", "Labs"},  {"Blue", "Origin"},
      {"Red", "Cross"}, {"General", "Motors"}};
  return pool;
}

const Ent& pick(Rng& rng, const std::vector<Ent>& pool) {
  return pool[rng.below(pool.size())];
}

}  // namespace

Instance generate_instance(Rng& rng) {
  const bool valid = rng.below(100) < 60;
  const int tpl = static_cast<int>(rng.below(100));
  const bool pre = rng.bernoulli(0.3);
  const bool suf = rng.bernoulli(0.25);

  if (valid) {
    const int rel = rng.below_int(5);
    switch (rel) {
      case 0: {
        const Ent p = pick(rng, persons()), l = pick(rng, places());
        if (tpl < 45) return born_in_1(rng, p, l, pre, suf);
        if (tpl < 75) return born_in_2(rng, p, l);
        return born_in_3(rng, p, l);
      }
      case 1: {
        const Ent p = pick(rng, persons()), o = pick(rng, orgs());
        if (tpl < 45) return works_for_1(rng, p, o, pre, suf);
        if (tpl < 75) return works_for_2(rng, p, o);
        return works_for_3(rng, p, o);
      }
      case 2: {
        const Ent o = pick(rng, orgs()), l = pick(rng, places());
        if (tpl < 45) return located_in_1(rng, o, l, pre, suf);
        if (tpl < 75) return located_in_2(rng, o, l);
        return located_in_3(rng, o, l);
      }
      case 3: {
        const Ent o = pick(rng, orgs()), p = pick(rng, persons());
        if (tpl < 45) return founded_by_1(rng, o, p, pre, suf);
        if (tpl < 75) return founded_by_2(rng, o, p);
        return founded_by_3(rng, o, p);
      }
      default: {
        Ent p1 = pick(rng, persons()), p2 = pick(rng, persons());
        while (p2 == p1) p2 = pick(rng, persons());
        if (tpl < 45) return married_to_1(rng, p1, p2, pre, suf);
        if (tpl < 75) return married_to_3(rng, p1, p2);
        return married_to_2(rng, p1, p2, pick(rng, places()));
      }
    }
  }

  switch (rng.below_int(8)) {
    case 0: return none_visited(rng, pick(rng, persons()), pick(rng, places()), pre, suf);
    case 1: return none_criticized(rng, pick(rng, persons()), pick(rng, orgs()));
    case 2: return none_store(rng, pick(rng, orgs()), pick(rng, places()));
    case 3: return none_reception(rng, pick(rng, orgs()), pick(rng, persons()));
    case 4: {
      Ent p1 = pick(rng, persons()), p2 = pick(rng, persons());
      while (p2 == p1) p2 = pick(rng, persons());
      return none_met(rng, p1, p2);
    }
    case 5: return none_traveled(rng, pick(rng, persons()), pick(rng, places()));
    case 6: return none_report(rng, pick(rng, persons()), pick(rng, orgs()));
    default: return none_building(rng, pick(rng, orgs()), pick(rng, places()));
  }
}

std::string instance_to_jsonl(const Instance& inst) {
  nlohmann::ordered_json j;
  j["tokens"] = inst.tokens;
  j["entity1"] = {{"start", inst.entity1.start}, {"end", inst.entity1.end}};
  j["entity2"] = {{"start", inst.entity2.start}, {"end", inst.entity2.end}};
  j["dep_heads"] = inst.dep_heads;
  j["relation"] = inst.relation;
  return j.dump();
}

std::vector<std::string> generate_corpus_lines(std::uint64_t seed, int count) {
  return generate_corpus_slice(seed, 0, count);
}

std::vector<std::string> generate_corpus_slice(std::uint64_t seed, int from, int count) {
  if (count < 0 || from < 0) throw std::invalid_argument("generate_corpus_slice: negative range");
  Rng rng(seed);
  std::vector<std::string> lines;
  lines.reserve(count);
  for (int i = 0; i < from + count; ++i) {
    const Instance inst = generate_instance(rng);
    if (i >= from) lines.push_back(instance_to_jsonl(inst));
  }
  return lines;
}

}  // namespace relex
