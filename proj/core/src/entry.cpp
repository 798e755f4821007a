#include "cdfs/entry.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace cdfs {

RankSet Formula::full_domain() const {
  RankSet s;
  for (Rank r = 1; r <= arity(); ++r) s.insert(r);
  return s;
}

std::string ControlLink::str() const {
  std::ostringstream os;
  os << source_name << ':' << source_rank << "->" << target_name << ':' << target_rank;
  return os.str();
}

const Formula* Entry::formula(std::string_view id) const {
  for (const auto& f : formulae)
    if (f.id == id) return &f;
  return nullptr;
}

std::vector<const Formula*> Entry::formulae_of(std::string_view name) const {
  std::vector<const Formula*> out;
  for (const auto& f : formulae)
    if (f.name == name) out.push_back(&f);
  return out;
}

std::vector<std::string> Entry::disjunction_names() const {
  std::vector<std::string> out;
  for (const auto& f : formulae)
    if (std::find(out.begin(), out.end(), f.name) == out.end()) out.push_back(f.name);
  return out;
}

bool Entry::has_name(std::string_view name) const {
  return std::any_of(formulae.begin(), formulae.end(),
                     [&](const Formula& f) { return f.name == name; });
}

int Entry::arity(std::string_view name) const {
  for (const auto& f : formulae)
    if (f.name == name) return f.arity();
  return 0;
}

namespace {

void refs_in(const Value& v, std::vector<Value>& out) {
  switch (v.kind()) {
    case ValueKind::DisjRef:
      out.push_back(v);
      break;
    case ValueKind::FS:
      for (const auto& [f, sub] : v.features()) refs_in(sub, out);
      break;
    case ValueKind::TagDef:
      refs_in(v.inner(), out);
      break;
    default:
      break;
  }
}

}  // namespace

std::vector<std::string> Entry::inner_names(const Formula& f) const {
  std::vector<std::string> out;
  std::vector<Value> refs;
  for (const auto& d : f.disjuncts) refs_in(d, refs);
  for (const auto& r : refs)
    if (std::find(out.begin(), out.end(), r.name()) == out.end()) out.push_back(r.name());
  return out;
}

std::vector<std::string> Entry::outer_names(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& f : formulae) {
    if (f.name != name || f.anchor.is_root()) continue;
    const Formula* host = formula(f.anchor.outer_formula_id);
    assert(host != nullptr);
    if (std::find(out.begin(), out.end(), host->name) == out.end())
      out.push_back(host->name);
  }
  return out;
}

bool Entry::has_root_formula(std::string_view name) const {
  return std::any_of(formulae.begin(), formulae.end(), [&](const Formula& f) {
    return f.name == name && f.anchor.is_root();
  });
}

namespace {

struct Extractor {
  std::vector<std::string> errors;
  std::vector<Formula> formulae;
  std::vector<ControlLink> links;
  std::map<std::string, int> ordinals;
  std::map<std::string, Value> tag_defs;

  void error(const std::string& msg) { errors.push_back(msg); }

  // Walks the inline tree; `host_name`/`host_rank` identify the innermost
  // enclosing disjunct (empty host_name at top level).
  Value walk(const Value& v, const Path& pos, const Anchor& anchor,
             const std::string& host_name, Rank host_rank) {
    switch (v.kind()) {
      case ValueKind::Atom:
      case ValueKind::Anon:
      case ValueKind::TagUse:
        if (v.is(ValueKind::TagUse) && !host_name.empty())
          error("tag use inside a disjunct: #" + v.tag());
        return v;
      case ValueKind::FS: {
        std::vector<Feature> feats;
        feats.reserve(v.features().size());
        for (const auto& [f, sub] : v.features()) {
          Path sub_pos = pos;
          sub_pos.segments.push_back(f);
          feats.emplace_back(f, walk(sub, sub_pos, anchor, host_name, host_rank));
        }
        return Value::fs(std::move(feats));
      }
      case ValueKind::TagDef: {
        if (!host_name.empty()) {
          error("tag definition inside a disjunct: " + v.tag());
          return walk(v.inner(), pos, anchor, host_name, host_rank);
        }
        if (tag_defs.count(v.tag()) != 0)
          error("duplicate tag definition: " + v.tag());
        Value body = walk(v.inner(), pos, anchor, host_name, host_rank);
        tag_defs.insert_or_assign(v.tag(), body);
        return Value::tag_def(v.tag(), std::move(body));
      }
      case ValueKind::Ctrl: {
        if (host_name.empty()) {
          error("control annotation outside a disjunction");
        } else {
          for (const auto& a : v.arrows())
            links.push_back({host_name, host_rank, a.target_name, a.target_rank});
        }
        return walk(v.inner(), pos, anchor, host_name, host_rank);
      }
      case ValueKind::Disj: {
        if (v.disjuncts().size() < 2)
          error("disjunction " + v.name() + " has arity " +
                std::to_string(v.disjuncts().size()) + "; at least 2 required");
        const int ordinal = ++ordinals[v.name()];
        const std::string id = v.name() + "." + std::to_string(ordinal);
        const std::size_t slot = formulae.size();
        formulae.push_back(Formula{id, v.name(), pos, anchor, {}});
        std::vector<Value> disjuncts;
        disjuncts.reserve(v.disjuncts().size());
        for (std::size_t i = 0; i < v.disjuncts().size(); ++i) {
          const Rank r = static_cast<Rank>(i) + 1;
          disjuncts.push_back(
              walk(v.disjuncts()[i], pos, Anchor{id, r}, v.name(), r));
        }
        formulae[slot].disjuncts = std::move(disjuncts);
        return Value::disj_ref(v.name(), id);
      }
      case ValueKind::DisjRef:
      case ValueKind::Resid:
        error("internal node kind in source tree");
        return Value::anon();
    }
    return Value::anon();
  }
};

void check_tag_uses(const Value& v, const std::map<std::string, Value>& defs,
                    std::vector<std::string>& errors) {
  switch (v.kind()) {
    case ValueKind::TagUse:
      if (defs.count(v.tag()) == 0) errors.push_back("undefined tag: #" + v.tag());
      break;
    case ValueKind::FS:
      for (const auto& [f, sub] : v.features()) check_tag_uses(sub, defs, errors);
      break;
    case ValueKind::TagDef:
      check_tag_uses(v.inner(), defs, errors);
      break;
    case ValueKind::Disj:
      for (const auto& d : v.disjuncts()) check_tag_uses(d, defs, errors);
      break;
    case ValueKind::Ctrl:
      check_tag_uses(v.inner(), defs, errors);
      break;
    default:
      break;
  }
}

}  // namespace

ExtractResult extract_entry(std::string entry_name, const Value& tree) {
  Extractor ex;
  check_tag_uses(tree, collect_tag_defs(tree), ex.errors);
  Value skeleton = ex.walk(tree, Path{}, Anchor{}, "", 0);
  if (!ex.errors.empty()) return {std::nullopt, std::move(ex.errors)};
  Entry e;
  e.name = std::move(entry_name);
  e.skeleton = std::move(skeleton);
  e.formulae = std::move(ex.formulae);
  e.links = std::move(ex.links);
  e.tag_defs = std::move(ex.tag_defs);
  return {std::move(e), {}};
}

namespace {

// Re-inline one value; ctrl wrappers for (name, rank) sources re-attach at
// that name's first formula only, so re-extraction yields the same link set.
Value reinline(const Entry& e, const Value& v) {
  switch (v.kind()) {
    case ValueKind::FS: {
      std::vector<Feature> feats;
      for (const auto& [f, sub] : v.features()) feats.emplace_back(f, reinline(e, sub));
      return Value::fs(std::move(feats));
    }
    case ValueKind::TagDef:
      return Value::tag_def(v.tag(), reinline(e, v.inner()));
    case ValueKind::DisjRef: {
      const Formula* f = e.formula(v.formula_id());
      assert(f != nullptr);
      const bool carrier = !e.formulae_of(f->name).empty() &&
                           e.formulae_of(f->name).front()->id == f->id;
      std::vector<Value> disjuncts;
      for (std::size_t i = 0; i < f->disjuncts.size(); ++i) {
        const Rank r = static_cast<Rank>(i) + 1;
        Value d = reinline(e, f->disjuncts[i]);
        if (carrier) {
          std::vector<CtrlArrow> arrows;
          for (const auto& l : e.links)
            if (l.source_name == f->name && l.source_rank == r)
              arrows.push_back({l.target_name, l.target_rank});
          if (!arrows.empty()) d = Value::ctrl(std::move(d), std::move(arrows));
        }
        disjuncts.push_back(std::move(d));
      }
      return Value::disj(f->name, std::move(disjuncts));
    }
    default:
      return v;
  }
}

Value rename_value(const Value& v, const std::string& prefix) {
  switch (v.kind()) {
    case ValueKind::FS: {
      std::vector<Feature> feats;
      for (const auto& [f, sub] : v.features())
        feats.emplace_back(f, rename_value(sub, prefix));
      return Value::fs(std::move(feats));
    }
    case ValueKind::TagDef:
      return Value::tag_def(prefix + v.tag(), rename_value(v.inner(), prefix));
    case ValueKind::TagUse:
      return Value::tag_use(prefix + v.tag());
    case ValueKind::DisjRef:
      assert(v.require() == nullptr);
      return Value::disj_ref(prefix + v.name(), prefix + v.formula_id());
    default:
      return v;
  }
}

}  // namespace

Value inline_tree(const Entry& e) { return reinline(e, e.skeleton); }

Entry rename_apart(const Entry& e, const std::string& prefix) {
  Entry out;
  out.name = e.name;
  out.skeleton = rename_value(e.skeleton, prefix);
  for (const auto& f : e.formulae) {
    Formula nf;
    nf.id = prefix + f.id;
    nf.name = prefix + f.name;
    nf.position = f.position;
    nf.anchor = f.anchor;
    if (!nf.anchor.is_root()) nf.anchor.outer_formula_id = prefix + f.anchor.outer_formula_id;
    for (const auto& d : f.disjuncts) nf.disjuncts.push_back(rename_value(d, prefix));
    out.formulae.push_back(std::move(nf));
  }
  for (const auto& l : e.links)
    out.links.push_back({prefix + l.source_name, l.source_rank,
                         prefix + l.target_name, l.target_rank});
  for (const auto& [t, v] : e.tag_defs)
    out.tag_defs.emplace(prefix + t, rename_value(v, prefix));
  return out;
}

CollectResult collect_formulae(const Entry& e) {
  CollectResult out;
  for (const auto& f : e.formulae) {
    auto [it, fresh] = out.names.try_emplace(f.name, NameInfo{f.arity(), {}});
    if (!fresh && it->second.arity != f.arity()) {
      if (std::find(out.arity_mismatches.begin(), out.arity_mismatches.end(), f.name) ==
          out.arity_mismatches.end())
        out.arity_mismatches.push_back(f.name);
    }
    it->second.formula_ids.push_back(f.id);
  }
  return out;
}

LinkGraph link_graph(const Entry& e) {
  LinkGraph g;
  g.nodes = e.disjunction_names();
  for (const auto& l : e.links) g.edges.emplace(l.source_name, l.target_name);
  return g;
}

bool entries_equal(const Entry& a, const Entry& b) {
  if (a.name != b.name) return false;
  if (!equal(a.skeleton, b.skeleton)) return false;
  if (a.formulae.size() != b.formulae.size()) return false;
  for (std::size_t i = 0; i < a.formulae.size(); ++i) {
    const Formula& fa = a.formulae[i];
    const Formula& fb = b.formulae[i];
    if (fa.id != fb.id || fa.name != fb.name || fa.position != fb.position ||
        !(fa.anchor == fb.anchor) || fa.disjuncts.size() != fb.disjuncts.size())
      return false;
    for (std::size_t j = 0; j < fa.disjuncts.size(); ++j)
      if (!equal(fa.disjuncts[j], fb.disjuncts[j])) return false;
  }
  auto la = a.links;
  auto lb = b.links;
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  return la == lb;
}

}  // namespace cdfs
