// cdfs — controlled disjunctions over feature structures.
//
// Verbs: check, resolve, unify, dnf, explain. Exit codes: 0 success,
// 1 usage/parse/check error, 2 propagation failure. Data goes to stdout,
// messages to stderr.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cdfs/checker.hpp"
#include "cdfs/engine.hpp"
#include "cdfs/oracle.hpp"
#include "cdfs/textio.hpp"
#include "cdfs/unifier.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPropagation = 2;

struct Loaded {
  cdfs::LexiconFile file;
};

int load(const std::string& path, Loaded& out) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cdfs: cannot open " << path << "\n";
    return kExitUsage;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  auto parsed = cdfs::parse_lexicon(buf.str());
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics)
      std::cerr << path << ":" << d.str() << "\n";
    return kExitUsage;
  }
  out.file = std::move(*parsed.file);
  return kExitOk;
}

const cdfs::Entry* find_entry(const Loaded& l, const std::string& name,
                              const std::string& path) {
  const cdfs::Entry* e = l.file.find(name);
  if (e == nullptr) std::cerr << path << ": no entry named " << name << "\n";
  return e;
}

// Hard checker errors block every verb that runs the engine.
bool check_gate(const cdfs::Entry& e) {
  const auto rep = cdfs::check(e);
  for (const auto& i : rep.errors)
    std::cerr << "entry " << e.name << ": error [" << i.code << "] " << i.message << "\n";
  return rep.errors.empty();
}

std::vector<cdfs::Constraint> parse_constraints(const std::vector<std::string>& raw,
                                                bool& ok) {
  std::vector<cdfs::Constraint> out;
  ok = true;
  for (const auto& r : raw) {
    auto c = cdfs::Constraint::parse(r);
    if (!c) {
      std::cerr << "cdfs: bad constraint '" << r << "' (expected PATH=ATOM)\n";
      ok = false;
      continue;
    }
    out.push_back(std::move(*c));
  }
  return out;
}

void print_domains(const cdfs::EngineState& s) {
  std::cout << "domains:\n";
  for (const cdfs::RankDomain* d : s.domains()) {
    if (d->status == cdfs::DomainStatus::Inactive) {
      std::cout << "  " << d->name << " inactive\n";
      continue;
    }
    std::cout << "  " << d->name << " = " << cdfs::format_ranks(d->possible) << " of "
              << d->arity << (d->resolved() ? " resolved" : "") << "\n";
  }
}

void print_failure(const cdfs::EngineState& s, const cdfs::Constraint* at) {
  if (s.failure_name().empty()) {
    std::cerr << "propagation failed: unification clash";
    if (at != nullptr) std::cerr << " at " << at->str();
    std::cerr << "\n";
  } else {
    std::cerr << "propagation failed: empty-domain " << s.failure_name() << "\n";
  }
  for (const auto& ev : s.trace()) std::cerr << "  " << ev.str() << "\n";
}

// Applies constraints one by one so failures can name the culprit.
// Returns kExitOk, kExitUsage (bad path) or kExitPropagation.
int apply_constraints(cdfs::EngineState& s, const std::vector<cdfs::Constraint>& cs,
                      bool quiet_failure = false) {
  for (const auto& c : cs) {
    switch (cdfs::constrain(s, c)) {
      case cdfs::ConstrainStatus::Applied:
        break;
      case cdfs::ConstrainStatus::NoSuchPath:
        std::cerr << "cdfs: no-such-path " << c.path.str() << "\n";
        return kExitUsage;
      case cdfs::ConstrainStatus::Failed:
        if (!quiet_failure) print_failure(s, &c);
        return kExitPropagation;
    }
  }
  return kExitOk;
}

int cmd_check(const std::string& path, bool strict, bool json) {
  Loaded l;
  if (int rc = load(path, l); rc != kExitOk) return rc;
  bool errors = false;
  bool warnings = false;
  for (const auto& e : l.file.entries) {
    const auto rep = cdfs::check(e);
    errors = errors || !rep.errors.empty();
    warnings = warnings || !rep.warnings.empty();
    if (json) {
      std::cout << cdfs::report_to_json_text(rep, e.name) << "\n";
      continue;
    }
    if (rep.clean()) {
      std::cout << "entry " << e.name << ": clean\n";
      continue;
    }
    std::cout << "entry " << e.name << ": " << rep.errors.size() << " errors, "
              << rep.warnings.size() << " warnings\n";
    for (const auto& i : rep.errors)
      std::cout << "  error [" << i.code << "] " << i.message << "\n";
    for (const auto& i : rep.warnings)
      std::cout << "  warning [" << i.code << "] " << i.message << "\n";
  }
  if (errors || (strict && warnings)) return kExitUsage;
  return kExitOk;
}

int cmd_resolve(const std::string& path, const std::string& entry,
                const std::vector<std::string>& raw_constraints, bool closure,
                bool json) {
  Loaded l;
  if (int rc = load(path, l); rc != kExitOk) return rc;
  const cdfs::Entry* e = find_entry(l, entry, path);
  if (e == nullptr || !check_gate(*e)) return kExitUsage;
  bool ok = false;
  const auto cs = parse_constraints(raw_constraints, ok);
  if (!ok) return kExitUsage;
  auto s = cdfs::EngineState::init(*e, {closure});
  if (int rc = apply_constraints(s, cs); rc != kExitOk) {
    if (rc == kExitPropagation && json) std::cout << cdfs::to_json(s) << "\n";
    return rc;
  }
  if (json) {
    std::cout << cdfs::to_json(s) << "\n";
    return kExitOk;
  }
  std::cout << cdfs::to_text(s.realize()) << "\n";
  print_domains(s);
  return kExitOk;
}

int cmd_unify(const std::string& path, const std::string& entry,
              const std::string& path2, const std::string& entry2, bool json) {
  Loaded l1, l2;
  if (int rc = load(path, l1); rc != kExitOk) return rc;
  if (int rc = load(path2, l2); rc != kExitOk) return rc;
  const cdfs::Entry* a = find_entry(l1, entry, path);
  const cdfs::Entry* b = find_entry(l2, entry2, path2);
  if (a == nullptr || b == nullptr) return kExitUsage;
  if (!check_gate(*a) || !check_gate(*b)) return kExitUsage;
  // The second operand moves into its own namespace so rank variables and
  // tags cannot collide.
  const cdfs::Entry renamed = cdfs::rename_apart(*b, "e2-");
  auto sa = cdfs::EngineState::init(*a);
  auto sb = cdfs::EngineState::init(renamed);
  auto merged = cdfs::unify_entries(sa, sb);
  if (!merged.state.has_value()) {
    std::cerr << "unify failed: " << merged.error << "\n";
    return kExitPropagation;
  }
  if (merged.state->failed()) {
    print_failure(*merged.state, nullptr);
    if (json) std::cout << cdfs::to_json(*merged.state) << "\n";
    return kExitPropagation;
  }
  if (json) {
    std::cout << cdfs::to_json(*merged.state) << "\n";
    return kExitOk;
  }
  std::cout << cdfs::to_text(merged.state->realize()) << "\n";
  print_domains(*merged.state);
  return kExitOk;
}

int cmd_dnf(const std::string& path, const std::string& entry,
            const std::vector<std::string>& raw_constraints, bool json) {
  Loaded l;
  if (int rc = load(path, l); rc != kExitOk) return rc;
  const cdfs::Entry* e = find_entry(l, entry, path);
  if (e == nullptr || !check_gate(*e)) return kExitUsage;
  bool ok = false;
  const auto cs = parse_constraints(raw_constraints, ok);
  if (!ok) return kExitUsage;
  std::vector<cdfs::Model> models;
  try {
    models = cdfs::filter_models(cdfs::expand_dnf(*e), cs);
  } catch (const cdfs::OracleCapacity&) {
    std::cerr << "cdfs: assignment space too large to expand\n";
    return kExitUsage;
  }
  if (json) {
    std::cout << cdfs::models_to_json_text(models) << "\n";
    return kExitOk;
  }
  std::cout << models.size() << " models\n";
  for (std::size_t i = 0; i < models.size(); ++i) {
    std::cout << "model " << (i + 1) << ":";
    for (const auto& [n, r] : models[i].assignment) std::cout << ' ' << n << '=' << r;
    std::cout << "\n  " << cdfs::to_text(models[i].avm) << "\n";
  }
  return kExitOk;
}

int cmd_explain(const std::string& path, const std::string& entry,
                const std::vector<std::string>& raw_constraints, bool closure) {
  Loaded l;
  if (int rc = load(path, l); rc != kExitOk) return rc;
  const cdfs::Entry* e = find_entry(l, entry, path);
  if (e == nullptr || !check_gate(*e)) return kExitUsage;
  bool ok = false;
  const auto cs = parse_constraints(raw_constraints, ok);
  if (!ok) return kExitUsage;
  auto s = cdfs::EngineState::init(*e, {closure});
  const int rc = apply_constraints(s, cs, /*quiet_failure=*/true);
  if (rc == kExitUsage) return rc;
  for (const auto& ev : s.trace()) std::cout << ev.str() << "\n";
  if (s.failed()) {
    std::cerr << "propagation failed: empty-domain " << s.failure_name() << "\n";
    return kExitPropagation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"controlled disjunctions over feature structures"};
  app.require_subcommand(1);

  std::string file, file2, entry, entry2;
  std::vector<std::string> constraints;
  bool strict = false, json = false, closure = false;

  auto* check = app.add_subcommand("check", "static consistency report");
  check->add_option("file", file)->required();
  check->add_flag("--strict", strict, "treat warnings as errors");
  check->add_flag("--json", json);

  auto* resolve = app.add_subcommand("resolve", "constrain an entry and realize it");
  resolve->add_option("file", file)->required();
  resolve->add_option("--entry", entry)->required();
  resolve->add_option("--constrain", constraints, "PATH=ATOM, repeatable");
  resolve->add_flag("--logical-closure", closure, "contrapositive link pruning");
  resolve->add_flag("--json", json);

  auto* unify = app.add_subcommand("unify", "unify two entries");
  unify->add_option("file", file)->required();
  unify->add_option("--entry", entry)->required();
  unify->add_option("--with", file2)->required();
  unify->add_option("--entry2", entry2)->required();
  unify->add_flag("--json", json);

  auto* dnf = app.add_subcommand("dnf", "brute-force model enumeration");
  dnf->add_option("file", file)->required();
  dnf->add_option("--entry", entry)->required();
  dnf->add_option("--constrain", constraints, "PATH=ATOM, repeatable");
  dnf->add_flag("--json", json);

  auto* explain = app.add_subcommand("explain", "numbered narrowing trace");
  explain->add_option("file", file)->required();
  explain->add_option("--entry", entry)->required();
  explain->add_option("--constrain", constraints, "PATH=ATOM, repeatable");
  explain->add_flag("--logical-closure", closure, "contrapositive link pruning");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (check->parsed()) return cmd_check(file, strict, json);
  if (resolve->parsed()) return cmd_resolve(file, entry, constraints, closure, json);
  if (unify->parsed()) return cmd_unify(file, entry, file2, entry2, json);
  if (dnf->parsed()) return cmd_dnf(file, entry, constraints, json);
  if (explain->parsed()) return cmd_explain(file, entry, constraints, closure);
  return kExitUsage;
}
