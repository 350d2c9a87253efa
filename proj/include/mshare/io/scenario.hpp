#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mshare/engine.hpp"
#include "mshare/io/kv_document.hpp"
#include "mshare/parameters.hpp"

namespace mshare::io {

inline constexpr std::uint64_t kSchemaVersion = 1;

namespace detail {

inline std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

/// Splits "name(a, b)" into name and trimmed arguments.
inline std::pair<std::string, std::vector<std::string>> split_call(const std::string& text, std::size_t line) {
  const auto open = text.find('(');
  if (open == std::string::npos) return {trim(text), {}};
  if (text.back() != ')') throw ParseError(line, "malformed call '" + text + "'");
  std::vector<std::string> args;
  std::string inner = text.substr(open + 1, text.size() - open - 2);
  std::stringstream ss(inner);
  std::string piece;
  while (std::getline(ss, piece, ',')) args.push_back(trim(piece));
  return {trim(text.substr(0, open)), args};
}

inline double to_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(line, "malformed number '" + s + "'");
  return v;
}

inline bool valid_id(const std::string& id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

/// Reads base / atoms / weights (with an optional ".id" suffix) from a table.
inline std::optional<BaseMeasure> read_base(const Table& t, const std::string& suffix) {
  const Entry* base = t.find("base" + suffix);
  if (!base) {
    if (t.find("atoms" + suffix) || t.find("weights" + suffix)) {
      const Entry* e = t.find("atoms" + suffix) ? t.find("atoms" + suffix) : t.find("weights" + suffix);
      throw ParseError(e->line, "atoms/weights given without base = \"discrete\"");
    }
    return std::nullopt;
  }
  const auto [name, args] = split_call(base->value.as_string(), base->line);
  BaseMeasure out;
  if (name == "beta") {
    if (args.size() != 2) throw ParseError(base->line, "beta base needs two parameters, e.g. \"beta(1,1)\"");
    out = BetaBase{to_double(args[0], base->line), to_double(args[1], base->line)};
  } else if (name == "discrete") {
    const Entry* atoms = t.find("atoms" + suffix);
    const Entry* weights = t.find("weights" + suffix);
    if (!atoms || !weights) throw ParseError(base->line, "discrete base needs atoms and weights");
    out = DiscreteBase{atoms->value.as_doubles(), weights->value.as_doubles()};
  } else {
    throw ParseError(base->line, "unknown base measure '" + name + "'");
  }
  try {
    validate(out);
  } catch (const ValidationError& e) {
    throw ParseError(base->line, e.what());
  }
  return out;
}

inline std::optional<RemovalPolicy> read_removal(const Table& t) {
  const Entry* e = t.find("removal");
  if (!e) {
    if (const Entry* stray = t.find("antitrust_threshold")) throw ParseError(stray->line, "antitrust_threshold needs removal = \"antitrust\"");
    return std::nullopt;
  }
  RemovalPolicy p;
  try {
    p.kind = removal_kind_from_string(e->value.as_string());
    if (p.kind == RemovalPolicy::Kind::antitrust) {
      const Entry* c = t.find("antitrust_threshold");
      if (!c) throw ParseError(e->line, "antitrust removal needs antitrust_threshold");
      p.threshold = c->value.as_double();
      if (const Entry* inner = t.find("antitrust_inner")) p.inner = removal_kind_from_string(inner->value.as_string());
    }
    p.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& ex) {
    throw ParseError(e->line, ex.what());
  }
  return p;
}

inline std::optional<SelectionSpec> read_selection(const Table& t) {
  const Entry* e = t.find("selection");
  if (!e) {
    if (const Entry* stray = t.find("sigma")) throw ParseError(stray->line, "sigma needs selection = \"sigma\"");
    return std::nullopt;
  }
  const std::string& name = e->value.as_string();
  if (name == "unit") return UnitSelection{};
  if (name == "identity") return IdentitySelection{};
  if (name == "inverse_cluster") return InverseClusterSelection{};
  if (name == "sigma") {
    const Entry* s = t.find("sigma");
    if (!s) throw ParseError(e->line, "selection = \"sigma\" needs sigma = [c0, c1, ...]");
    return SigmaSelection{s->value.as_doubles()};
  }
  throw ParseError(e->line, "unknown selection '" + name + "'");
}

inline InitSpec read_init(const Table& t, std::size_t line) {
  const Entry* e = t.find("init");
  if (!e) throw ParseError(line, "market needs an init entry");
  const auto [name, args] = split_call(e->value.as_string(), e->line);
  if (name == "competitive") {
    if (args.size() != 1) throw ParseError(e->line, "competitive(K) takes one argument");
    const double k = to_double(args[0], e->line);
    if (!(k >= 1.0) || k != static_cast<double>(static_cast<std::size_t>(k))) {
      throw ParseError(e->line, "competitive(K) needs a positive integer K");
    }
    return InitSpec::competitive(static_cast<std::size_t>(k));
  }
  if (name == "monopoly") {
    if (args.size() != 1) throw ParseError(e->line, "monopoly(label) takes one argument");
    const double label = to_double(args[0], e->line);
    if (!(label >= 0.0 && label <= 1.0)) throw ParseError(e->line, "monopoly label must lie in [0, 1]");
    return InitSpec::monopoly(label);
  }
  if (name == "custom") {
    const Entry* u = t.find("units");
    if (!u) throw ParseError(e->line, "custom init needs units = [...]");
    return InitSpec::custom(u->value.as_doubles());
  }
  throw ParseError(e->line, "unknown init '" + name + "'");
}

inline void reject_unknown(const Table& t, const std::set<std::string>& allowed,
                           const std::set<std::string>& dotted_prefixes = {}) {
  for (const auto& e : t.entries) {
    if (allowed.count(e.key)) continue;
    const auto dot = e.key.find('.');
    if (dot != std::string::npos && dotted_prefixes.count(e.key.substr(0, dot))) continue;
    throw ParseError(e.line, "unknown key '" + e.key + "'" + (t.name.empty() ? "" : " in [[" + t.name + "]]"));
  }
}

}  // namespace detail

/// Parses a scenario document into a validated engine configuration.
inline EngineConfig parse_scenario(std::string_view text) {
  using detail::reject_unknown;
  const Document doc = parse_document(text);
  const Table& root = doc.root;
  reject_unknown(root, {"schema_version", "name", "n", "iterations", "seed", "bins", "mode", "lambda", "retention",
                        "retention_points", "removal", "antitrust_threshold", "antitrust_inner", "selection", "sigma",
                        "market_weights", "migration", "theta", "pi", "base", "atoms", "weights"});

  auto require = [&](const char* key) -> const Entry& {
    const Entry* e = root.find(key);
    if (!e) throw ParseError(1, std::string("missing required key '") + key + "'");
    return *e;
  };

  const Entry& version = require("schema_version");
  if (version.value.as_u64() != kSchemaVersion) {
    throw ParseError(version.line, "unsupported schema_version " + version.value.text);
  }

  EngineConfig cfg;
  if (const Entry* e = root.find("name")) cfg.name = e->value.as_string();
  cfg.n = static_cast<std::size_t>(require("n").value.as_u64());
  cfg.iterations = require("iterations").value.as_u64();
  if (const Entry* e = root.find("seed")) cfg.seed = e->value.as_u64();
  if (const Entry* e = root.find("bins")) cfg.bins = static_cast<std::size_t>(e->value.as_u64());
  if (const Entry* e = root.find("mode")) {
    const auto& m = e->value.as_string();
    if (m == "discrete") cfg.mode = TimeMode::discrete;
    else if (m == "continuous") cfg.mode = TimeMode::continuous;
    else throw ParseError(e->line, "mode must be \"discrete\" or \"continuous\"");
  }
  if (const Entry* e = root.find("retention")) cfg.retention.count = static_cast<std::size_t>(e->value.as_u64());
  if (const Entry* e = root.find("retention_points")) cfg.retention.points = e->value.as_u64s();

  const double default_theta = root.find("theta") ? root.find("theta")->value.as_double() : 1.0;
  const double default_pi = root.find("pi") ? root.find("pi")->value.as_double() : 1.0;
  const BaseMeasure default_base = detail::read_base(root, "").value_or(BetaBase{1.0, 1.0});

  std::vector<const Table*> market_tables, schedule_tables;
  for (const auto& s : doc.sections) {
    if (s.name == "market") market_tables.push_back(&s);
    else if (s.name == "schedule") schedule_tables.push_back(&s);
    else throw ParseError(s.line, "unknown section [[" + s.name + "]]");
  }
  if (market_tables.empty()) throw ParseError(1, "at least one [[market]] section is required");

  const std::size_t r_count = market_tables.size();
  ParameterSet& p = cfg.params;
  for (const Table* t : market_tables) {
    reject_unknown(*t, {"id", "theta", "pi", "base", "atoms", "weights", "init", "units"});
    const Entry* id = t->find("id");
    if (!id) throw ParseError(t->line, "market needs an id");
    if (!detail::valid_id(id->value.as_string())) {
      throw ParseError(id->line, "market id must use letters, digits, '_' or '-'");
    }
    for (const auto& m : cfg.markets) {
      if (m.id == id->value.as_string()) throw ParseError(id->line, "duplicate market id '" + m.id + "'");
    }
    cfg.markets.push_back({id->value.as_string(), detail::read_init(*t, t->line)});
    p.theta.push_back(t->find("theta") ? t->find("theta")->value.as_double() : default_theta);
    p.pi.push_back(t->find("pi") ? t->find("pi")->value.as_double() : default_pi);
    p.base.push_back(detail::read_base(*t, "").value_or(default_base));
  }
  auto market_index = [&](const std::string& id, std::size_t line) {
    for (std::size_t r = 0; r < cfg.markets.size(); ++r) {
      if (cfg.markets[r].id == id) return r;
    }
    throw ParseError(line, "unknown market '" + id + "'");
  };

  p.migration = MigrationKernel::uniform(r_count);
  p.market_weights.assign(r_count, 1.0 / static_cast<double>(r_count));
  if (const Entry* e = root.find("migration")) p.migration.entries = e->value.as_matrix();
  if (const Entry* e = root.find("market_weights")) p.market_weights = e->value.as_doubles();
  if (auto removal = detail::read_removal(root)) p.removal = *removal;
  if (auto sel = detail::read_selection(root)) p.selection = *sel;
  if (const Entry* e = root.find("lambda")) p.lambda = e->value.as_double();

  try {
    p.migration.validate(r_count);
  } catch (const ValidationError& ex) {
    throw ParseError(root.find("migration") ? root.find("migration")->line : 1, ex.what());
  }
  try {
    p.validate();
  } catch (const ValidationError& ex) {
    const Entry* w = root.find("market_weights");
    throw ParseError(w ? w->line : market_tables.front()->line, ex.what());
  }

  for (const Table* t : schedule_tables) {
    std::set<std::string> allowed = {"at", "market", "theta", "pi", "base", "atoms", "weights", "migration",
                                      "market_weights", "removal", "antitrust_threshold", "antitrust_inner",
                                      "selection", "sigma", "lambda"};
    reject_unknown(*t, allowed, {"theta", "pi", "base", "atoms", "weights"});
    const Entry* at = t->find("at");
    if (!at) throw ParseError(t->line, "schedule entry needs 'at'");
    ScheduledPatch sp;
    sp.trigger = at->value.as_u64();
    if (sp.trigger < 1 || sp.trigger > cfg.iterations) {
      throw ParseError(at->line, "schedule trigger " + std::to_string(sp.trigger) + " outside [1, " +
                                     std::to_string(cfg.iterations) + "]");
    }
    if (!cfg.schedule.entries.empty() && sp.trigger <= cfg.schedule.entries.back().trigger) {
      throw ParseError(at->line, "schedule triggers must be strictly increasing");
    }
    std::vector<std::size_t> targets;
    if (const Entry* m = t->find("market")) {
      targets.push_back(market_index(m->value.as_string(), m->line));
    } else {
      for (std::size_t r = 0; r < r_count; ++r) targets.push_back(r);
    }
    ParameterPatch& patch = sp.patch;
    if (const Entry* e = t->find("theta")) for (std::size_t r : targets) patch.theta[r] = e->value.as_double();
    if (const Entry* e = t->find("pi")) for (std::size_t r : targets) patch.pi[r] = e->value.as_double();
    if (auto b = detail::read_base(*t, "")) for (std::size_t r : targets) patch.base[r] = *b;
    for (const auto& e : t->entries) {
      const auto dot = e.key.find('.');
      if (dot == std::string::npos) continue;
      const std::string head = e.key.substr(0, dot);
      const std::string id = e.key.substr(dot + 1);
      const std::size_t r = market_index(id, e.line);
      if (head == "theta") patch.theta[r] = e.value.as_double();
      else if (head == "pi") patch.pi[r] = e.value.as_double();
      else if (head == "base") patch.base[r] = *detail::read_base(*t, "." + id);
    }
    if (const Entry* e = t->find("migration")) patch.migration = MigrationKernel{e->value.as_matrix()};
    if (const Entry* e = t->find("market_weights")) patch.market_weights = e->value.as_doubles();
    patch.removal = detail::read_removal(*t);
    patch.selection = detail::read_selection(*t);
    if (const Entry* e = t->find("lambda")) patch.lambda = e->value.as_double();
    cfg.schedule.entries.push_back(std::move(sp));
  }

  try {
    cfg.validate();
    // A schedule is only valid if every intermediate parameter set is.
    ParameterSet probe = cfg.params;
    for (std::size_t k = 0; k < cfg.schedule.entries.size(); ++k) {
      try {
        probe = apply_patch(probe, cfg.schedule.entries[k].patch);
      } catch (const ValidationError& ex) {
        throw ParseError(schedule_tables[k]->line, ex.what());
      }
    }
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& ex) {
    const Entry* iters = root.find("iterations");
    throw ParseError(iters ? iters->line : 1, ex.what());
  }
  return cfg;
}

namespace detail {

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

inline std::string array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + format_number(v[k]);
  return out + "]";
}

inline void write_base(std::ostream& os, const BaseMeasure& b, const std::string& suffix) {
  if (const auto* beta = std::get_if<BetaBase>(&b)) {
    os << "base" << suffix << " = \"beta(" << format_number(beta->a) << "," << format_number(beta->b) << ")\"\n";
  } else {
    const auto& d = std::get<DiscreteBase>(b);
    os << "base" << suffix << " = \"discrete\"\n";
    os << "atoms" << suffix << " = " << array(d.atoms) << "\n";
    os << "weights" << suffix << " = " << array(d.weights) << "\n";
  }
}

inline void write_removal(std::ostream& os, const RemovalPolicy& p) {
  os << "removal = " << quote(to_string(p.kind)) << "\n";
  if (p.kind == RemovalPolicy::Kind::antitrust) {
    os << "antitrust_threshold = " << format_number(p.threshold) << "\n";
    os << "antitrust_inner = " << quote(to_string(p.inner)) << "\n";
  }
}

inline void write_selection(std::ostream& os, const SelectionSpec& s) {
  std::visit(
      [&](const auto& sel) {
        using S = std::decay_t<decltype(sel)>;
        if constexpr (std::is_same_v<S, UnitSelection>) {
          os << "selection = \"unit\"\n";
        } else if constexpr (std::is_same_v<S, IdentitySelection>) {
          os << "selection = \"identity\"\n";
        } else if constexpr (std::is_same_v<S, InverseClusterSelection>) {
          os << "selection = \"inverse_cluster\"\n";
        } else if constexpr (std::is_same_v<S, SigmaSelection>) {
          os << "selection = \"sigma\"\nsigma = " << array(sel.coefficients) << "\n";
        } else {
          throw ValidationError("custom selection functions cannot be written to a scenario file");
        }
      },
      s);
}

inline void write_matrix(std::ostream& os, const char* key, const std::vector<std::vector<double>>& m) {
  os << key << " = [";
  for (std::size_t r = 0; r < m.size(); ++r) os << (r ? ", " : "") << array(m[r]);
  os << "]\n";
}

}  // namespace detail

/// Writes a configuration in the scenario format; parse_scenario reads it back
/// to an equal configuration.
inline std::string serialize_scenario(const EngineConfig& cfg) {
  using namespace detail;
  std::ostringstream os;
  const ParameterSet& p = cfg.params;
  os << "schema_version = " << kSchemaVersion << "\n";
  os << "name = " << quote(cfg.name) << "\n";
  os << "n = " << cfg.n << "\n";
  os << "iterations = " << cfg.iterations << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "bins = " << cfg.bins << "\n";
  os << "mode = " << quote(cfg.mode == TimeMode::continuous ? "continuous" : "discrete") << "\n";
  if (p.lambda != 0.0) os << "lambda = " << format_number(p.lambda) << "\n";
  if (cfg.retention.points.empty()) {
    os << "retention = " << cfg.retention.count << "\n";
  } else {
    os << "retention = " << cfg.retention.count << "\nretention_points = [";
    for (std::size_t k = 0; k < cfg.retention.points.size(); ++k) os << (k ? ", " : "") << cfg.retention.points[k];
    os << "]\n";
  }
  write_removal(os, p.removal);
  write_selection(os, p.selection);
  os << "market_weights = " << array(p.market_weights) << "\n";
  if (!p.migration.entries.empty()) write_matrix(os, "migration", p.migration.entries);

  for (std::size_t r = 0; r < cfg.markets.size(); ++r) {
    const MarketSpec& m = cfg.markets[r];
    os << "\n[[market]]\nid = " << quote(m.id) << "\n";
    os << "theta = " << format_number(p.theta[r]) << "\n";
    os << "pi = " << format_number(p.pi[r]) << "\n";
    write_base(os, p.base[r], "");
    switch (m.init.kind) {
      case InitSpec::Kind::competitive: os << "init = \"competitive(" << m.init.firms << ")\"\n"; break;
      case InitSpec::Kind::monopoly: os << "init = \"monopoly(" << format_number(m.init.label) << ")\"\n"; break;
      case InitSpec::Kind::custom: os << "init = \"custom\"\nunits = " << array(m.init.units) << "\n"; break;
    }
  }

  for (const auto& sp : cfg.schedule.entries) {
    const ParameterPatch& patch = sp.patch;
    os << "\n[[schedule]]\nat = " << sp.trigger << "\n";
    for (const auto& [r, v] : patch.theta) os << "theta." << cfg.markets[r].id << " = " << format_number(v) << "\n";
    for (const auto& [r, v] : patch.pi) os << "pi." << cfg.markets[r].id << " = " << format_number(v) << "\n";
    for (const auto& [r, b] : patch.base) write_base(os, b, "." + cfg.markets[r].id);
    if (patch.migration) write_matrix(os, "migration", patch.migration->entries);
    if (patch.market_weights) os << "market_weights = " << array(*patch.market_weights) << "\n";
    if (patch.removal) write_removal(os, *patch.removal);
    if (patch.selection) write_selection(os, *patch.selection);
    if (patch.lambda) os << "lambda = " << format_number(*patch.lambda) << "\n";
  }
  return os.str();
}

}  // namespace mshare::io
