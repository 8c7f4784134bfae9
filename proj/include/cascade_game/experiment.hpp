#pragma once

// Experiment driver: configuration, flat result records, CSV / JSON-lines
// encoding and the command implementations behind the CLI.

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cascade_game/game.hpp"

namespace cascade_game {

enum class OutputFormat { Csv, Json };

struct SyntheticSpec {
  int nodes = 0;
  int edges = 0;
  double source_fraction = 0.0;
  double load_fraction = 0.0;
};

struct ExperimentConfig {
  std::string command;
  std::optional<std::string> grid_path;
  std::optional<SyntheticSpec> synthetic;
  std::uint64_t seed = 0;
  double alpha = 0.5;
  int ka = 1;
  int kd = 1;
  OracleKind oracle = OracleKind::Exact;
  int max_iters = 200;
  std::vector<double> alphas;
  std::vector<std::pair<int, int>> budgets;
  std::optional<NodeSet> attack;
  std::optional<NodeSet> defend;
  OutputFormat format = OutputFormat::Csv;
  std::string out;
  bool timing = false;
  std::uint64_t enumeration_limit = kDefaultEnumerationLimit;
  std::size_t sample_size = 1000;

  void validate() const {
    static const std::vector<std::string> known{"simulate", "loads", "respond", "solve", "sweep", "gen"};
    if (std::find(known.begin(), known.end(), command) == known.end()) {
      throw DomainError("unknown command '" + command + "'");
    }
    if (grid_path.has_value() == synthetic.has_value()) {
      throw DomainError("give exactly one of --grid or --synthetic");
    }
    if (!(alpha >= 0)) throw DomainError("alpha must be >= 0");
    for (double a : alphas) {
      if (!(a >= 0)) throw DomainError("alpha values must be >= 0");
    }
    if (ka < 0 || kd < 0) throw DomainError("budgets must be >= 0");
    for (auto [a, d] : budgets) {
      if (a < 0 || d < 0) throw DomainError("budgets must be >= 0");
    }
    if (max_iters < 1) throw DomainError("--max-iters must be >= 1");
    if (command == "simulate" && !attack) throw DomainError("simulate needs --attack");
  }

  std::vector<double> sweep_alphas() const { return alphas.empty() ? std::vector<double>{alpha} : alphas; }
  std::vector<std::pair<int, int>> sweep_budgets() const {
    return budgets.empty() ? std::vector<std::pair<int, int>>{{ka, kd}} : budgets;
  }
};

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string grid_label(const ExperimentConfig& c) {
  if (c.grid_path) return *c.grid_path;
  const auto& s = *c.synthetic;
  return "synthetic:" + std::to_string(s.nodes) + "," + std::to_string(s.edges) + "," +
         format_double(s.source_fraction) + "," + format_double(s.load_fraction) + ":" + std::to_string(c.seed);
}

inline GridNetwork load_grid(const ExperimentConfig& c) {
  if (c.synthetic) {
    const auto& s = *c.synthetic;
    return generate_synthetic(s.nodes, s.edges, s.source_fraction, s.load_fraction, c.seed);
  }
  std::ifstream in(*c.grid_path, std::ios::binary);
  if (!in) throw Error("cannot read grid file '" + *c.grid_path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return load_network(text.str());
}

struct ResultRecord {
  std::string command;
  std::string grid;
  double alpha = 0.0;
  int ka = 0;
  int kd = 0;
  std::string oracle;
  std::string metric;
  std::string subject;
  double value = 0.0;
  std::string extra;
  int iterations = 0;
  std::optional<bool> converged;
  double seconds = 0.0;

  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

inline const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> h{"command", "grid",  "alpha", "ka",         "kd",        "oracle", "metric",
                                          "subject", "value", "extra", "iterations", "converged", "seconds"};
  return h;
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::vector<std::string> record_fields(const ResultRecord& r) {
  return {r.command,
          r.grid,
          format_double(r.alpha),
          std::to_string(r.ka),
          std::to_string(r.kd),
          r.oracle,
          r.metric,
          r.subject,
          format_double(r.value),
          r.extra,
          std::to_string(r.iterations),
          r.converged ? (*r.converged ? "true" : "false") : "",
          format_double(r.seconds)};
}

// RFC 4180 record splitter; returns rows of fields.
inline std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, in_row = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty()) throw ParseError(line, "stray quote inside field");
      quoted = true;
      in_row = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      in_row = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      in_row = false;
      ++line;
    } else {
      field += c;
      in_row = true;
    }
  }
  if (quoted) throw ParseError(line, "unterminated quoted field");
  if (in_row) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
T parse_number(const std::string& s, std::size_t line, const char* what) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw ParseError(line, std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

}  // namespace detail

inline std::string to_csv_row(const ResultRecord& r) {
  std::string out;
  const auto fields = detail::record_fields(r);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += detail::csv_field(fields[i]);
  }
  return out;
}

inline std::string to_csv(const std::vector<ResultRecord>& rows) {
  std::string out;
  for (std::size_t i = 0; i < csv_header().size(); ++i) {
    if (i) out += ',';
    out += csv_header()[i];
  }
  out += '\n';
  for (const auto& r : rows) out += to_csv_row(r) + '\n';
  return out;
}

inline std::vector<ResultRecord> parse_csv(std::string_view text) {
  const auto rows = detail::split_csv(text);
  if (rows.empty() || rows.front() != csv_header()) throw ParseError(1, "missing or unexpected CSV header");
  std::vector<ResultRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    const std::size_t line = i + 1;
    if (f.size() != csv_header().size()) throw ParseError(line, "expected 13 fields");
    ResultRecord r;
    r.command = f[0];
    r.grid = f[1];
    r.alpha = detail::parse_number<double>(f[2], line, "alpha");
    r.ka = detail::parse_number<int>(f[3], line, "ka");
    r.kd = detail::parse_number<int>(f[4], line, "kd");
    r.oracle = f[5];
    r.metric = f[6];
    r.subject = f[7];
    r.value = detail::parse_number<double>(f[8], line, "value");
    r.extra = f[9];
    r.iterations = detail::parse_number<int>(f[10], line, "iterations");
    if (f[11] == "true") {
      r.converged = true;
    } else if (f[11] == "false") {
      r.converged = false;
    } else if (!f[11].empty()) {
      throw ParseError(line, "bad converged '" + f[11] + "'");
    }
    r.seconds = detail::parse_number<double>(f[12], line, "seconds");
    out.push_back(std::move(r));
  }
  return out;
}

inline nlohmann::ordered_json to_json(const ResultRecord& r) {
  nlohmann::ordered_json j;
  j["command"] = r.command;
  j["grid"] = r.grid;
  j["alpha"] = r.alpha;
  j["ka"] = r.ka;
  j["kd"] = r.kd;
  j["oracle"] = r.oracle;
  j["metric"] = r.metric;
  j["subject"] = r.subject;
  j["value"] = r.value;
  j["extra"] = r.extra;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged ? nlohmann::ordered_json(*r.converged) : nlohmann::ordered_json(nullptr);
  j["seconds"] = r.seconds;
  return j;
}

inline ResultRecord record_from_json(const nlohmann::ordered_json& j) {
  ResultRecord r;
  r.command = j.at("command").get<std::string>();
  r.grid = j.at("grid").get<std::string>();
  r.alpha = j.at("alpha").get<double>();
  r.ka = j.at("ka").get<int>();
  r.kd = j.at("kd").get<int>();
  r.oracle = j.at("oracle").get<std::string>();
  r.metric = j.at("metric").get<std::string>();
  r.subject = j.at("subject").get<std::string>();
  r.value = j.at("value").get<double>();
  r.extra = j.at("extra").get<std::string>();
  r.iterations = j.at("iterations").get<int>();
  if (!j.at("converged").is_null()) r.converged = j.at("converged").get<bool>();
  r.seconds = j.at("seconds").get<double>();
  return r;
}

inline std::string to_json_lines(const std::vector<ResultRecord>& rows) {
  std::string out;
  for (const auto& r : rows) out += to_json(r).dump() + '\n';
  return out;
}

inline std::vector<ResultRecord> parse_json_lines(std::string_view text) {
  std::vector<ResultRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(n, e.what());
    }
  }
  return out;
}

inline std::string format_records(const std::vector<ResultRecord>& rows, OutputFormat f) {
  return f == OutputFormat::Csv ? to_csv(rows) : to_json_lines(rows);
}

namespace detail {

class Recorder {
 public:
  Recorder(const ExperimentConfig& c, std::vector<ResultRecord>& rows) : c_(c), rows_(rows), grid_(grid_label(c)) {}

  ResultRecord& add(double alpha, int ka, int kd, std::string metric, std::string subject, double value,
                    std::string extra = {}) {
    ResultRecord r;
    r.command = c_.command;
    r.grid = grid_;
    r.alpha = alpha;
    r.ka = ka;
    r.kd = kd;
    r.oracle = to_string(c_.oracle);
    r.metric = std::move(metric);
    r.subject = std::move(subject);
    r.value = value;
    r.extra = std::move(extra);
    rows_.push_back(std::move(r));
    return rows_.back();
  }

  double seconds(std::chrono::steady_clock::time_point since) const {
    if (!c_.timing) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
  }
  double seconds(double measured) const { return c_.timing ? measured : 0.0; }

 private:
  const ExperimentConfig& c_;
  std::vector<ResultRecord>& rows_;
  std::string grid_;
};

inline std::string edge_label(const Edge& e) { return std::to_string(e.u) + "-" + std::to_string(e.v); }

// Count of single-node changes to `attack` that lower the expected payoff:
// dropping a member or adding a non-member.
inline std::size_t monotonicity_violations(const PayoffOracle& oracle, const NodeSet& attack,
                                           const MixedStrategy& defenses) {
  const double base = pure_vs_mix(oracle, attack, defenses, Side::Attacker);
  std::size_t bad = 0;
  for (NodeId v : oracle.network().nodes()) {
    const bool member = attack.contains(v);
    const NodeSet smaller = member ? attack.minus(NodeSet{v}) : attack;
    const NodeSet larger = member ? attack : attack.with(v);
    const double lo = member ? pure_vs_mix(oracle, smaller, defenses, Side::Attacker) : base;
    const double hi = member ? base : pure_vs_mix(oracle, larger, defenses, Side::Attacker);
    if (hi < lo - kTieTolerance) ++bad;
  }
  return bad;
}

}  // namespace detail

inline std::vector<ResultRecord> run_simulate(const ExperimentConfig& c, const GridNetwork& g) {
  std::vector<ResultRecord> rows;
  detail::Recorder rec(c, rows);
  const NodeSet attack = c.attack.value_or(NodeSet{});
  const NodeSet defend = c.defend.value_or(NodeSet{});
  check_strategy_nodes(g, attack, "attack");
  check_strategy_nodes(g, defend, "defense");
  const auto start = std::chrono::steady_clock::now();
  const auto caps = capacities(g, c.alpha);
  const auto trace = cascade_fixpoint(remove_nodes(g, attack.minus(defend)), caps);
  const auto value = disc(trace.final_network, g.loads());
  const double secs = rec.seconds(start);
  auto& head = rec.add(c.alpha, static_cast<int>(attack.size()), static_cast<int>(defend.size()), "payoff",
                       to_string(attack), static_cast<double>(value), "defend=" + to_string(defend));
  head.iterations = static_cast<int>(trace.rounds.size());
  head.seconds = secs;
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    std::string edges;
    for (const Edge& e : trace.rounds[i]) edges += (edges.empty() ? "" : " ") + detail::edge_label(e);
    rec.add(c.alpha, static_cast<int>(attack.size()), static_cast<int>(defend.size()), "cascade_round",
            std::to_string(i + 1), static_cast<double>(trace.rounds[i].size()), edges);
  }
  return rows;
}

inline std::vector<ResultRecord> run_loads(const ExperimentConfig& c, const GridNetwork& g) {
  std::vector<ResultRecord> rows;
  detail::Recorder rec(c, rows);
  const PayoffOracle oracle(g, c.alpha);
  for (const auto& [v, load] : nodal_loads(g)) {
    rec.add(c.alpha, 1, 0, "nodal_load", std::to_string(v), load);
    rec.add(c.alpha, 1, 0, "attack_payoff", std::to_string(v), static_cast<double>(oracle.removal_payoff(NodeSet{v})));
  }
  for (const auto& [e, load] : edge_loads(g)) {
    rec.add(c.alpha, 1, 0, "edge_load", detail::edge_label(e), load,
            "capacity=" + format_double(oracle.capacities().at(e)));
  }
  return rows;
}

inline std::vector<ResultRecord> run_respond(const ExperimentConfig& c, const GridNetwork& g) {
  std::vector<ResultRecord> rows;
  detail::Recorder rec(c, rows);
  const PayoffOracle oracle(g, c.alpha);

  const auto start = std::chrono::steady_clock::now();
  const NodeSet defense = c.defend ? *c.defend : dlb_defense(g, c.kd).nodes;
  check_strategy_nodes(g, defense, "defense");
  const auto defenses = MixedStrategy::pure(defense);
  const auto attack = best_response(oracle, defenses, c.ka, Side::Attacker, c.oracle, c.enumeration_limit);
  auto& a = rec.add(c.alpha, c.ka, c.kd, "attacker_response", to_string(attack.strategy.nodes), attack.value,
                    (c.defend ? "vs defend=" : "vs dlb=") + to_string(defense));
  a.seconds = rec.seconds(start);

  const auto violations = detail::monotonicity_violations(oracle, attack.strategy.nodes, defenses);
  rec.add(c.alpha, c.ka, c.kd, "monotonicity_violations", to_string(attack.strategy.nodes),
          static_cast<double>(violations), "checked=" + std::to_string(g.node_count()));

  MixedStrategy attacks;
  std::string against;
  if (c.attack) {
    check_strategy_nodes(g, *c.attack, "attack");
    attacks = MixedStrategy::pure(*c.attack);
    against = "vs attack=" + to_string(*c.attack);
  } else if (static_cast<std::size_t>(c.ka) <= g.loads().size()) {
    const UniformAttackOptions uo{c.enumeration_limit, c.sample_size, c.seed};
    attacks = uniform_load_attack(g, c.ka, uo);
    against = uniform_attack_is_exact(g, c.ka, uo) ? "vs uniform exact" : "vs uniform sampled";
  } else {
    return rows;
  }
  const auto t2 = std::chrono::steady_clock::now();
  const auto d = best_response(oracle, attacks, c.kd, Side::Defender, c.oracle, c.enumeration_limit);
  auto& r = rec.add(c.alpha, c.ka, c.kd, "defender_response", to_string(d.strategy.nodes), d.value, against);
  r.seconds = rec.seconds(t2);
  return rows;
}

inline void emit_solution(detail::Recorder& rec, double alpha, int ka, int kd, const GameSolution& s) {
  double total = 0.0;
  for (const auto& d : s.diagnostics) total += d.seconds;
  auto& head = rec.add(alpha, ka, kd, "game_value", "", s.value, s.stalled ? "stalled" : "");
  head.iterations = s.iterations;
  head.converged = s.converged;
  head.seconds = rec.seconds(total);
  for (const auto& w : s.attacker_mix.support) rec.add(alpha, ka, kd, "attacker_mix", to_string(w.nodes), w.probability);
  for (const auto& w : s.defender_mix.support) rec.add(alpha, ka, kd, "defender_mix", to_string(w.nodes), w.probability);
  for (const auto& d : s.diagnostics) {
    auto& r = rec.add(alpha, ka, kd, "iteration", std::to_string(d.iteration), d.restricted_value,
                      "attacker_br=" + format_double(d.attacker_response_value) +
                          ";defender_br=" + format_double(d.defender_response_value) +
                          ";options=" + std::to_string(d.attack_options) + "x" + std::to_string(d.defense_options));
    r.iterations = d.iteration;
    r.seconds = rec.seconds(d.seconds);
  }
}

inline DoubleOracleOptions oracle_options(const ExperimentConfig& c) {
  DoubleOracleOptions o;
  o.max_iters = c.max_iters;
  o.oracle = c.oracle;
  o.enumeration_limit = c.enumeration_limit;
  return o;
}

inline std::vector<ResultRecord> run_solve(const ExperimentConfig& c, const GridNetwork& g) {
  std::vector<ResultRecord> rows;
  detail::Recorder rec(c, rows);
  const PayoffOracle oracle(g, c.alpha);
  emit_solution(rec, c.alpha, c.ka, c.kd, double_oracle(oracle, c.ka, c.kd, oracle_options(c)));
  return rows;
}

// Per (alpha, ka, kd) point: the game value, DLB against the minimax attack,
// DLB against the attacker's best response to it, and the uniform load
// attack against the defender's best response (plus its lower bound).
inline std::vector<ResultRecord> run_sweep(const ExperimentConfig& c, const GridNetwork& g) {
  std::vector<ResultRecord> rows;
  detail::Recorder rec(c, rows);
  const auto loads = g.loads().size();
  for (double alpha : c.sweep_alphas()) {
    const PayoffOracle oracle(g, alpha);
    for (auto [ka, kd] : c.sweep_budgets()) {
      const auto start = std::chrono::steady_clock::now();
      const auto s = double_oracle(oracle, ka, kd, oracle_options(c));
      auto& head = rec.add(alpha, ka, kd, "game_value", "", s.value, s.stalled ? "stalled" : "");
      head.iterations = s.iterations;
      head.converged = s.converged;
      head.seconds = rec.seconds(start);

      const auto dlb = MixedStrategy::pure(dlb_defense(g, kd).nodes);
      const auto& dlb_nodes = dlb.support.front().nodes;
      rec.add(alpha, ka, kd, "dlb_vs_minimax_attack", to_string(dlb_nodes), expected_payoff(oracle, s.attacker_mix, dlb));
      const auto br = best_response(oracle, dlb, ka, Side::Attacker, c.oracle, c.enumeration_limit);
      rec.add(alpha, ka, kd, "dlb_vs_best_response", to_string(br.strategy.nodes), br.value,
              "dlb=" + to_string(dlb_nodes));

      if (static_cast<std::size_t>(ka) <= loads && loads > 0) {
        const UniformAttackOptions uo{c.enumeration_limit, c.sample_size, c.seed};
        const bool exact = uniform_attack_is_exact(g, ka, uo);
        const auto uniform = uniform_load_attack(g, ka, uo);
        const auto d = best_response(oracle, uniform, kd, Side::Defender, c.oracle, c.enumeration_limit);
        const char* kind = exact ? "exact" : "sampled";
        rec.add(alpha, ka, kd, "uniform_attack", to_string(d.strategy.nodes), d.value, kind);
        const double bound = ka * (1.0 - static_cast<double>(kd) / static_cast<double>(loads));
        rec.add(alpha, ka, kd, "uniform_bound", "", bound, kind);
      }
    }
  }
  return rows;
}

inline std::vector<ResultRecord> run_experiment(const ExperimentConfig& c) {
  c.validate();
  const auto g = load_grid(c);
  if (c.command == "simulate") return run_simulate(c, g);
  if (c.command == "loads") return run_loads(c, g);
  if (c.command == "respond") return run_respond(c, g);
  if (c.command == "solve") return run_solve(c, g);
  if (c.command == "sweep") return run_sweep(c, g);
  throw DomainError("command '" + c.command + "' does not produce records");
}

// Full text output of a command: records in the chosen format, or grid text
// for gen.
inline std::string run_command(const ExperimentConfig& c) {
  if (c.command == "gen") {
    c.validate();
    return to_grid_text(load_grid(c));
  }
  return format_records(run_experiment(c), c.format);
}

}  // namespace cascade_game
