// cascade-game: command-line driver for the cascading-failure grid game.
//
//   cascade-game simulate --grid v2.txt --alpha 0.5 --attack 0
//   cascade-game solve --synthetic 10,14,0.3,0.3 --seed 5 --oracle greedy --ka 2 --kd 2
//   cascade-game sweep --synthetic 30,40,0.3,0.3 --seed 1 --alphas 0,0.5,1 --budget-pairs 3:0
//
// Exit codes: 0 success, 2 usage or input error, 3 enumeration capacity exceeded.

#include <charconv>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cascade_game/experiment.hpp"

namespace cg = cascade_game;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T number(const std::string& tok, const std::string& flag) {
  T v{};
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || r.ec != std::errc{} || r.ptr != tok.data() + tok.size()) {
    throw cg::DomainError(flag + ": bad number '" + tok + "'");
  }
  return v;
}

cg::NodeSet node_list(const std::string& s, const std::string& flag) {
  std::vector<cg::NodeId> ids;
  for (const auto& tok : split(s, ',')) ids.push_back(number<cg::NodeId>(tok, flag));
  return cg::NodeSet(std::move(ids));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascading-failure power-grid attacker/defender game"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option defaults (command-line flags win)");

  std::string grid, synthetic, oracle = "exact", format = "csv", attack, defend, alphas, budget_pairs;
  cg::ExperimentConfig c;
  bool have_attack = false, have_defend = false;

  app.add_option("--grid", grid, "Grid file");
  app.add_option("--synthetic", synthetic, "Synthetic grid N,M,SRC,LD (nodes, edges, source and load fractions)");
  app.add_option("--seed", c.seed, "RNG seed for synthetic grids and sampling")->capture_default_str();
  app.add_option("--alpha", c.alpha, "Capacity margin")->capture_default_str();
  app.add_option("--ka", c.ka, "Attacker budget")->capture_default_str();
  app.add_option("--kd", c.kd, "Defender budget")->capture_default_str();
  app.add_option("--oracle", oracle, "Best-response oracle")
      ->check(CLI::IsMember({"exact", "greedy"}))
      ->capture_default_str();
  app.add_option("--max-iters", c.max_iters, "Double-oracle iteration cap")->capture_default_str();
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--out", c.out, "Output path (default stdout)");
  app.add_option("--attack", attack, "Attacked node ids id,id,...");
  app.add_option("--defend", defend, "Defended node ids id,id,...");
  app.add_option("--alphas", alphas, "Sweep: comma-separated capacity margins");
  app.add_option("--budget-pairs", budget_pairs, "Sweep: comma-separated KA:KD pairs");
  app.add_option("--enumeration-limit", c.enumeration_limit, "Largest candidate count for exact enumeration")
      ->capture_default_str();
  app.add_option("--sample-size", c.sample_size, "Uniform-attack sample size when not enumerable")
      ->capture_default_str();
  app.add_flag("--timing", c.timing, "Record wall-clock seconds (output is then not reproducible)");

  app.add_subcommand("simulate", "Attack/defend once and trace the cascade");
  app.add_subcommand("loads", "Nodal loads, single-attack payoffs and edge loads");
  app.add_subcommand("respond", "Best responses to DLB defense and to uniform load attack");
  app.add_subcommand("solve", "Double-oracle minimax solution");
  app.add_subcommand("sweep", "Game value and baselines over alpha and budget lists");
  app.add_subcommand("gen", "Write the grid in grid-file format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    c.command = app.get_subcommands().front()->get_name();
    if (!grid.empty()) c.grid_path = grid;
    if (!synthetic.empty()) {
      const auto parts = split(synthetic, ',');
      if (parts.size() != 4) throw cg::DomainError("--synthetic expects N,M,SRC,LD");
      c.synthetic = cg::SyntheticSpec{number<int>(parts[0], "--synthetic"), number<int>(parts[1], "--synthetic"),
                                      number<double>(parts[2], "--synthetic"), number<double>(parts[3], "--synthetic")};
    }
    c.oracle = oracle == "greedy" ? cg::OracleKind::Greedy : cg::OracleKind::Exact;
    c.format = format == "json" ? cg::OutputFormat::Json : cg::OutputFormat::Csv;
    have_attack = app.count("--attack") > 0;
    have_defend = app.count("--defend") > 0;
    if (have_attack) c.attack = node_list(attack, "--attack");
    if (have_defend) c.defend = node_list(defend, "--defend");
    for (const auto& tok : split(alphas, ',')) c.alphas.push_back(number<double>(tok, "--alphas"));
    for (const auto& tok : split(budget_pairs, ',')) {
      const auto kv = split(tok, ':');
      if (kv.size() != 2) throw cg::DomainError("--budget-pairs expects KA:KD entries");
      c.budgets.emplace_back(number<int>(kv[0], "--budget-pairs"), number<int>(kv[1], "--budget-pairs"));
    }

    const std::string text = cg::run_command(c);
    if (c.out.empty()) {
      std::cout << text;
      std::cout.flush();
    } else {
      std::ofstream out(c.out, std::ios::binary);
      if (!out) throw cg::Error("cannot write '" + c.out + "'");
      out << text;
      if (!out) throw cg::Error("write to '" + c.out + "' failed");
    }
  } catch (const cg::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\nhint: pass --oracle greedy or lower the budgets\n";
    return 3;
  } catch (const cg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
