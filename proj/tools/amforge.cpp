#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "amforge/amforge.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cap;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  std::optional<std::string> preamble;
};

amforge::RunConfig load(const std::string& path, const Overrides& o) {
  auto cfg = amforge::load_run_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  if (o.workers) cfg.workers = *o.workers;
  if (o.preamble) cfg.preamble = *o.preamble;
  if (o.cap) {
    for (auto& t : cfg.tasks) t.cap = *o.cap;
  }
  return cfg;
}

void print_stats(const std::vector<amforge::cmd::TaskStatsRow>& rows) {
  std::cout << amforge::cmd::stats_table(rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amforge: Amharic instruction dataset forge and evaluation harness"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> tasks;
  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--task", tasks, "restrict to these task ids (repeatable)");
    sub->add_option("--out", o.out, "output directory (overrides config)");
  };

  auto* forge = app.add_subcommand("forge", "build train/val/test instruction files");
  add_common(forge);
  forge->add_option("--seed", o.seed, "global seed");
  forge->add_option("--cap", o.cap, "max train examples per task")->check(CLI::PositiveNumber);
  forge->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  forge->add_option("--preamble", o.preamble, "English preamble for code-mixed templates");

  auto* stats = app.add_subcommand("stats", "count forged examples per task and split");
  add_common(stats);

  std::string predictions, model;
  std::optional<std::size_t> limit;
  auto* ev = app.add_subcommand("eval", "score a model's predictions against forged test splits");
  add_common(ev);
  ev->add_option("--predictions", predictions, "directory holding <task>.txt files")
      ->required()
      ->check(CLI::ExistingDirectory);
  ev->add_option("--model", model, "model id used in the report name")->required();
  ev->add_option("--limit", limit, "score only the first N items of each task")
      ->check(CLI::PositiveNumber);

  std::string in_path, out_path;
  std::vector<std::string> ops;
  double rate = 0.0;
  std::uint64_t corrupt_seed = 0;
  auto* corrupt = app.add_subcommand("corrupt", "inject character noise line by line");
  corrupt->add_option("--in", in_path, "input text file")->required()->check(CLI::ExistingFile);
  corrupt->add_option("--out", out_path, "output text file")->required();
  corrupt->add_option("--ops", ops, "insert, substitute, swap, delete, word-crop")
      ->required()
      ->delimiter(',');
  corrupt->add_option("--rate", rate, "fraction of positions touched per op")->required();
  corrupt->add_option("--seed", corrupt_seed, "seed");

  auto* review = app.add_subcommand("review", "blind human review sheets");
  review->require_subcommand(1);
  std::vector<std::string> models;
  std::size_t n = 120;
  unsigned raters = 3;
  std::uint64_t review_seed = 0;
  std::string key_path, sheets_dir, grid_out;
  auto* rs = review->add_subcommand("sample", "write rater sheets and a sealed key");
  rs->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  rs->add_option("--task", tasks, "restrict to these task ids (repeatable)");
  rs->add_option("--model", models, "name=predictions_dir (repeatable)")->required();
  rs->add_option("--n", n, "items sampled per task");
  rs->add_option("--raters", raters, "number of raters");
  rs->add_option("--seed", review_seed, "seed");
  rs->add_option("--out", sheets_dir, "directory for sheet files")->required();
  rs->add_option("--key", key_path, "sealed key path (default <out>/sealed/key.json)");
  auto* ra = review->add_subcommand("aggregate", "unblind rated sheets into a mean-rating grid");
  ra->add_option("--sheets", sheets_dir, "directory of rated sheet_*.jsonl")
      ->required()
      ->check(CLI::ExistingDirectory);
  ra->add_option("--key", key_path, "sealed key")->required()->check(CLI::ExistingFile);
  ra->add_option("--out", grid_out, "write the grid here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage problems are validation errors; --help stays exit 0
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (forge->parsed()) {
      const auto cfg = load(config, o);
      print_stats(amforge::cmd::cmd_forge(cfg, tasks));
    } else if (stats->parsed()) {
      print_stats(amforge::cmd::cmd_stats(load(config, o), tasks));
    } else if (ev->parsed()) {
      const auto cfg = load(config, o);
      const auto outcome = amforge::cmd::cmd_eval(cfg, predictions, model, tasks, limit);
      std::cout << amforge::eval::write_report(outcome.reports, amforge::eval::ReportFormat::Delimited);
      if (outcome.failures) {
        std::cerr << outcome.failures << " task(s) failed\n";
        return 2;
      }
    } else if (corrupt->parsed()) {
      amforge::CorruptionSpec spec;
      for (const auto& op : ops) spec.ops.insert(amforge::parse_corrupt_op(op));
      spec.rate = rate;
      spec.seed = corrupt_seed;
      amforge::cmd::cmd_corrupt(in_path, out_path, spec);
    } else if (rs->parsed()) {
      std::map<std::string, std::filesystem::path> dirs;
      for (const auto& m : models) {
        const auto eq = m.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == m.size()) {
          throw amforge::ValidationError("--model expects name=dir, got '" + m + "'");
        }
        if (!dirs.emplace(m.substr(0, eq), m.substr(eq + 1)).second) {
          throw amforge::ValidationError("model '" + m.substr(0, eq) + "' given twice");
        }
      }
      const auto cfg = load(config, o);
      const std::filesystem::path key =
          key_path.empty() ? std::filesystem::path(sheets_dir) / "sealed" / "key.json"
                            : std::filesystem::path(key_path);
      const auto sample =
          amforge::cmd::cmd_review_sample(cfg, dirs, n, review_seed, raters, sheets_dir, key, tasks);
      std::cout << sample.items.size() << " items, " << raters << " sheets\n";
    } else if (ra->parsed()) {
      const auto grid = amforge::review::grid_tsv(amforge::cmd::cmd_review_aggregate(sheets_dir, key_path));
      if (grid_out.empty()) {
        std::cout << grid;
      } else {
        amforge::cmd::write_file(grid_out, grid);
      }
    }
  } catch (const amforge::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
