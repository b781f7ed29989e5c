#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modgate/cli.hpp"

#ifndef MODGATE_DATA_DIR
#define MODGATE_DATA_DIR "data"
#endif

int main(int argc, char** argv) {
  using namespace modgate::cli;

  CLI::App app{"modgate: prompt-based comment classification and evaluation"};
  app.require_subcommand(1);
  std::string taxonomy = std::string(MODGATE_DATA_DIR) + "/taxonomy.json";
  std::string specs = std::string(MODGATE_DATA_DIR) + "/specs";
  app.add_option("--taxonomy", taxonomy, "Category taxonomy file");

  PrepareOptions prep;
  auto* prepare = app.add_subcommand("prepare", "Draw a balanced evaluation corpus");
  prepare->add_option("--corpus", prep.input, "Source corpus (JSONL)")->required();
  prepare->add_option("--out", prep.output, "Balanced corpus to write")->required();
  prepare->add_option("--per-category", prep.per_category, "Comments per harmful category")
      ->capture_default_str();
  prepare->add_option("--neutral", prep.neutral, "Neutral comments")->capture_default_str();
  prepare->add_option("--seed", prep.seed, "Sampling seed")->required();

  ClassifyOptions cls;
  std::string cache_path;
  unsigned concurrency = 0;
  std::uint64_t seed = 0;
  auto* classify = app.add_subcommand("classify", "Classify a corpus with one prompt version");
  classify->add_option("--corpus", cls.corpus, "Corpus (JSONL)")->required();
  classify->add_option("--prompt", cls.prompt, "Prompt version id or spec file")->required();
  classify->add_option("--specs", specs, "Directory of prompt specs");
  classify->add_option("--model-config", cls.model_config, "Model config file")->required();
  auto* cache_opt = classify->add_option("--cache", cache_path, "Response cache (JSONL)");
  classify->add_option("--out", cls.out, "Run file to write")->required();
  auto* conc_opt = classify->add_option("--concurrency", concurrency, "Override concurrency_limit")
                       ->check(CLI::PositiveNumber);
  auto* seed_opt = classify->add_option("--seed", seed, "Seed recorded in the manifest");

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score a run");
  evaluate->add_option("--run", ev.run, "Run file")->required();
  evaluate->add_option("--out", ev.out, "Report base path (.json and .txt)")->required();

  CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "Tabulate MCC across runs");
  compare->add_option("reports", cmp.reports, "Evaluation reports (.json)")->required();
  compare->add_option("--out", cmp.out, "Table base path (.txt and .csv)")->required();

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "List binary misclassifications of a run");
  report->add_option("--run", rep.run, "Run file")->required();
  report->add_option("--out", rep.out, "Report base path (.md and .json)")->required();
  report->add_option("--top", rep.top, "Confusion pairs to list")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUserError;
  }

  prep.taxonomy = taxonomy;
  cls.taxonomy = taxonomy;
  cls.specs = specs;
  if (*cache_opt) cls.cache = cache_path;
  if (*conc_opt) cls.concurrency = concurrency;
  if (*seed_opt) cls.seed = seed;

  if (*prepare) return cmd_prepare(prep, std::cout, std::cerr);
  if (*classify) return cmd_classify(cls, std::cout, std::cerr);
  if (*evaluate) return cmd_evaluate(ev, std::cout, std::cerr);
  if (*compare) return cmd_compare(cmp, std::cout, std::cerr);
  return cmd_report(rep, std::cout, std::cerr);
}
