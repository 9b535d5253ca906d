#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cagnet/cli.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;  // key=value overrides
  std::string dataset, eval_dataset, lexicon, lemmas, taxonomy;
  std::string checkpoint, predictions, out_dir;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "key = value configuration file");
  cmd->add_option("--set", opts.sets, "override a config key, e.g. --set lr=0.01");
  cmd->add_option("--dataset", opts.dataset, "dataset JSONL");
  cmd->add_option("--eval-dataset", opts.eval_dataset, "held-out dataset JSONL");
  cmd->add_option("--lexicon", opts.lexicon, "POS lexicon TSV");
  cmd->add_option("--lemmas", opts.lemmas, "lemma table TSV");
  cmd->add_option("--taxonomy", opts.taxonomy, "taxonomy TSV");
  cmd->add_option("--checkpoint", opts.checkpoint, "model checkpoint");
  cmd->add_option("--predictions", opts.predictions, "predictions JSONL");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "random seed");
}

cagnet::RunConfig resolve(const CommonOpts& opts) {
  cagnet::RunConfig config;
  if (!opts.config_path.empty()) config = cagnet::RunConfig::load(opts.config_path);
  // flags take precedence over the file
  for (const std::string& kv : opts.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("--set expects key=value, got: " + kv);
    }
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.dataset.empty()) config.dataset_path = opts.dataset;
  if (!opts.eval_dataset.empty()) config.eval_dataset_path = opts.eval_dataset;
  if (!opts.lexicon.empty()) config.lexicon_path = opts.lexicon;
  if (!opts.lemmas.empty()) config.lemmas_path = opts.lemmas;
  if (!opts.taxonomy.empty()) config.taxonomy_path = opts.taxonomy;
  if (!opts.checkpoint.empty()) config.checkpoint_path = opts.checkpoint;
  if (!opts.predictions.empty()) config.predictions_path = opts.predictions;
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  if (opts.seed >= 0) config.seed = static_cast<std::uint64_t>(opts.seed);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contextual dense-captioning toolkit"};
  app.require_subcommand(1);

  CommonOpts gen_opts, attrs_opts, train_opts, eval_opts, demo_opts, ablate_opts;

  CLI::App* gen = app.add_subcommand("gen-world", "generate a synthetic contextual dataset");
  add_common(gen, gen_opts);

  CLI::App* attrs = app.add_subcommand("attrs-build",
                                       "distill hierarchical attributes from captions");
  add_common(attrs, attrs_opts);

  std::string variant = "CAG-Net";
  CLI::App* tr = app.add_subcommand("train", "train a captioning variant");
  add_common(tr, train_opts);
  tr->add_option("--variant", variant, "L, L+G, L+G+N or CAG-Net");

  CLI::App* ev = app.add_subcommand("eval", "score predictions or a checkpoint");
  add_common(ev, eval_opts);

  std::string image_id;
  std::size_t region = 0;
  std::vector<std::string> demo_checkpoints;
  CLI::App* demo = app.add_subcommand("demo-context",
                                      "show neighbors, weights and captions for one region");
  add_common(demo, demo_opts);
  demo->add_option("--image", image_id, "image id")->required();
  demo->add_option("--region", region, "region index");
  demo->add_option("--model", demo_checkpoints,
                   "named checkpoint, name=path (repeatable)");

  std::string sweep = "variants";
  std::vector<std::uint64_t> seeds;
  CLI::App* ab = app.add_subcommand("ablate", "run a sweep over model settings");
  add_common(ab, ablate_opts);
  ab->add_option("--sweep", sweep, "variants, attrs, frontend, k or fusion");
  ab->add_option("--seeds", seeds, "seeds to average over")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cagnet::cli::gen_world(resolve(gen_opts), std::cout, std::cerr);
    if (attrs->parsed()) {
      return cagnet::cli::attrs_build(resolve(attrs_opts), std::cout, std::cerr);
    }
    if (tr->parsed()) {
      return cagnet::cli::train_cmd(resolve(train_opts), variant, std::cout, std::cerr);
    }
    if (ev->parsed()) return cagnet::cli::eval_cmd(resolve(eval_opts), std::cout, std::cerr);
    if (demo->parsed()) {
      return cagnet::cli::demo_context(resolve(demo_opts), image_id, region,
                                       demo_checkpoints, std::cout, std::cerr);
    }
    if (ab->parsed()) {
      if (seeds.empty() && ablate_opts.seed >= 0) {
        seeds.push_back(static_cast<std::uint64_t>(ablate_opts.seed));
      }
      return cagnet::cli::ablate(resolve(ablate_opts), sweep, seeds, std::cout,
                                 std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
