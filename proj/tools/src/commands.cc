#include "commands.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fewshot/corpus.h"
#include "fewshot/episodes.h"
#include "fewshot/error.h"
#include "fewshot/evaluation.h"
#include "fewshot/synthetic.h"
#include "fewshot/training.h"

namespace fewshot::cli {
namespace {

using nlohmann::json;

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string fixed(double x, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

int positive_int(const RunConfig& config, const std::string& key, long long fallback, long long min = 1) {
  const long long v = config.integer(key, fallback);
  if (v < min || v > 1'000'000'000) {
    throw ConfigError(key + " must be at least " + std::to_string(min) + " (got " + std::to_string(v) + ")");
  }
  return static_cast<int>(v);
}

int max_labels(const std::vector<const EpisodeSet*>& sets) {
  std::size_t most = 0;
  for (const auto* set : sets) {
    for (const auto& ep : set->episodes) most = std::max(most, ep.label_set.size());
  }
  return static_cast<int>(most);
}

// Fails before a long run if the store lacks anything the episodes need.
void check_store(const EmbeddingSource& source, const EpisodeSet& set, const ScorerConfig& scorer) {
  const auto* store = dynamic_cast<const EmbeddingStore*>(&source);
  if (store == nullptr) return;
  for (const auto& key : required_token_keys(set, scorer.pairwise())) {
    if (!store->contains(key)) throw MissingRecordError("embedding store has no record for " + describe(key));
  }
  if (!scorer.uses_semantics()) return;
  for (const auto& ep : set.episodes) {
    for (const auto& label : ep.label_set.bio_labels()) {
      if (!store->contains(LabelKey{ep.domain_name, label})) {
        throw MissingRecordError("embedding store has no label record for (" + ep.domain_name + ", " +
                                 label + ")");
      }
    }
  }
}

TrainConfig train_config_from(const RunConfig& config, std::uint64_t seed) {
  TrainConfig tc;
  tc.learning_rate = config.real("train.learning_rate", tc.learning_rate);
  if (!(tc.learning_rate >= 0.0)) throw ConfigError("train.learning_rate must be non-negative");
  tc.batch_episodes = positive_int(config, "train.batch_episodes", tc.batch_episodes);
  tc.patience = positive_int(config, "train.patience", tc.patience);
  tc.max_steps = positive_int(config, "train.max_steps", tc.max_steps, 0);
  tc.eval_every = positive_int(config, "train.eval_every", tc.eval_every);
  tc.seed = seed;
  tc.threads = threads_from(config);
  return tc;
}

json report_json(const TrainReport& report) {
  json j;
  j["losses"] = report.losses;
  j["dev_history"] = json::array();
  for (const auto& p : report.dev_history) j["dev_history"].push_back({{"step", p.step}, {"f1", p.f1}});
  j["stopping_step"] = report.stopping_step;
  j["best_step"] = report.best_step;
  j["best_dev_f1"] = report.best_dev_f1;
  return j;
}

// Resolves a probe point for gradcheck: a fresh model with a non-zero table
// so every transition cell contributes.
ModelState probe_model(const RunConfig& config, const ScorerConfig& scorer, int rows, int dim,
                       std::uint64_t seed) {
  if (auto ckpt = config.optional_path("paths.checkpoint")) {
    const auto path = std::filesystem::path(expand_seed(ckpt->string(), seed));
    if (!std::filesystem::exists(path)) throw ConfigError("paths.checkpoint: no such file " + path.string());
    return load_checkpoint(path);
  }
  ModelState model = init_model(scorer, rows, dim, seed);
  Rng rng(derive_seed(seed, 0x7461626c65ULL));
  if (scorer.uses_transitions()) {
    for (auto& v : model.table.values()) v = 0.5 * standard_normal(rng);
  }
  model.lambda = 1.0 + 0.25 * standard_normal(rng);
  round_to_float(model);
  return model;
}

}  // namespace

std::string expand_seed(const std::string& pattern, std::uint64_t seed) {
  std::string out = pattern;
  const std::string token = "{seed}";
  const std::string value = std::to_string(seed);
  for (auto pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos + value.size())) {
    out.replace(pos, token.size(), value);
  }
  return out;
}

ScorerConfig scorer_from(const RunConfig& config) {
  const Variant variant = parse_variant(config.text("model.variant", "l-tapnet"));
  Ablations ablations;
  for (const auto& name : config.list("model.ablate")) apply_ablation(ablations, name);
  std::optional<int> d_proj;
  if (auto v = config.integer("model.d_proj")) d_proj = static_cast<int>(*v);
  return build_scorer(variant, ablations, config.real("model.alpha"), config.real("model.beta"), d_proj);
}

std::unique_ptr<EmbeddingSource> source_from(const RunConfig& config) {
  if (config.optional_path("paths.store")) {
    return std::make_unique<EmbeddingStore>(load_store(config.existing_path("paths.store")));
  }
  const int dim = positive_int(config, "model.hash_dim", 64);
  const auto seed = static_cast<std::uint64_t>(config.integer("model.hash_seed", 0));
  return std::make_unique<HashEmbedder>(dim, seed, config.text("model.o_text", "O"));
}

std::vector<std::uint64_t> seeds_from(const RunConfig& config) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : config.list("seeds")) {
    RunConfig one;
    one.set("seed", item);
    const long long v = one.integer("seed", 0);
    if (v < 0) throw ConfigError("seeds must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  if (seeds.empty()) {
    const long long v = config.integer("seed", 0);
    if (v < 0) throw ConfigError("seed must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  return seeds;
}

int threads_from(const RunConfig& config) { return positive_int(config, "threads", 1); }

int cmd_synth(const RunConfig& config, std::ostream& out) {
  const auto dir = config.optional_path("paths.out_dir");
  if (!dir) throw ConfigError("missing required setting paths.out_dir");
  SyntheticSpec spec;
  spec.slots = positive_int(config, "synth.slots", spec.slots);
  spec.sentences = positive_int(config, "synth.sentences", spec.sentences);
  const int count = positive_int(config, "synth.domains", 5);
  const auto seed = seeds_from(config).front();
  std::filesystem::create_directories(*dir);
  for (const auto& domain : synthetic_domains(count, spec, seed)) {
    const auto path = *dir / (domain.name + ".conll");
    write_conll(domain, path);
    out << path.string() << '\t' << domain.sentences.size() << " sentences\t"
        << domain.label_set.slots().size() << " slots\n";
  }
  return kExitOk;
}

int cmd_sample_episodes(const RunConfig& config, std::ostream& out) {
  SplitOptions options;
  options.k = static_cast<int>(config.integer("sampler.k", options.k));
  if (options.k < 1) throw ConfigError("sampler.k must be at least 1 (got " + std::to_string(options.k) + ")");
  options.episodes_per_domain = positive_int(config, "sampler.episodes", options.episodes_per_domain);
  options.n_query = positive_int(config, "sampler.queries", options.n_query, 0);
  options.skip_prob = config.real("sampler.skip_prob", options.skip_prob);
  if (!(options.skip_prob >= 0.0 && options.skip_prob < 1.0)) {
    throw ConfigError("sampler.skip_prob must lie in [0, 1)");
  }
  options.seed = seeds_from(config).front();

  const auto names = config.list("paths.domains");
  if (names.empty()) throw ConfigError("missing required setting paths.domains");
  const auto out_path = config.optional_path("paths.out");
  if (!out_path) throw ConfigError("missing required setting paths.out");
  std::vector<Domain> domains;
  for (const auto& name : names) {
    if (!std::filesystem::exists(name)) throw ConfigError("paths.domains: no such file " + name);
    domains.push_back(load_domain(name));
  }

  const EpisodeSet set = build_split(domains, options);
  auto file = open_output(*out_path);
  write_episodes(set, file);

  char line[160];
  std::snprintf(line, sizeof line, "%-16s %8s %8s %10s\n", "domain", "labels", "episodes", "Ave. |S|");
  out << line;
  double total_support = 0.0;
  for (const auto& domain : domains) {
    double support = 0.0;
    int episodes = 0;
    for (const auto& ep : set.episodes) {
      if (ep.domain_name != domain.name) continue;
      support += static_cast<double>(ep.support.sentences.size());
      ++episodes;
    }
    total_support += support;
    std::snprintf(line, sizeof line, "%-16s %8zu %8d %10.2f\n", domain.name.c_str(),
                  domain.label_set.size(), episodes, episodes > 0 ? support / episodes : 0.0);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-16s %8s %8zu %10.2f\n", "all", "", set.episodes.size(),
                set.episodes.empty() ? 0.0 : total_support / static_cast<double>(set.episodes.size()));
  out << line;
  out << "wrote " << set.episodes.size() << " episodes (K=" << options.k << ") to " << out_path->string()
      << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const ScorerConfig scorer = scorer_from(config);
  const EpisodeSet train_set = read_episodes(config.existing_path("paths.train_episodes"));
  EpisodeSet dev_set;
  if (config.optional_path("paths.dev_episodes")) {
    dev_set = read_episodes(config.existing_path("paths.dev_episodes"));
  }
  const auto ckpt = config.optional_path("paths.checkpoint");
  if (!ckpt) throw ConfigError("missing required setting paths.checkpoint");
  const auto seeds = seeds_from(config);
  if (seeds.size() > 1 && ckpt->string().find("{seed}") == std::string::npos) {
    throw ConfigError("paths.checkpoint needs a {seed} placeholder when training several seeds");
  }
  const auto source = source_from(config);
  check_store(*source, train_set, scorer);
  check_store(*source, dev_set, scorer);

  const int needed = max_labels({&train_set, &dev_set});
  const int rows = positive_int(config, "model.pool_rows", std::max(needed, 1));
  if (rows < needed) {
    throw ConfigError("model.pool_rows = " + std::to_string(rows) + " is smaller than the largest label set (" +
                      std::to_string(needed) + ")");
  }

  json report;
  report["variant"] = std::string(variant_name(scorer.variant));
  report["ablate"] = ablation_names(scorer.ablations);
  report["runs"] = json::array();
  for (const auto seed : seeds) {
    const TrainConfig tc = train_config_from(config, seed);
    ModelState model = init_model(scorer, rows, source->dim(), seed);
    TrainReport tr;
    const int every = tc.eval_every;
    model = train(std::move(model), train_set, dev_set, *source, tc, &tr, [&](int step, double loss) {
      if (step % every == 0) err << "seed " << seed << " step " << step << " loss " << fixed(loss, 4) << '\n';
    });
    const auto path = std::filesystem::path(expand_seed(ckpt->string(), seed));
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    save_checkpoint(model, path);

    out << "seed " << seed << ": " << tr.stopping_step << " steps, best dev F1 " << fixed(tr.best_dev_f1)
        << " at step " << tr.best_step << ", checkpoint " << path.string() << '\n';
    err << "seed " << seed << ": " << fixed(tr.wall_seconds, 1) << " s\n";
    json run = report_json(tr);
    run["seed"] = seed;
    run["checkpoint"] = path.string();
    report["runs"].push_back(std::move(run));
  }
  if (auto path = config.optional_path("paths.report")) {
    auto file = open_output(*path);
    file << report.dump(1) << '\n';
  }
  return kExitOk;
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  const EpisodeSet set = read_episodes(config.existing_path("paths.episodes"));
  if (set.episodes.empty()) throw ConfigError("paths.episodes holds no episodes");
  const auto ckpt = config.optional_path("paths.checkpoint");
  if (!ckpt) throw ConfigError("missing required setting paths.checkpoint");
  const Decoder decoder = parse_decoder(config.text("eval.decoder", "viterbi"));
  const bool strict = config.flag("eval.strict", false);
  const bool bigrams = config.flag("eval.bigrams", false);
  const int threads = threads_from(config);
  const auto seeds = seeds_from(config);
  std::vector<std::filesystem::path> paths;
  for (const auto seed : seeds) {
    paths.emplace_back(expand_seed(ckpt->string(), seed));
    if (!std::filesystem::exists(paths.back())) {
      throw ConfigError("paths.checkpoint: no such file " + paths.back().string());
    }
  }
  const auto source = source_from(config);

  std::vector<std::vector<double>> f1(seeds.size());
  std::vector<std::vector<Prf>> prf(seeds.size());
  std::vector<std::vector<std::string>> all_pred;
  std::vector<std::vector<std::string>> all_gold;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const ModelState model = load_checkpoint(paths[s]);
    check_compatible(model, *source);
    check_store(*source, set, model.config);
    for (const auto& ep : set.episodes) {
      if (static_cast<int>(ep.label_set.size()) > model.pool.rows()) {
        throw DimensionError("checkpoint " + paths[s].string() + " has " + std::to_string(model.pool.rows()) +
                             " references but episode " + std::to_string(ep.episode_id) + " needs " +
                             std::to_string(ep.label_set.size()));
      }
    }
    std::vector<std::vector<std::vector<std::string>>> predictions(set.episodes.size());
    prf[s].resize(set.episodes.size());
    parallel_for(set.episodes.size(), threads, [&](std::size_t e) {
      const Episode& ep = set.episodes[e];
      const PreparedEpisode prepared = prepare_episode(model.config, ep, *source);
      std::vector<std::vector<std::string>> golds;
      for (const auto& ids : decode_episode(model, prepared, decoder)) {
        predictions[e].push_back(ep.label_set.decode(ids));
      }
      for (const auto& q : ep.queries) golds.push_back(q.labels);
      prf[s][e] = episode_f1(predictions[e], golds, strict);
    });
    for (std::size_t e = 0; e < set.episodes.size(); ++e) {
      f1[s].push_back(prf[s][e].f1);
      if (!bigrams) continue;
      for (std::size_t q = 0; q < set.episodes[e].queries.size(); ++q) {
        all_pred.push_back(predictions[e][q]);
        all_gold.push_back(set.episodes[e].queries[q].labels);
      }
    }
  }
  const EvalReport report = aggregate(f1);

  std::vector<std::string> names;
  for (const auto seed : seeds) names.push_back(std::to_string(seed));
  std::ostringstream table;
  table << "decoder " << decoder_name(decoder) << ", " << set.episodes.size() << " episodes\n";
  print_report(table, report, names);
  BigramTable bigram_table;
  if (bigrams) {
    bigram_table = bigram_accuracy(all_pred, all_gold);
    table << '\n';
    print_bigrams(table, bigram_table);
  }
  out << table.str();
  if (auto path = config.optional_path("paths.table")) {
    auto file = open_output(*path);
    file << table.str();
  }

  if (auto path = config.optional_path("paths.report")) {
    json j;
    j["decoder"] = std::string(decoder_name(decoder));
    j["strict"] = strict;
    j["seeds"] = seeds;
    j["seed_means"] = report.seed_means;
    j["mean"] = report.mean;
    j["std"] = report.std;
    j["episodes"] = json::array();
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      for (std::size_t e = 0; e < set.episodes.size(); ++e) {
        const Prf& p = prf[s][e];
        j["episodes"].push_back({{"seed", seeds[s]},
                                 {"episode_id", set.episodes[e].episode_id},
                                 {"domain", set.episodes[e].domain_name},
                                 {"precision", p.precision},
                                 {"recall", p.recall},
                                 {"f1", p.f1}});
      }
    }
    if (bigrams) {
      j["bigrams"] = json::array();
      for (std::size_t t = 0; t < kBigramTypes; ++t) {
        const auto& row = bigram_table.rows[t];
        j["bigrams"].push_back({{"type", std::string(bigram_name(static_cast<BigramType>(t)))},
                                {"count", row.total},
                                {"proportion", row.proportion},
                                {"accuracy", row.accuracy}});
      }
    }
    auto file = open_output(*path);
    file << j.dump(1) << '\n';
  }

  if (auto path = config.optional_path("paths.csv")) {
    auto file = open_output(*path);
    file << "seed,episode_id,domain,precision,recall,f1\n";
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      for (std::size_t e = 0; e < set.episodes.size(); ++e) {
        const Prf& p = prf[s][e];
        file << seeds[s] << ',' << set.episodes[e].episode_id << ',' << set.episodes[e].domain_name << ','
             << fixed(p.precision, 4) << ',' << fixed(p.recall, 4) << ',' << fixed(p.f1, 4) << '\n';
      }
    }
  }
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out) {
  const ScorerConfig scorer = scorer_from(config);
  const EpisodeSet set = read_episodes(config.existing_path("paths.episodes"));
  GradcheckOptions options;
  options.eps = config.real("gradcheck.eps", options.eps);
  options.tol = config.real("gradcheck.tol", options.tol);
  if (config.flag("gradcheck.inject_fault", false)) options.lambda_fault = 1.1;
  const int count = std::min<int>(positive_int(config, "gradcheck.count", 20),
                                  static_cast<int>(set.episodes.size()));
  if (count == 0) throw ConfigError("paths.episodes holds no episodes");
  const auto seed = seeds_from(config).front();
  const auto source = source_from(config);
  const int needed = max_labels({&set});
  const int rows = positive_int(config, "model.pool_rows", needed);
  const ModelState model = probe_model(config, scorer, rows, source->dim(), seed);
  check_compatible(model, *source);

  std::size_t flagged = 0;
  double worst = 0.0;
  char line[200];
  for (int e = 0; e < count; ++e) {
    const Episode& ep = set.episodes[static_cast<std::size_t>(e)];
    if (ep.queries.empty()) continue;
    Rng rng(derive_seed(seed, 0x6772616463ULL, static_cast<std::uint64_t>(e)));
    const auto assignment = assign_references(model.pool.rows(), ep.label_set, AssignMode::kRandom, &rng);
    const PreparedEpisode prepared = prepare_episode(model.config, ep, *source);
    const GradcheckReport report = gradcheck(model, prepared, assignment, options);
    std::snprintf(line, sizeof line, "episode %-6lld %5zu coordinates  max rel error %.3e  flagged %zu\n",
                  static_cast<long long>(ep.episode_id), report.entries.size(), report.max_rel_error,
                  report.flagged);
    out << line;
    for (const auto& entry : report.entries) {
      if (!entry.flagged) continue;
      std::snprintf(line, sizeof line, "  %-16s analytic % .6e  numeric % .6e  rel %.3e\n", entry.name.c_str(),
                    entry.analytic, entry.numeric, entry.rel_error);
      out << line;
    }
    flagged += report.flagged;
    worst = std::max(worst, report.max_rel_error);
  }
  std::snprintf(line, sizeof line, "%s: %zu flagged, max rel error %.3e (tol %.1e, step %.1e)\n",
                flagged == 0 ? "PASS" : "FAIL", flagged, worst, options.tol, options.eps);
  out << line;
  return flagged == 0 ? kExitOk : kExitCheckFailed;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Few-shot slot tagging with label-dependency transfer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fewshot 0.1.0");

  std::optional<std::string> config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  auto bind = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
  };
  auto switch_on = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_flag_callback(flag, [&overrides, key] { overrides.emplace_back(key, "true"); }, help);
  };
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration file");
    bind(sub, "--seed", "seed", "Random seed");
    bind(sub, "--threads", "threads", "Worker threads (1 = bitwise reproducible)");
  };
  auto model_flags = [&](CLI::App* sub) {
    bind(sub, "--variant", "model.variant", "wpz | l-wpz | tapnet | l-tapnet");
    sub->add_option_function<std::vector<std::string>>(
           "--ablate",
           [&overrides](const std::vector<std::string>& names) {
             std::string joined;
             for (const auto& n : names) joined += (joined.empty() ? "" : ",") + n;
             overrides.emplace_back("model.ablate", joined);
           },
           "pairwise | label-semantic | prototype | cdt (repeatable)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    bind(sub, "--alpha", "model.alpha", "Weight of label-name vectors");
    bind(sub, "--beta", "model.beta", "Weight of references against prototypes");
    bind(sub, "--d-proj", "model.d_proj", "Projected dimension");
    bind(sub, "--pool-rows", "model.pool_rows", "Reference pool size");
    bind(sub, "--store", "paths.store", "Embedding store file");
    bind(sub, "--hash-dim", "model.hash_dim", "Dimension of hash embeddings when no store is given");
    bind(sub, "--hash-seed", "model.hash_seed", "Seed of the hash embeddings");
  };

  auto* synth = app.add_subcommand("synth", "Write synthetic CoNLL domains");
  common(synth);
  bind(synth, "--out-dir", "paths.out_dir", "Output directory");
  bind(synth, "--domains", "synth.domains", "Number of domains");
  bind(synth, "--slots", "synth.slots", "Slots per domain");
  bind(synth, "--sentences", "synth.sentences", "Sentences per domain");

  auto* sample = app.add_subcommand("sample-episodes", "Build few-shot episodes from domain corpora");
  common(sample);
  sample->add_option_function<std::vector<std::string>>(
      "--domains",
      [&overrides](const std::vector<std::string>& names) {
        std::string joined;
        for (const auto& n : names) joined += (joined.empty() ? "" : ",") + n;
        overrides.emplace_back("paths.domains", joined);
      },
      "Domain files (CoNLL or JSON)");
  bind(sample, "--out", "paths.out", "Episode file to write");
  bind(sample, "--k", "sampler.k", "Shots per label");
  bind(sample, "--episodes", "sampler.episodes", "Episodes per domain");
  bind(sample, "--queries", "sampler.queries", "Queries per episode");
  bind(sample, "--skip-prob", "sampler.skip_prob", "Probability of skipping a removal");

  auto* train_cmd = app.add_subcommand("train", "Train on source-domain episodes");
  common(train_cmd);
  model_flags(train_cmd);
  bind(train_cmd, "--seeds", "seeds", "Comma-separated seeds, one run each");
  bind(train_cmd, "--train", "paths.train_episodes", "Training episodes");
  bind(train_cmd, "--dev", "paths.dev_episodes", "Development episodes");
  bind(train_cmd, "--checkpoint", "paths.checkpoint", "Checkpoint path; {seed} is replaced");
  bind(train_cmd, "--report", "paths.report", "Training report (JSON)");
  bind(train_cmd, "--lr", "train.learning_rate", "Learning rate");
  bind(train_cmd, "--batch", "train.batch_episodes", "Episodes per step");
  bind(train_cmd, "--max-steps", "train.max_steps", "Step limit");
  bind(train_cmd, "--eval-every", "train.eval_every", "Steps between dev evaluations");
  bind(train_cmd, "--patience", "train.patience", "Evaluations without improvement before stopping");

  auto* eval_cmd = app.add_subcommand("eval", "Decode and score episodes");
  common(eval_cmd);
  bind(eval_cmd, "--seeds", "seeds", "Comma-separated seeds; one checkpoint each");
  bind(eval_cmd, "--store", "paths.store", "Embedding store file");
  bind(eval_cmd, "--hash-dim", "model.hash_dim", "Dimension of hash embeddings when no store is given");
  bind(eval_cmd, "--hash-seed", "model.hash_seed", "Seed of the hash embeddings");
  bind(eval_cmd, "--episodes", "paths.episodes", "Episode file");
  bind(eval_cmd, "--checkpoint", "paths.checkpoint", "Checkpoint path; {seed} is replaced");
  bind(eval_cmd, "--decoder", "eval.decoder", "viterbi | greedy | rule");
  bind(eval_cmd, "--report", "paths.report", "Report (JSON)");
  bind(eval_cmd, "--table", "paths.table", "Report (text table)");
  bind(eval_cmd, "--csv", "paths.csv", "Per-episode scores (CSV)");
  switch_on(eval_cmd, "--bigrams", "eval.bigrams", "Add the bigram accuracy table");
  switch_on(eval_cmd, "--strict", "eval.strict", "Strict BIO span reading");

  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
  common(grad_cmd);
  model_flags(grad_cmd);
  bind(grad_cmd, "--episodes", "paths.episodes", "Episode file");
  bind(grad_cmd, "--checkpoint", "paths.checkpoint", "Check at these parameters instead of a fresh model");
  bind(grad_cmd, "--eps", "gradcheck.eps", "Finite-difference step");
  bind(grad_cmd, "--tol", "gradcheck.tol", "Relative error tolerance");
  bind(grad_cmd, "--count", "gradcheck.count", "Episodes to check");
  switch_on(grad_cmd, "--inject-fault", "gradcheck.inject_fault", "Scale the lambda gradient by 1.1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config = config_path ? RunConfig::load(*config_path) : RunConfig{};
    for (const auto& [key, value] : overrides) config.set(key, value);
    if (synth->parsed()) return cmd_synth(config, out);
    if (sample->parsed()) return cmd_sample_episodes(config, out);
    if (train_cmd->parsed()) return cmd_train(config, out, err);
    if (eval_cmd->parsed()) return cmd_eval(config, out);
    if (grad_cmd->parsed()) return cmd_gradcheck(config, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitUsage;
}

}  // namespace fewshot::cli
