#include "fewshot/training.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "fewshot/error.h"
#include "fewshot/evaluation.h"

namespace fewshot {
namespace {

using nlohmann::json;

Eigen::MatrixXd transitions_for(const ModelState& model, const LabelSet& labels) {
  return model.config.uses_transitions() ? expand_transitions(model.table, labels)
                                         : zero_transitions(labels);
}

// Loss (and optionally gradient) of every query, averaged over the episode.
double accumulate(const ModelState& model, const PreparedEpisode& prepared,
                  const std::vector<int>& assignment, const std::vector<Eigen::MatrixXd>* frozen,
                  Gradients* grad) {
  const auto& episode = *prepared.episode;
  const auto& labels = episode.label_set;
  const int num_labels = static_cast<int>(labels.size());
  const auto num_queries = prepared.queries.size();
  if (num_queries == 0) throw Error("episode " + std::to_string(episode.episode_id) + " has no queries");
  if (static_cast<int>(assignment.size()) != num_labels) {
    throw DimensionError("reference assignment does not cover the label set");
  }
  if (frozen != nullptr && frozen->size() != (prepared.shared_support ? 1 : num_queries)) {
    throw DimensionError("frozen projection count mismatch");
  }

  const ScorerConfig& cfg = model.config;
  const Eigen::MatrixXd transitions = transitions_for(model, labels);
  const Eigen::MatrixXi cells = tied_cells(labels);

  if (grad != nullptr) {
    grad->pool = Eigen::MatrixXd::Zero(model.pool.refs.rows(), model.pool.refs.cols());
    grad->table.fill(0.0);
    grad->lambda = 0.0;
  }

  std::optional<EpisodeBindings> shared;
  double total = 0.0;
  for (std::size_t q = 0; q < num_queries; ++q) {
    const PreparedQuery& query = prepared.queries[q];
    const std::size_t slot = prepared.shared_support ? 0 : q;
    const Eigen::MatrixXd* frozen_m = frozen != nullptr ? &(*frozen)[slot] : nullptr;
    if (!prepared.shared_support || !shared) {
      shared = bind_episode(cfg, model.pool, assignment, query.prototypes, prepared.semantics, frozen_m);
    }
    const EpisodeBindings& b = *shared;

    CrfScore score{emission_scores(cfg, b, query.embedding), transitions, model.lambda};
    const Marginals marg = forward_backward(score);
    const double gold = sequence_score(score, query.gold);
    total += marg.log_z - gold;
    if (grad == nullptr) continue;

    const auto n = static_cast<Eigen::Index>(query.gold.size());
    Eigen::MatrixXd residual = marg.node;  // p - onehot(gold)
    for (Eigen::Index i = 0; i < n; ++i) residual(i, query.gold[static_cast<std::size_t>(i)]) -= 1.0;

    grad->lambda += residual.cwiseProduct(score.emission).sum();

    if (cfg.uses_transitions()) {
      const Eigen::MatrixXd diff = marg.transitions - transition_counts(query.gold, num_labels);
      for (Eigen::Index p = 0; p < cells.rows(); ++p) {
        for (Eigen::Index c = 0; c < cells.cols(); ++c) {
          if (cells(p, c) >= 0) grad->table[static_cast<std::size_t>(cells(p, c))] += diff(p, c);
        }
      }
    }

    const Eigen::MatrixXd grad_omega =
        emission_backward(query.embedding, b.projection, b.omega, cfg.similarity, score.emission,
                          model.lambda * residual);
    for (int j = 0; j < num_labels; ++j) {
      const double through_psi = b.prototypes.present[static_cast<std::size_t>(j)] ? cfg.beta : 1.0;
      const double weight = (1.0 - cfg.alpha) * through_psi;
      if (weight == 0.0) continue;
      grad->pool.row(assignment[static_cast<std::size_t>(j)]) += weight * grad_omega.row(j);
    }
  }

  const double scale = 1.0 / static_cast<double>(num_queries);
  if (grad != nullptr) {
    grad->pool *= scale;
    for (auto& g : grad->table) g *= scale;
    grad->lambda *= scale;
    grad->loss = total * scale;
  }
  return total * scale;
}

json config_json(const ModelState& model) {
  json header;
  header["format"] = "fewshot-checkpoint";
  header["version"] = kCheckpointVersion;
  header["D"] = model.dim();
  header["N_pool"] = model.pool.rows();
  header["variant"] = std::string(variant_name(model.config.variant));
  header["alpha"] = model.config.alpha;
  header["beta"] = model.config.beta;
  header["lambda"] = model.lambda;
  header["d_proj"] = model.config.projection_dim ? json(*model.config.projection_dim) : json(nullptr);
  header["ablate"] = ablation_names(model.config.ablations);
  header["blob_floats"] = model.pool.rows() * model.dim() + kCollapsedCells;
  return header;
}

}  // namespace

std::size_t ModelState::parameter_count() const {
  return static_cast<std::size_t>(pool.refs.size()) + kCollapsedCells + 1;
}

void round_to_float(ModelState& model) {
  model.pool.refs = model.pool.refs.cast<float>().cast<double>();
  for (auto& v : model.table.values()) v = static_cast<double>(static_cast<float>(v));
  model.lambda = static_cast<double>(static_cast<float>(model.lambda));
}

ModelState init_model(const ScorerConfig& config, int pool_rows, int dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x706f6f6cULL));
  ModelState model;
  model.pool = init_reference_pool(pool_rows, dim, rng);
  model.config = config;
  model.lambda = 1.0;
  round_to_float(model);
  return model;
}

std::vector<double> flatten(const ModelState& model) {
  std::vector<double> out;
  out.reserve(model.parameter_count());
  for (Eigen::Index r = 0; r < model.pool.refs.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.pool.refs.cols(); ++c) out.push_back(model.pool.refs(r, c));
  }
  for (double v : model.table.values()) out.push_back(v);
  out.push_back(model.lambda);
  return out;
}

void unflatten(const std::vector<double>& params, ModelState& model) {
  if (params.size() != model.parameter_count()) throw DimensionError("parameter vector size mismatch");
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < model.pool.refs.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.pool.refs.cols(); ++c) model.pool.refs(r, c) = params[k++];
  }
  for (auto& v : model.table.values()) v = params[k++];
  model.lambda = params[k];
}

std::string parameter_name(const ModelState& model, std::size_t index) {
  const auto pool_size = static_cast<std::size_t>(model.pool.refs.size());
  if (index < pool_size) {
    const auto dim = static_cast<std::size_t>(model.dim());
    return "ref[" + std::to_string(index / dim) + "][" + std::to_string(index % dim) + "]";
  }
  index -= pool_size;
  if (index < kCollapsedCells) return "T[" + std::string(cell_name(static_cast<int>(index))) + "]";
  return "lambda";
}

std::vector<double> Gradients::flat() const {
  std::vector<double> out;
  for (Eigen::Index r = 0; r < pool.rows(); ++r) {
    for (Eigen::Index c = 0; c < pool.cols(); ++c) out.push_back(pool(r, c));
  }
  out.insert(out.end(), table.begin(), table.end());
  out.push_back(lambda);
  return out;
}

PreparedEpisode prepare_episode(const ScorerConfig& config, const Episode& episode,
                                const EmbeddingSource& source) {
  PreparedEpisode out;
  out.episode = &episode;
  const auto& labels = episode.label_set;
  const int num_labels = static_cast<int>(labels.size());
  const bool pairwise = config.pairwise();
  out.shared_support = source.context_free() || !pairwise;

  std::vector<std::vector<int>> support_labels;
  for (const auto& s : episode.support.sentences) support_labels.push_back(labels.encode(s.labels));

  std::optional<Prototypes> shared;
  if (out.shared_support && !episode.queries.empty()) {
    shared = compute_prototypes(support_token_embeddings(episode, 0, source, pairwise),
                                support_labels, num_labels);
  }
  for (std::size_t q = 0; q < episode.queries.size(); ++q) {
    PreparedQuery pq;
    pq.embedding = pairwise_query_embedding(episode, static_cast<int>(q), source, pairwise);
    pq.prototypes = shared ? *shared
                           : compute_prototypes(support_token_embeddings(episode, static_cast<int>(q),
                                                                         source, pairwise),
                                                support_labels, num_labels);
    pq.gold = labels.encode(episode.queries[q].labels);
    out.queries.push_back(std::move(pq));
  }

  out.semantics = Eigen::MatrixXd::Zero(num_labels, source.dim());
  if (config.uses_semantics()) {
    for (int j = 0; j < num_labels; ++j) {
      out.semantics.row(j) = label_semantic_embedding(labels.label(j), episode.domain_name, source);
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> episode_projections(const ModelState& model,
                                                 const PreparedEpisode& prepared,
                                                 const std::vector<int>& assignment) {
  std::vector<Eigen::MatrixXd> out;
  const std::size_t count = prepared.shared_support ? std::min<std::size_t>(1, prepared.queries.size())
                                                    : prepared.queries.size();
  for (std::size_t q = 0; q < count; ++q) {
    auto b = bind_episode(model.config, model.pool, assignment, prepared.queries[q].prototypes,
                          prepared.semantics);
    out.push_back(std::move(b.projection));
  }
  return out;
}

double episode_loss(const ModelState& model, const PreparedEpisode& prepared,
                    const std::vector<int>& assignment, const std::vector<Eigen::MatrixXd>* frozen) {
  return accumulate(model, prepared, assignment, frozen, nullptr);
}

double episode_loss(const ModelState& model, const Episode& episode, const EmbeddingSource& source) {
  const PreparedEpisode prepared = prepare_episode(model.config, episode, source);
  const auto assignment =
      assign_references(model.pool.rows(), episode.label_set, AssignMode::kDeterministic);
  return episode_loss(model, prepared, assignment);
}

Gradients gradients(const ModelState& model, const PreparedEpisode& prepared,
                    const std::vector<int>& assignment) {
  Gradients g;
  accumulate(model, prepared, assignment, nullptr, &g);
  return g;
}

GradcheckReport gradcheck(const ModelState& model, const PreparedEpisode& prepared,
                          const std::vector<int>& assignment, const GradcheckOptions& options) {
  if (!(options.eps > 0.0)) throw ConfigError("step must be positive");
  if (!(options.tol > 0.0)) throw ConfigError("tolerance must be positive");

  const auto frozen = episode_projections(model, prepared, assignment);
  Gradients analytic = gradients(model, prepared, assignment);
  analytic.lambda *= options.lambda_fault;
  const std::vector<double> grad = analytic.flat();
  const std::vector<double> nominal = flatten(model);

  std::vector<std::size_t> coords;
  std::vector<int> rows = assignment;
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  const auto dim = static_cast<std::size_t>(model.dim());
  for (int r : rows) {
    for (std::size_t c = 0; c < dim; ++c) coords.push_back(static_cast<std::size_t>(r) * dim + c);
  }
  const std::size_t table_offset = static_cast<std::size_t>(model.pool.refs.size());
  for (std::size_t c = 0; c <= kCollapsedCells; ++c) coords.push_back(table_offset + c);

  GradcheckReport report;
  ModelState probe = model;
  std::vector<double> params = nominal;
  for (std::size_t index : coords) {
    params[index] = nominal[index] + options.eps;
    unflatten(params, probe);
    const double up = episode_loss(probe, prepared, assignment, &frozen);
    params[index] = nominal[index] - options.eps;
    unflatten(params, probe);
    const double down = episode_loss(probe, prepared, assignment, &frozen);
    params[index] = nominal[index];

    GradcheckEntry e;
    e.index = index;
    e.name = parameter_name(model, index);
    e.analytic = grad[index];
    e.numeric = (up - down) / (2.0 * options.eps);
    const double denom = std::max({std::abs(e.analytic), std::abs(e.numeric), kGradcheckFloor});
    e.rel_error = std::abs(e.analytic - e.numeric) / denom;
    e.flagged = !(e.rel_error <= options.tol);
    report.flagged += e.flagged ? 1 : 0;
    report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
    report.entries.push_back(std::move(e));
  }
  return report;
}

std::string_view decoder_name(Decoder d) {
  switch (d) {
    case Decoder::kViterbi:
      return "viterbi";
    case Decoder::kGreedy:
      return "greedy";
    case Decoder::kRule:
      return "rule";
  }
  return "viterbi";
}

Decoder parse_decoder(std::string_view name) {
  if (name == "viterbi") return Decoder::kViterbi;
  if (name == "greedy") return Decoder::kGreedy;
  if (name == "rule") return Decoder::kRule;
  throw ConfigError("unknown decoder \"" + std::string(name) + "\" (expected viterbi, greedy or rule)");
}

std::vector<std::vector<int>> decode_episode(const ModelState& model, const PreparedEpisode& prepared,
                                             Decoder decoder) {
  const auto& labels = prepared.episode->label_set;
  const auto assignment = assign_references(model.pool.rows(), labels, AssignMode::kDeterministic);
  const Eigen::MatrixXd transitions = transitions_for(model, labels);
  const BoolMatrix mask = decoder == Decoder::kRule ? rule_mask(labels) : BoolMatrix{};

  std::vector<std::vector<int>> out;
  std::optional<EpisodeBindings> shared;
  for (const auto& query : prepared.queries) {
    if (!prepared.shared_support || !shared) {
      shared = bind_episode(model.config, model.pool, assignment, query.prototypes, prepared.semantics);
    }
    const Eigen::MatrixXd emission = emission_scores(model.config, *shared, query.embedding);
    switch (decoder) {
      case Decoder::kViterbi:
        out.push_back(viterbi(CrfScore{emission, transitions, model.lambda}).labels);
        break;
      case Decoder::kGreedy:
        out.push_back(greedy_decode(emission));
        break;
      case Decoder::kRule:
        out.push_back(constrained_greedy(emission, mask));
        break;
    }
  }
  return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double mean_episode_f1(const ModelState& model, const std::vector<PreparedEpisode>& episodes,
                       Decoder decoder, int threads) {
  if (episodes.empty()) return 0.0;
  std::vector<double> f1(episodes.size());
  parallel_for(episodes.size(), threads, [&](std::size_t e) {
    const auto& prepared = episodes[e];
    const auto& labels = prepared.episode->label_set;
    std::vector<std::vector<std::string>> preds;
    std::vector<std::vector<std::string>> golds;
    for (const auto& ids : decode_episode(model, prepared, decoder)) preds.push_back(labels.decode(ids));
    for (const auto& q : prepared.episode->queries) golds.push_back(q.labels);
    f1[e] = episode_f1(preds, golds).f1;
  });
  double sum = 0.0;
  for (double f : f1) sum += f;
  return sum / static_cast<double>(f1.size());
}

ModelState train(ModelState model, const EpisodeSet& train_set, const EpisodeSet& dev_set,
                 const EmbeddingSource& source, const TrainConfig& config, TrainReport* report,
                 const TrainLogger& logger) {
  if (train_set.episodes.empty()) throw ConfigError("no training episodes");
  if (config.batch_episodes < 1) throw ConfigError("batch size must be positive");
  if (config.max_steps < 0) throw ConfigError("max_steps must be non-negative");
  if (config.eval_every < 1) throw ConfigError("eval_every must be positive");
  if (config.patience < 1) throw ConfigError("patience must be positive");
  if (!(config.learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  check_compatible(model, source);

  const auto started = std::chrono::steady_clock::now();
  TrainReport local;
  TrainReport& rep = report != nullptr ? *report : local;
  rep = TrainReport{};

  std::vector<const Episode*> usable;
  for (const auto& ep : train_set.episodes) {
    if (!ep.queries.empty()) usable.push_back(&ep);
  }
  if (usable.empty()) throw ConfigError("no training episode has queries");
  std::vector<PreparedEpisode> train_prep(usable.size());
  parallel_for(usable.size(), config.threads, [&](std::size_t i) {
    train_prep[i] = prepare_episode(model.config, *usable[i], source);
  });
  std::vector<PreparedEpisode> dev_prep(dev_set.episodes.size());
  parallel_for(dev_set.episodes.size(), config.threads, [&](std::size_t i) {
    dev_prep[i] = prepare_episode(model.config, dev_set.episodes[i], source);
  });
  const Decoder dev_decoder = model.config.uses_transitions() ? Decoder::kViterbi : Decoder::kGreedy;

  Rng rng(derive_seed(config.seed, 0x747261696eULL));
  std::vector<std::size_t> order(train_prep.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  auto next_episode = [&] {
    if (cursor >= order.size()) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
      cursor = 0;
    }
    return order[cursor++];
  };

  std::vector<double> params = flatten(model);
  std::vector<double> m(params.size(), 0.0);
  std::vector<double> v(params.size(), 0.0);
  ModelState best = model;
  double best_f1 = -1.0;
  int since_best = 0;
  int last_eval = -1;

  auto evaluate = [&](int step) {
    last_eval = step;
    if (dev_prep.empty()) return false;
    const double f1 = mean_episode_f1(model, dev_prep, dev_decoder, config.threads);
    rep.dev_history.push_back({step, f1});
    if (f1 > best_f1) {
      best_f1 = f1;
      best = model;
      rep.best_step = step;
      since_best = 0;
    } else {
      ++since_best;
    }
    return since_best >= config.patience;
  };

  bool stop = evaluate(0);
  int step = 0;
  const std::size_t pool_size = static_cast<std::size_t>(model.pool.refs.size());
  while (!stop && step < config.max_steps) {
    ++step;
    const auto batch = static_cast<std::size_t>(config.batch_episodes);
    std::vector<std::size_t> members(batch);
    std::vector<std::vector<int>> assignments(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      members[b] = next_episode();
      assignments[b] = assign_references(model.pool.rows(), train_prep[members[b]].episode->label_set,
                                         AssignMode::kRandom, &rng);
    }
    std::vector<Gradients> grads(batch);
    parallel_for(batch, config.threads, [&](std::size_t b) {
      grads[b] = gradients(model, train_prep[members[b]], assignments[b]);
    });

    std::vector<double> g(params.size(), 0.0);
    double loss = 0.0;
    for (const auto& gb : grads) {
      const auto flat = gb.flat();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += flat[k];
      loss += gb.loss;
    }
    const double inv = 1.0 / static_cast<double>(batch);
    loss *= inv;
    if (!std::isfinite(loss)) {
      throw Error("training diverged at step " + std::to_string(step) + ": loss is " +
                  std::to_string(loss));
    }
    rep.losses.push_back(loss);
    if (logger) logger(step, loss);

    const double c1 = 1.0 - std::pow(config.beta1, step);
    const double c2 = 1.0 - std::pow(config.beta2, step);
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (!model.config.uses_transitions() && k >= pool_size && k < pool_size + kCollapsedCells) continue;
      const double gk = g[k] * inv;
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * gk;
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * gk * gk;
      params[k] -= config.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + config.epsilon);
    }
    unflatten(params, model);
    round_to_float(model);
    params = flatten(model);

    if (step % config.eval_every == 0) stop = evaluate(step);
  }
  if (last_eval != step) evaluate(step);
  rep.stopping_step = step;
  rep.best_dev_f1 = std::max(best_f1, 0.0);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return dev_prep.empty() ? model : best;
}

void check_compatible(const ModelState& model, const EmbeddingSource& source) {
  if (model.dim() != source.dim()) {
    throw DimensionError("model dimension " + std::to_string(model.dim()) +
                         " does not match embedding dimension " + std::to_string(source.dim()));
  }
}

void save_checkpoint(const ModelState& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << config_json(model).dump() << '\n';
  std::string blob;
  auto put = [&](double x) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
    for (int b = 0; b < 4; ++b) blob.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
  };
  for (Eigen::Index r = 0; r < model.pool.refs.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.pool.refs.cols(); ++c) put(model.pool.refs(r, c));
  }
  for (double x : model.table.values()) put(x);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw Error("failed writing " + path.string());
}

ModelState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty checkpoint");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": bad checkpoint header: " + e.what());
  }
  ModelState model;
  std::size_t expected = 0;
  int dim = 0;
  int rows = 0;
  try {
    if (header.at("format").get<std::string>() != "fewshot-checkpoint") {
      throw ParseError(path.string() + ": not a checkpoint");
    }
    const int version = header.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ParseError(path.string() + ": checkpoint version " + std::to_string(version) +
                       " (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    dim = header.at("D").get<int>();
    rows = header.at("N_pool").get<int>();
    if (dim < 1 || rows < 1) throw ParseError(path.string() + ": bad checkpoint shape");
    Ablations ablations;
    for (const auto& name : header.at("ablate")) apply_ablation(ablations, name.get<std::string>());
    std::optional<int> d_proj;
    if (!header.at("d_proj").is_null()) d_proj = header.at("d_proj").get<int>();
    model.config = build_scorer(parse_variant(header.at("variant").get<std::string>()), ablations,
                                header.at("alpha").get<double>(), header.at("beta").get<double>(),
                                d_proj);
    model.lambda = header.at("lambda").get<double>();
    expected = static_cast<std::size_t>(rows) * static_cast<std::size_t>(dim) + kCollapsedCells;
    if (header.at("blob_floats").get<std::size_t>() != expected) {
      throw ParseError(path.string() + ": blob size disagrees with the shape");
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": bad checkpoint header: " + e.what());
  }
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (blob.size() != expected * 4) {
    throw ParseError(path.string() + ": truncated checkpoint (" + std::to_string(blob.size()) +
                     " of " + std::to_string(expected * 4) + " bytes)");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  auto get = [&](std::size_t i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[4 * i + b]) << (8 * b);
    return static_cast<double>(std::bit_cast<float>(bits));
  };
  model.pool.refs.resize(rows, dim);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < dim; ++c) model.pool.refs(r, c) = get(k++);
  }
  for (auto& x : model.table.values()) x = get(k++);
  return model;
}

}  // namespace fewshot
