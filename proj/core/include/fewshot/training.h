#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fewshot/crf.h"
#include "fewshot/embeddings.h"
#include "fewshot/emission.h"
#include "fewshot/episodes.h"
#include "fewshot/transition.h"

namespace fewshot {

// Trainable parameters plus the scorer settings they were trained under.
// Parameter count is pool rows * D + 19 + 1.
struct ModelState {
  ReferencePool pool;
  CollapsedTransitionTable table;
  double lambda = 1.0;
  ScorerConfig config;

  int dim() const { return pool.dim(); }
  std::size_t parameter_count() const;

  friend bool operator==(const ModelState& a, const ModelState& b) {
    return a.pool.refs == b.pool.refs && a.table == b.table && a.lambda == b.lambda &&
           a.config == b.config;
  }
};

// Fresh model: Gaussian references scaled by 1/sqrt(D), zero table,
// lambda = 1. Values are rounded to float precision so checkpoints are exact.
ModelState init_model(const ScorerConfig& config, int pool_rows, int dim, std::uint64_t seed);

// Flat views used by the optimizer and the gradient checker. Layout: pool
// (row-major), the 19 table cells, lambda.
std::vector<double> flatten(const ModelState& model);
void unflatten(const std::vector<double>& params, ModelState& model);
std::string parameter_name(const ModelState& model, std::size_t index);

// Rounds every parameter to the nearest float.
void round_to_float(ModelState& model);

// Parameter-independent inputs for one query sentence.
struct PreparedQuery {
  Eigen::MatrixXd embedding;  // n x D
  Prototypes prototypes;      // from the query-conditioned support vectors
  std::vector<int> gold;
};

// Embedding lookups, prototypes and label-name vectors for an episode,
// computed once and reused across parameter updates.
struct PreparedEpisode {
  const Episode* episode = nullptr;
  std::vector<PreparedQuery> queries;
  Eigen::MatrixXd semantics;  // L x D; zero when the scorer ignores it
  // True when every query sees the same support vectors, so a single
  // projection serves the whole episode.
  bool shared_support = false;

  int num_labels() const { return static_cast<int>(episode->label_set.size()); }
};

PreparedEpisode prepare_episode(const ScorerConfig& config, const Episode& episode,
                                const EmbeddingSource& source);

// One error-nulling projection per query (a single entry when
// shared_support). Empty matrices for unprojected scorers.
std::vector<Eigen::MatrixXd> episode_projections(const ModelState& model,
                                                 const PreparedEpisode& prepared,
                                                 const std::vector<int>& assignment);

// Mean CRF negative log-likelihood over the queries. When `frozen` is given
// those projections are used instead of solving for new ones.
double episode_loss(const ModelState& model, const PreparedEpisode& prepared,
                    const std::vector<int>& assignment,
                    const std::vector<Eigen::MatrixXd>* frozen = nullptr);

// Convenience form: deterministic assignment, fresh preparation.
double episode_loss(const ModelState& model, const Episode& episode,
                    const EmbeddingSource& source);

struct Gradients {
  double loss = 0.0;
  Eigen::MatrixXd pool;  // same shape as the reference pool
  std::array<double, kCollapsedCells> table{};
  double lambda = 0.0;

  std::vector<double> flat() const;
};

// Exact gradient of episode_loss with the projections held constant.
Gradients gradients(const ModelState& model, const PreparedEpisode& prepared,
                    const std::vector<int>& assignment);

struct GradcheckEntry {
  std::size_t index = 0;
  std::string name;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
  bool flagged = false;
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  std::size_t flagged = 0;
  double max_rel_error = 0.0;
};

// Denominator floor of the relative error used by gradcheck.
inline constexpr double kGradcheckFloor = 1e-6;

struct GradcheckOptions {
  double eps = 1e-3;
  double tol = 1e-3;
  // Multiplies the analytic lambda gradient; anything but 1 is a fault.
  double lambda_fault = 1.0;
};

// Central differences over every table cell, lambda and each pool row bound
// by the assignment, with the projections frozen at the nominal parameters.
// rel_error = |a - n| / max(|a|, |n|, kGradcheckFloor). Throws ConfigError
// when eps <= 0.
GradcheckReport gradcheck(const ModelState& model, const PreparedEpisode& prepared,
                          const std::vector<int>& assignment, const GradcheckOptions& options);

enum class Decoder { kViterbi, kGreedy, kRule };

std::string_view decoder_name(Decoder d);
Decoder parse_decoder(std::string_view name);

// Label ids for every query of the episode (deterministic assignment).
std::vector<std::vector<int>> decode_episode(const ModelState& model,
                                             const PreparedEpisode& prepared, Decoder decoder);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_episodes = 4;
  int patience = 3;
  int max_steps = 2000;
  int eval_every = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  // Adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainReport {
  std::vector<double> losses;  // one per step, batch mean
  struct DevPoint {
    int step = 0;
    double f1 = 0.0;
  };
  std::vector<DevPoint> dev_history;
  int stopping_step = 0;
  int best_step = 0;
  double best_dev_f1 = 0.0;
  double wall_seconds = 0.0;
};

// Progress callback: (step, batch loss). Optional.
using TrainLogger = std::function<void(int, double)>;

// Adam over shuffled batches of episodes, periodic dev evaluation by mean
// episode F1, restores the best dev parameters and stops after `patience`
// evaluations without improvement or at max_steps. Throws Error if the loss
// becomes non-finite.
ModelState train(ModelState model, const EpisodeSet& train_set, const EpisodeSet& dev_set,
                 const EmbeddingSource& source, const TrainConfig& config, TrainReport* report,
                 const TrainLogger& logger = {});

// Mean episode F1 (percent) over a set of prepared episodes.
double mean_episode_f1(const ModelState& model, const std::vector<PreparedEpisode>& episodes,
                       Decoder decoder, int threads = 1);

// Header line {format, version, D, N_pool, variant, alpha, beta, lambda, ...}
// then a little-endian f32 blob holding the pool and the 19 table cells.
inline constexpr int kCheckpointVersion = 1;
void save_checkpoint(const ModelState& model, const std::filesystem::path& path);
ModelState load_checkpoint(const std::filesystem::path& path);

// Throws DimensionError when the embedding source width differs from D.
void check_compatible(const ModelState& model, const EmbeddingSource& source);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split into
// contiguous blocks; results must be written to per-index slots.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace fewshot
