#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fewshot/corpus.h"
#include "fewshot/rng.h"

namespace fewshot {

// Emission scorer family.
//   kWpz:     prototypes only, negative squared distance, no projection
//   kLWpz:    prototypes mixed with label-name vectors, no projection
//   kTapNet:  references only, projected dot product
//   kLTapNet: label-enhanced references mixed with prototypes, projected
enum class Variant { kWpz, kLWpz, kTapNet, kLTapNet };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);  // throws ConfigError

enum class Similarity { kProjectedDot, kNegSquaredDistance };

// Components that can be switched off, one per ablation row.
struct Ablations {
  bool pairwise = false;
  bool label_semantic = false;
  bool prototype = false;
  bool cdt = false;

  friend bool operator==(const Ablations&, const Ablations&) = default;
};

std::vector<std::string> ablation_names(const Ablations& a);
void apply_ablation(Ablations& a, std::string_view name);  // throws ConfigError

// Resolved scorer settings.
struct ScorerConfig {
  Variant variant = Variant::kLTapNet;
  Ablations ablations;
  double alpha = 0.5;  // weight of the label-name vector in psi
  double beta = 0.7;   // weight of psi in omega
  Similarity similarity = Similarity::kProjectedDot;
  std::optional<int> projection_dim;

  bool uses_semantics() const { return alpha > 0.0; }
  bool uses_transitions() const { return !ablations.cdt; }
  bool pairwise() const { return !ablations.pairwise; }

  friend bool operator==(const ScorerConfig&, const ScorerConfig&) = default;
};

// Resolves variant defaults, ablations and explicit overrides. Overrides that
// contradict the variant (e.g. alpha for TapNet, a projection size for the
// unprojected scorers) raise ConfigError.
ScorerConfig build_scorer(Variant variant, const Ablations& ablations = {},
                          std::optional<double> alpha = std::nullopt,
                          std::optional<double> beta = std::nullopt,
                          std::optional<int> projection_dim = std::nullopt);

// Learnable per-label anchors shared across domains (rows are references).
struct ReferencePool {
  Eigen::MatrixXd refs;

  int rows() const { return static_cast<int>(refs.rows()); }
  int dim() const { return static_cast<int>(refs.cols()); }
};

ReferencePool init_reference_pool(int rows, int dim, Rng& rng);

enum class AssignMode { kRandom, kDeterministic };

// Injective label id -> pool row map. Deterministic mode sends label i to
// row i; random mode draws distinct rows uniformly.
std::vector<int> assign_references(int pool_rows, const LabelSet& labels, AssignMode mode,
                                   Rng* rng = nullptr);

struct Prototypes {
  Eigen::MatrixXd means;      // L x D; absent rows are zero
  std::vector<bool> present;  // label has at least one support token

  int count_present() const;
};

Prototypes compute_prototypes(const std::vector<Eigen::MatrixXd>& support_embeddings,
                              const std::vector<std::vector<int>>& support_labels,
                              int num_labels);

// psi = (1 - alpha) * phi + alpha * s, row-wise.
Eigen::MatrixXd enhanced_references(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& semantics,
                                    double alpha);

// omega = (1 - beta) * c + beta * psi; rows with no prototype take psi.
Eigen::MatrixXd label_representations(const Prototypes& prototypes, const Eigen::MatrixXd& psi,
                                      double beta);

// Linear error nulling. Over the present labels k (L' of them):
//   mean-subtracted reference  r_k = psi_k - sum_{l != k} psi_l / (L' - 1)
//   alignment error            e_k = r_k / |r_k| - c_k / |c_k|
// The result is a D x d matrix whose orthonormal columns span (part of) the
// orthogonal complement of span{e_k}, taken from the SVD of the stacked
// errors. Singular values below 1e-9 * max are treated as zero. d defaults
// to D - L'.
Eigen::MatrixXd error_nulling_projection(const Eigen::MatrixXd& psi, const Prototypes& prototypes,
                                         std::optional<int> projection_dim = std::nullopt);

// The alignment errors used above, exposed for tests (L' x D, present rows
// in label order).
Eigen::MatrixXd alignment_errors(const Eigen::MatrixXd& psi, const Prototypes& prototypes);

// Similarities between query tokens (rows of `query`) and label
// representations. `projection` is ignored for kNegSquaredDistance.
Eigen::MatrixXd similarities(const Eigen::MatrixXd& query, const Eigen::MatrixXd& omega,
                             const Eigen::MatrixXd& projection, Similarity similarity);

// Row-wise log-softmax.
Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& scores);

// n x L log-probabilities.
Eigen::MatrixXd emission_scores(const Eigen::MatrixXd& query, const Eigen::MatrixXd& projection,
                                const Eigen::MatrixXd& omega, Similarity similarity);

// Back-propagates d loss / d log-probs to d loss / d omega with the
// projection held constant.
Eigen::MatrixXd emission_backward(const Eigen::MatrixXd& query, const Eigen::MatrixXd& projection,
                                  const Eigen::MatrixXd& omega, Similarity similarity,
                                  const Eigen::MatrixXd& log_probs,
                                  const Eigen::MatrixXd& grad_log_probs);

// Everything the scorer derives from one support set.
struct EpisodeBindings {
  std::vector<int> assignment;
  Prototypes prototypes;
  Eigen::MatrixXd semantics;   // L x D (zero when unused)
  Eigen::MatrixXd psi;         // L x D
  Eigen::MatrixXd omega;       // L x D
  Eigen::MatrixXd projection;  // D x d; empty for unprojected scorers
};

// `frozen_projection`, when given, replaces the error-nulling solve.
EpisodeBindings bind_episode(const ScorerConfig& config, const ReferencePool& pool,
                             const std::vector<int>& assignment, Prototypes prototypes,
                             const Eigen::MatrixXd& semantics,
                             const Eigen::MatrixXd* frozen_projection = nullptr);

Eigen::MatrixXd emission_scores(const ScorerConfig& config, const EpisodeBindings& bindings,
                                const Eigen::MatrixXd& query);

}  // namespace fewshot
