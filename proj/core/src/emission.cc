#include "fewshot/emission.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

#include "fewshot/error.h"

namespace fewshot {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kWpz:
      return "wpz";
    case Variant::kLWpz:
      return "l-wpz";
    case Variant::kTapNet:
      return "tapnet";
    case Variant::kLTapNet:
      return "l-tapnet";
  }
  return "l-tapnet";
}

Variant parse_variant(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "wpz") return Variant::kWpz;
  if (lower == "l-wpz" || lower == "lwpz") return Variant::kLWpz;
  if (lower == "tapnet") return Variant::kTapNet;
  if (lower == "l-tapnet" || lower == "ltapnet") return Variant::kLTapNet;
  throw ConfigError("unknown variant \"" + std::string(name) +
                    "\" (expected wpz, l-wpz, tapnet or l-tapnet)");
}

std::vector<std::string> ablation_names(const Ablations& a) {
  std::vector<std::string> out;
  if (a.pairwise) out.emplace_back("pairwise");
  if (a.label_semantic) out.emplace_back("label-semantic");
  if (a.prototype) out.emplace_back("prototype");
  if (a.cdt) out.emplace_back("cdt");
  return out;
}

void apply_ablation(Ablations& a, std::string_view name) {
  if (name == "pairwise") {
    a.pairwise = true;
  } else if (name == "label-semantic") {
    a.label_semantic = true;
  } else if (name == "prototype") {
    a.prototype = true;
  } else if (name == "cdt") {
    a.cdt = true;
  } else {
    throw ConfigError("unknown ablation \"" + std::string(name) +
                      "\" (expected pairwise, label-semantic, prototype or cdt)");
  }
}

ScorerConfig build_scorer(Variant variant, const Ablations& ablations, std::optional<double> alpha,
                          std::optional<double> beta, std::optional<int> projection_dim) {
  auto in_unit = [](std::optional<double> x, const char* name) {
    if (x && !(*x >= 0.0 && *x <= 1.0)) {
      throw ConfigError(std::string(name) + " must lie in [0, 1]");
    }
  };
  in_unit(alpha, "alpha");
  in_unit(beta, "beta");
  if (projection_dim && *projection_dim < 1) throw ConfigError("projection dimension must be >= 1");

  ScorerConfig cfg;
  cfg.variant = variant;
  cfg.ablations = ablations;
  const bool projected = variant == Variant::kTapNet || variant == Variant::kLTapNet;
  const bool label_enhanced = variant == Variant::kLWpz || variant == Variant::kLTapNet;
  cfg.similarity = projected ? Similarity::kProjectedDot : Similarity::kNegSquaredDistance;
  if (!projected && projection_dim) {
    throw ConfigError(std::string(variant_name(variant)) + " does not use a projection");
  }
  cfg.projection_dim = projection_dim;

  switch (variant) {
    case Variant::kWpz:
      cfg.alpha = 0.0;
      cfg.beta = 0.0;
      break;
    case Variant::kLWpz:
      cfg.alpha = 1.0;
      cfg.beta = 0.5;
      break;
    case Variant::kTapNet:
      cfg.alpha = 0.0;
      cfg.beta = 1.0;
      break;
    case Variant::kLTapNet:
      cfg.alpha = 0.5;
      cfg.beta = 0.7;
      break;
  }

  if (!label_enhanced) {
    if (ablations.label_semantic || ablations.prototype) {
      throw ConfigError(std::string(variant_name(variant)) +
                        " has no label-semantic or prototype component to ablate");
    }
    if (alpha && *alpha != cfg.alpha) {
      throw ConfigError(std::string(variant_name(variant)) + " does not use label semantics");
    }
    if (beta && *beta != cfg.beta) {
      throw ConfigError(std::string(variant_name(variant)) + " has a fixed label representation");
    }
    return cfg;
  }

  if (alpha) cfg.alpha = *alpha;
  if (beta) cfg.beta = *beta;
  if (ablations.label_semantic) {
    if (alpha && *alpha != 0.0) throw ConfigError("label-semantic ablation conflicts with alpha");
    cfg.alpha = 0.0;
  }
  if (ablations.prototype) {
    if (beta && *beta != 1.0) throw ConfigError("prototype ablation conflicts with beta");
    cfg.beta = 1.0;
  }
  return cfg;
}

ReferencePool init_reference_pool(int rows, int dim, Rng& rng) {
  if (rows < 1 || dim < 1) throw ConfigError("reference pool needs positive shape");
  ReferencePool pool;
  pool.refs.resize(rows, dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < dim; ++c) pool.refs(r, c) = scale * standard_normal(rng);
  }
  return pool;
}

std::vector<int> assign_references(int pool_rows, const LabelSet& labels, AssignMode mode,
                                   Rng* rng) {
  const int num_labels = static_cast<int>(labels.size());
  if (pool_rows < num_labels) {
    throw ConfigError("reference pool has " + std::to_string(pool_rows) + " rows but " +
                      std::to_string(num_labels) + " labels need references");
  }
  std::vector<int> rows(static_cast<std::size_t>(pool_rows));
  std::iota(rows.begin(), rows.end(), 0);
  if (mode == AssignMode::kRandom) {
    if (rng == nullptr) throw ConfigError("random reference assignment needs a generator");
    for (int i = 0; i < num_labels; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(i) + uniform_index(*rng, static_cast<std::size_t>(pool_rows - i));
      std::swap(rows[static_cast<std::size_t>(i)], rows[j]);
    }
  }
  rows.resize(static_cast<std::size_t>(num_labels));
  return rows;
}

int Prototypes::count_present() const {
  return static_cast<int>(std::count(present.begin(), present.end(), true));
}

Prototypes compute_prototypes(const std::vector<Eigen::MatrixXd>& support_embeddings,
                              const std::vector<std::vector<int>>& support_labels,
                              int num_labels) {
  if (support_embeddings.size() != support_labels.size()) {
    throw DimensionError("support embeddings and labels disagree in sentence count");
  }
  Eigen::Index dim = 0;
  for (const auto& m : support_embeddings) {
    if (m.rows() == 0) continue;
    if (dim != 0 && m.cols() != dim) throw DimensionError("inconsistent support embedding width");
    dim = m.cols();
  }
  Prototypes out;
  out.means = Eigen::MatrixXd::Zero(num_labels, dim);
  std::vector<int> counts(static_cast<std::size_t>(num_labels), 0);
  for (std::size_t s = 0; s < support_embeddings.size(); ++s) {
    const auto& labels = support_labels[s];
    if (static_cast<Eigen::Index>(labels.size()) != support_embeddings[s].rows()) {
      throw DimensionError("support sentence " + std::to_string(s) + " has " +
                           std::to_string(labels.size()) + " labels for " +
                           std::to_string(support_embeddings[s].rows()) + " vectors");
    }
    for (std::size_t t = 0; t < labels.size(); ++t) {
      out.means.row(labels[t]) += support_embeddings[s].row(static_cast<Eigen::Index>(t));
      ++counts[static_cast<std::size_t>(labels[t])];
    }
  }
  out.present.resize(static_cast<std::size_t>(num_labels));
  for (int j = 0; j < num_labels; ++j) {
    const int count = counts[static_cast<std::size_t>(j)];
    out.present[static_cast<std::size_t>(j)] = count > 0;
    if (count > 0) out.means.row(j) /= static_cast<double>(count);
  }
  return out;
}

Eigen::MatrixXd enhanced_references(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& semantics,
                                    double alpha) {
  if (alpha == 0.0) return phi;
  if (phi.rows() != semantics.rows() || phi.cols() != semantics.cols()) {
    throw DimensionError("references and label semantics differ in shape");
  }
  if (alpha == 1.0) return semantics;
  return (1.0 - alpha) * phi + alpha * semantics;
}

Eigen::MatrixXd label_representations(const Prototypes& prototypes, const Eigen::MatrixXd& psi,
                                      double beta) {
  Eigen::MatrixXd omega = psi;
  for (Eigen::Index j = 0; j < psi.rows(); ++j) {
    if (prototypes.present[static_cast<std::size_t>(j)] && beta != 1.0) {
      omega.row(j) = (1.0 - beta) * prototypes.means.row(j) + beta * psi.row(j);
    }
  }
  return omega;
}

Eigen::MatrixXd alignment_errors(const Eigen::MatrixXd& psi, const Prototypes& prototypes) {
  if (psi.rows() != prototypes.means.rows() || psi.cols() != prototypes.means.cols()) {
    throw DimensionError("references and prototypes differ in shape");
  }
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < psi.rows(); ++j) {
    if (prototypes.present[static_cast<std::size_t>(j)]) live.push_back(j);
  }
  const auto count = static_cast<Eigen::Index>(live.size());
  if (count < 2) {
    throw DegenerateGeometryError("error nulling needs at least two labels with prototypes");
  }
  Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(psi.cols());
  for (auto j : live) total += psi.row(j);

  Eigen::MatrixXd errors(count, psi.cols());
  for (Eigen::Index k = 0; k < count; ++k) {
    const auto j = live[static_cast<std::size_t>(k)];
    const Eigen::RowVectorXd centered =
        psi.row(j) - (total - psi.row(j)) / static_cast<double>(count - 1);
    const double ref_norm = centered.norm();
    const double proto_norm = prototypes.means.row(j).norm();
    if (ref_norm < 1e-12 || proto_norm < 1e-12) {
      throw DegenerateGeometryError("zero-length reference or prototype for label " +
                                    std::to_string(j));
    }
    errors.row(k) = centered / ref_norm - prototypes.means.row(j) / proto_norm;
  }
  return errors;
}

Eigen::MatrixXd error_nulling_projection(const Eigen::MatrixXd& psi, const Prototypes& prototypes,
                                         std::optional<int> projection_dim) {
  const Eigen::MatrixXd errors = alignment_errors(psi, prototypes);
  const auto dim = errors.cols();
  const auto live = errors.rows();
  if (dim <= live) {
    throw DegenerateGeometryError("embedding dimension " + std::to_string(dim) +
                                  " must exceed the " + std::to_string(live) +
                                  " labels with prototypes");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(errors, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? 1e-9 * sv[0] : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff && sv[i] > 0.0) ++rank;
  }
  const Eigen::Index complement = dim - rank;
  const Eigen::Index width = projection_dim ? *projection_dim : dim - live;
  if (width > complement) {
    throw DimensionError("projection dimension " + std::to_string(width) +
                         " exceeds the null-space dimension " + std::to_string(complement));
  }
  return svd.matrixV().block(0, rank, dim, width);
}

Eigen::MatrixXd similarities(const Eigen::MatrixXd& query, const Eigen::MatrixXd& omega,
                             const Eigen::MatrixXd& projection, Similarity similarity) {
  if (query.cols() != omega.cols()) throw DimensionError("query and label widths differ");
  if (similarity == Similarity::kProjectedDot) {
    if (projection.rows() != query.cols()) throw DimensionError("projection height mismatch");
    const Eigen::MatrixXd q = query * projection;
    const Eigen::MatrixXd o = omega * projection;
    return q * o.transpose();
  }
  Eigen::MatrixXd out(query.rows(), omega.rows());
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    for (Eigen::Index j = 0; j < omega.rows(); ++j) {
      out(i, j) = -(query.row(i) - omega.row(j)).squaredNorm();
    }
  }
  return out;
}

Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& scores) {
  Eigen::MatrixXd out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double m = scores.row(i).maxCoeff();
    const double lse = m + std::log((scores.row(i).array() - m).exp().sum());
    out.row(i) = scores.row(i).array() - lse;
  }
  return out;
}

Eigen::MatrixXd emission_scores(const Eigen::MatrixXd& query, const Eigen::MatrixXd& projection,
                                const Eigen::MatrixXd& omega, Similarity similarity) {
  return log_softmax_rows(similarities(query, omega, projection, similarity));
}

Eigen::MatrixXd emission_backward(const Eigen::MatrixXd& query, const Eigen::MatrixXd& projection,
                                  const Eigen::MatrixXd& omega, Similarity similarity,
                                  const Eigen::MatrixXd& log_probs,
                                  const Eigen::MatrixXd& grad_log_probs) {
  // d logp_ij / d sim_ik = [j == k] - p_ik
  const Eigen::MatrixXd probs = log_probs.array().exp();
  const Eigen::VectorXd row_sums = grad_log_probs.rowwise().sum();
  const Eigen::MatrixXd grad_sim = grad_log_probs - probs.cwiseProduct(row_sums.replicate(1, probs.cols()));

  if (similarity == Similarity::kProjectedDot) {
    const Eigen::MatrixXd q = query * projection;
    return (grad_sim.transpose() * q) * projection.transpose();
  }
  Eigen::MatrixXd grad_omega = Eigen::MatrixXd::Zero(omega.rows(), omega.cols());
  for (Eigen::Index j = 0; j < omega.rows(); ++j) {
    for (Eigen::Index i = 0; i < query.rows(); ++i) {
      grad_omega.row(j) += 2.0 * grad_sim(i, j) * (query.row(i) - omega.row(j));
    }
  }
  return grad_omega;
}

EpisodeBindings bind_episode(const ScorerConfig& config, const ReferencePool& pool,
                             const std::vector<int>& assignment, Prototypes prototypes,
                             const Eigen::MatrixXd& semantics,
                             const Eigen::MatrixXd* frozen_projection) {
  const auto num_labels = static_cast<Eigen::Index>(assignment.size());
  if (prototypes.means.rows() != num_labels) throw DimensionError("prototype count mismatch");
  if (prototypes.means.cols() != pool.refs.cols()) {
    throw DimensionError("embedding dimension " + std::to_string(prototypes.means.cols()) +
                         " does not match reference dimension " + std::to_string(pool.dim()));
  }
  EpisodeBindings b;
  b.assignment = assignment;
  b.prototypes = std::move(prototypes);
  Eigen::MatrixXd phi(num_labels, pool.refs.cols());
  for (Eigen::Index j = 0; j < num_labels; ++j) {
    phi.row(j) = pool.refs.row(assignment[static_cast<std::size_t>(j)]);
  }
  b.semantics = config.uses_semantics() ? semantics
                                        : Eigen::MatrixXd::Zero(num_labels, pool.refs.cols());
  b.psi = enhanced_references(phi, b.semantics, config.alpha);
  b.omega = label_representations(b.prototypes, b.psi, config.beta);
  if (config.similarity == Similarity::kProjectedDot) {
    b.projection = frozen_projection != nullptr
                       ? *frozen_projection
                       : error_nulling_projection(b.psi, b.prototypes, config.projection_dim);
  }
  return b;
}

Eigen::MatrixXd emission_scores(const ScorerConfig& config, const EpisodeBindings& bindings,
                                const Eigen::MatrixXd& query) {
  return emission_scores(query, bindings.projection, bindings.omega, config.similarity);
}

}  // namespace fewshot
