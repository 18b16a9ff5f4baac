#include "fewshot/crf.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fewshot/error.h"

namespace fewshot {
namespace {

void check_shapes(const CrfScore& score) {
  const auto num_labels = score.emission.cols();
  if (score.emission.rows() < 1) throw DimensionError("CRF needs at least one token");
  if (score.transition.rows() != num_labels + 2 || score.transition.cols() != num_labels + 2) {
    throw DimensionError("transition matrix must be (L+2)x(L+2) for L = " +
                         std::to_string(num_labels));
  }
}

void check_labels(const CrfScore& score, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != score.emission.rows()) {
    throw DimensionError("label sequence length " + std::to_string(labels.size()) +
                         " does not match " + std::to_string(score.emission.rows()) + " tokens");
  }
  for (int y : labels) {
    if (y < 0 || y >= score.num_labels()) {
      throw Error("label id " + std::to_string(y) + " outside the label set");
    }
  }
}

}  // namespace

double logsumexp(std::span<const double> values) {
  if (values.empty()) return kImpossible;
  const double m = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

double sequence_score(const CrfScore& score, std::span<const int> labels) {
  check_shapes(score);
  check_labels(score, labels);
  const int num_labels = score.num_labels();
  const auto& t = score.transition;
  double trans = t(start_state(num_labels), labels[0]);
  double emit = score.emission(0, labels[0]);
  for (std::size_t i = 1; i < labels.size(); ++i) {
    trans += t(labels[i - 1], labels[i]);
    emit += score.emission(static_cast<Eigen::Index>(i), labels[i]);
  }
  trans += t(labels.back(), end_state(num_labels));
  return trans + score.lambda * emit;
}

namespace {

// Fills alpha (n x L) and returns log Z.
double forward(const CrfScore& score, const Eigen::MatrixXd& emit, Eigen::MatrixXd& alpha) {
  const int n = score.length();
  const int num_labels = score.num_labels();
  const auto& t = score.transition;
  alpha.resize(n, num_labels);
  std::vector<double> terms(static_cast<std::size_t>(num_labels));
  for (int j = 0; j < num_labels; ++j) alpha(0, j) = t(start_state(num_labels), j) + emit(0, j);
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < num_labels; ++j) {
      for (int k = 0; k < num_labels; ++k) terms[k] = alpha(i - 1, k) + t(k, j);
      alpha(i, j) = logsumexp(terms) + emit(i, j);
    }
  }
  for (int j = 0; j < num_labels; ++j) terms[j] = alpha(n - 1, j) + t(j, end_state(num_labels));
  return logsumexp(terms);
}

}  // namespace

double log_partition(const CrfScore& score) {
  check_shapes(score);
  Eigen::MatrixXd alpha;
  return forward(score, score.lambda * score.emission, alpha);
}

double nll_loss(const CrfScore& score, std::span<const int> gold) {
  const double gold_score = sequence_score(score, gold);
  return std::max(0.0, log_partition(score) - gold_score);
}

Marginals forward_backward(const CrfScore& score) {
  check_shapes(score);
  const int n = score.length();
  const int num_labels = score.num_labels();
  const int start = start_state(num_labels);
  const int end = end_state(num_labels);
  const auto& t = score.transition;
  const Eigen::MatrixXd emit = score.lambda * score.emission;

  Eigen::MatrixXd alpha;
  Eigen::MatrixXd beta(n, num_labels);
  std::vector<double> terms(static_cast<std::size_t>(num_labels));
  Marginals out;
  out.log_z = forward(score, emit, alpha);

  for (int j = 0; j < num_labels; ++j) beta(n - 1, j) = t(j, end);
  for (int i = n - 2; i >= 0; --i) {
    for (int k = 0; k < num_labels; ++k) {
      for (int j = 0; j < num_labels; ++j) terms[j] = t(k, j) + emit(i + 1, j) + beta(i + 1, j);
      beta(i, k) = logsumexp(terms);
    }
  }

  out.node.resize(n, num_labels);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < num_labels; ++j) out.node(i, j) = std::exp(alpha(i, j) + beta(i, j) - out.log_z);
  }
  out.transitions = Eigen::MatrixXd::Zero(num_labels + 2, num_labels + 2);
  for (int j = 0; j < num_labels; ++j) {
    out.transitions(start, j) = out.node(0, j);
    out.transitions(j, end) = out.node(n - 1, j);
  }
  for (int i = 1; i < n; ++i) {
    for (int k = 0; k < num_labels; ++k) {
      for (int j = 0; j < num_labels; ++j) {
        out.transitions(k, j) +=
            std::exp(alpha(i - 1, k) + t(k, j) + emit(i, j) + beta(i, j) - out.log_z);
      }
    }
  }
  return out;
}

Decoded viterbi(const CrfScore& score) {
  check_shapes(score);
  const int n = score.length();
  const int num_labels = score.num_labels();
  const int start = start_state(num_labels);
  const int end = end_state(num_labels);
  const auto& t = score.transition;

  Eigen::MatrixXd delta(n, num_labels);
  Eigen::MatrixXi back = Eigen::MatrixXi::Zero(n, num_labels);
  for (int j = 0; j < num_labels; ++j) {
    delta(0, j) = t(start, j) <= kImpossibleCutoff ? kImpossible
                                                    : t(start, j) + score.lambda * score.emission(0, j);
  }
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < num_labels; ++j) {
      double best = kImpossible;
      int arg = 0;
      bool found = false;
      for (int k = 0; k < num_labels; ++k) {
        if (t(k, j) <= kImpossibleCutoff || delta(i - 1, k) <= kImpossibleCutoff) continue;
        const double v = delta(i - 1, k) + t(k, j);
        if (!found || v > best) {
          best = v;
          arg = k;
          found = true;
        }
      }
      delta(i, j) = found ? best + score.lambda * score.emission(i, j) : kImpossible;
      back(i, j) = arg;
    }
  }
  double best = kImpossible;
  int last = 0;
  bool found = false;
  for (int j = 0; j < num_labels; ++j) {
    if (t(j, end) <= kImpossibleCutoff || delta(n - 1, j) <= kImpossibleCutoff) continue;
    const double v = delta(n - 1, j) + t(j, end);
    if (!found || v > best) {
      best = v;
      last = j;
      found = true;
    }
  }
  Decoded out;
  out.labels.assign(static_cast<std::size_t>(n), 0);
  out.labels[static_cast<std::size_t>(n - 1)] = last;
  for (int i = n - 1; i > 0; --i) {
    out.labels[static_cast<std::size_t>(i - 1)] = back(i, out.labels[static_cast<std::size_t>(i)]);
  }
  out.score = found ? best : kImpossible;
  return out;
}

std::vector<int> greedy_decode(const Eigen::MatrixXd& emission) {
  std::vector<int> out(static_cast<std::size_t>(emission.rows()), 0);
  for (Eigen::Index i = 0; i < emission.rows(); ++i) {
    int arg = 0;
    for (Eigen::Index j = 1; j < emission.cols(); ++j) {
      if (emission(i, j) > emission(i, arg)) arg = static_cast<int>(j);
    }
    out[static_cast<std::size_t>(i)] = arg;
  }
  return out;
}

std::vector<int> constrained_greedy(const Eigen::MatrixXd& emission, const BoolMatrix& mask) {
  const int num_labels = static_cast<int>(emission.cols());
  if (mask.rows() != num_labels + 2 || mask.cols() != num_labels + 2) {
    throw DimensionError("legality mask must be (L+2)x(L+2)");
  }
  std::vector<int> out(static_cast<std::size_t>(emission.rows()), 0);
  int prev = start_state(num_labels);
  for (Eigen::Index i = 0; i < emission.rows(); ++i) {
    int arg = -1;
    for (int j = 0; j < num_labels; ++j) {
      if (!mask(prev, j)) continue;
      if (arg < 0 || emission(i, j) > emission(i, arg)) arg = j;
    }
    if (arg < 0) arg = 0;
    out[static_cast<std::size_t>(i)] = arg;
    prev = arg;
  }
  return out;
}

Eigen::MatrixXd transition_counts(std::span<const int> labels, int num_labels) {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(num_labels + 2, num_labels + 2);
  if (labels.empty()) return counts;
  counts(start_state(num_labels), labels[0]) += 1.0;
  for (std::size_t i = 1; i < labels.size(); ++i) counts(labels[i - 1], labels[i]) += 1.0;
  counts(labels.back(), end_state(num_labels)) += 1.0;
  return counts;
}

}  // namespace fewshot
