#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "fewshot/transition.h"

namespace fewshot {

// Everything the linear-chain CRF needs for one sentence.
//   emission:   n x L log-probabilities
//   transition: (L+2) x (L+2) scores in the state layout of transition.h
//   score(y) = sum_i T[y_{i-1}, y_i] + T[y_n, END] + lambda * sum_i E[i, y_i]
// with y_0 = START.
struct CrfScore {
  Eigen::MatrixXd emission;
  Eigen::MatrixXd transition;
  double lambda = 1.0;

  int length() const { return static_cast<int>(emission.rows()); }
  int num_labels() const { return static_cast<int>(emission.cols()); }
};

double logsumexp(std::span<const double> values);

double sequence_score(const CrfScore& score, std::span<const int> labels);
double log_partition(const CrfScore& score);
// log Z - score(gold); never negative.
double nll_loss(const CrfScore& score, std::span<const int> gold);

struct Decoded {
  std::vector<int> labels;
  double score = 0.0;
};

// Ties resolve to the smallest label id at every backtrack step.
Decoded viterbi(const CrfScore& score);

// Per-token argmax; ties resolve to the smallest id.
std::vector<int> greedy_decode(const Eigen::MatrixXd& emission);

// Left-to-right argmax restricted to labels the mask allows after the
// previous choice. Falls back to O (id 0) when nothing is legal.
std::vector<int> constrained_greedy(const Eigen::MatrixXd& emission, const BoolMatrix& mask);

// Posterior quantities from the forward-backward pass.
struct Marginals {
  double log_z = 0.0;
  Eigen::MatrixXd node;         // n x L, p(y_i = j)
  Eigen::MatrixXd transitions;  // (L+2) x (L+2) expected transition counts
};

Marginals forward_backward(const CrfScore& score);

// Observed transition counts of a label sequence in the (L+2)^2 layout.
Eigen::MatrixXd transition_counts(std::span<const int> labels, int num_labels);

}  // namespace fewshot
