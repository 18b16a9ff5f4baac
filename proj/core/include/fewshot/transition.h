#pragma once

#include <array>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "fewshot/corpus.h"

namespace fewshot {

// Log-space stand-in for -infinity. Anything at or below kImpossibleCutoff
// is treated as a forbidden transition.
inline constexpr double kImpossible = -1e30;
inline constexpr double kImpossibleCutoff = -1e29;

// Rows of the collapsed table: the abstract form of the previous state.
enum class FromTag { kStart, kO, kB, kI };
// Columns: the next state relative to the previous one. kSameB / kSameI
// double as "any B" / "any I" when coming from START or O.
enum class ToTag { kO, kSameB, kDiffB, kSameI, kDiffI, kEnd };

inline constexpr int kCollapsedCells = 19;

// Live cell id in [0, 19) or -1 when the cell carries no parameter.
int cell_id(FromTag from, ToTag to);
std::string_view cell_name(int cell);

// Expanded transition matrices are indexed by state: BIO label ids first,
// then START (= L) and END (= L + 1).
inline int start_state(int num_labels) { return num_labels; }
inline int end_state(int num_labels) { return num_labels + 1; }

// Maps a structurally possible (prev, next) state pair to its collapsed
// cell; throws Error for anything->START, END->anything and START->END.
int collapsed_index(const LabelSet& labels, int prev, int next);

// The 19 learnable abstract-label transition scores.
class CollapsedTransitionTable {
 public:
  CollapsedTransitionTable() { values_.fill(0.0); }
  explicit CollapsedTransitionTable(const std::array<double, kCollapsedCells>& values)
      : values_(values) {}

  double operator[](int cell) const { return values_.at(static_cast<std::size_t>(cell)); }
  double& operator[](int cell) { return values_.at(static_cast<std::size_t>(cell)); }
  double at(FromTag from, ToTag to) const;

  const std::array<double, kCollapsedCells>& values() const { return values_; }
  std::array<double, kCollapsedCells>& values() { return values_; }

  friend bool operator==(const CollapsedTransitionTable&,
                         const CollapsedTransitionTable&) = default;

 private:
  std::array<double, kCollapsedCells> values_;
};

// (L+2) x (L+2) matrix of collapsed cell ids, -1 where impossible.
Eigen::MatrixXi tied_cells(const LabelSet& labels);

// Fills the specific transition matrix from the collapsed table; impossible
// cells hold kImpossible.
Eigen::MatrixXd expand_transitions(const CollapsedTransitionTable& table, const LabelSet& labels);

// All possible cells 0, impossible cells kImpossible.
Eigen::MatrixXd zero_transitions(const LabelSet& labels);

// BIO legality over the same (L+2) x (L+2) layout: I-x must follow B-x or
// I-x, so START -> I-* is illegal. Structurally impossible cells are false.
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
BoolMatrix rule_mask(const LabelSet& labels);

}  // namespace fewshot
