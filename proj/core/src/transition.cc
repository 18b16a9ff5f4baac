#include "fewshot/transition.h"

#include "fewshot/error.h"

namespace fewshot {
namespace {

// Live cells in row-major order over (FromTag, ToTag); -1 = no parameter.
constexpr std::array<std::array<int, 6>, 4> kCellIds = {{
    //  O   sB  dB  sI  dI  END
    {0, 1, -1, 2, -1, -1},   // START
    {3, 4, -1, 5, -1, 6},    // O
    {7, 8, 9, 10, 11, 12},   // B
    {13, 14, 15, 16, 17, 18} // I
}};

constexpr std::array<std::string_view, kCollapsedCells> kCellNames = {
    "START->O", "START->sB", "START->sI", "O->O", "O->sB", "O->sI", "O->END",
    "B->O",     "B->sB",     "B->dB",    "B->sI", "B->dI", "B->END",
    "I->O",     "I->sB",     "I->dB",    "I->sI", "I->dI", "I->END"};

}  // namespace

int cell_id(FromTag from, ToTag to) {
  return kCellIds[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
}

std::string_view cell_name(int cell) { return kCellNames.at(static_cast<std::size_t>(cell)); }

double CollapsedTransitionTable::at(FromTag from, ToTag to) const {
  const int id = cell_id(from, to);
  if (id < 0) throw Error("collapsed cell carries no parameter");
  return values_[static_cast<std::size_t>(id)];
}

int collapsed_index(const LabelSet& labels, int prev, int next) {
  const int num_labels = static_cast<int>(labels.size());
  const int start = start_state(num_labels);
  const int end = end_state(num_labels);
  if (prev < 0 || prev > end || next < 0 || next > end) throw Error("state out of range");
  if (next == start || prev == end || (prev == start && next == end)) {
    throw Error("structurally impossible transition");
  }

  FromTag from = FromTag::kStart;
  const BioTag* prev_tag = nullptr;
  if (prev != start) {
    prev_tag = &labels.tag(prev);
    from = prev_tag->kind == Bio::kO ? FromTag::kO
           : prev_tag->kind == Bio::kB ? FromTag::kB
                                       : FromTag::kI;
  }

  ToTag to = ToTag::kEnd;
  if (next != end) {
    const BioTag& next_tag = labels.tag(next);
    const bool in_span = prev_tag != nullptr && prev_tag->kind != Bio::kO;
    const bool same = !in_span || prev_tag->slot == next_tag.slot;
    switch (next_tag.kind) {
      case Bio::kO:
        to = ToTag::kO;
        break;
      case Bio::kB:
        to = same ? ToTag::kSameB : ToTag::kDiffB;
        break;
      case Bio::kI:
        to = same ? ToTag::kSameI : ToTag::kDiffI;
        break;
    }
  }
  const int id = cell_id(from, to);
  if (id < 0) throw Error("structurally impossible transition");
  return id;
}

Eigen::MatrixXi tied_cells(const LabelSet& labels) {
  const int num_labels = static_cast<int>(labels.size());
  const int states = num_labels + 2;
  const int start = start_state(num_labels);
  const int end = end_state(num_labels);
  Eigen::MatrixXi cells = Eigen::MatrixXi::Constant(states, states, -1);
  for (int p = 0; p < states; ++p) {
    if (p == end) continue;
    for (int n = 0; n < states; ++n) {
      if (n == start || (p == start && n == end)) continue;
      cells(p, n) = collapsed_index(labels, p, n);
    }
  }
  return cells;
}

Eigen::MatrixXd expand_transitions(const CollapsedTransitionTable& table, const LabelSet& labels) {
  const Eigen::MatrixXi cells = tied_cells(labels);
  Eigen::MatrixXd out(cells.rows(), cells.cols());
  for (Eigen::Index p = 0; p < cells.rows(); ++p) {
    for (Eigen::Index n = 0; n < cells.cols(); ++n) {
      out(p, n) = cells(p, n) < 0 ? kImpossible : table[cells(p, n)];
    }
  }
  return out;
}

Eigen::MatrixXd zero_transitions(const LabelSet& labels) {
  return expand_transitions(CollapsedTransitionTable{}, labels);
}

BoolMatrix rule_mask(const LabelSet& labels) {
  const int num_labels = static_cast<int>(labels.size());
  const int states = num_labels + 2;
  const int start = start_state(num_labels);
  const int end = end_state(num_labels);
  BoolMatrix mask = BoolMatrix::Constant(states, states, false);
  for (int p = 0; p < states; ++p) {
    if (p == end) continue;
    for (int n = 0; n < states; ++n) {
      if (n == start || (p == start && n == end)) continue;
      if (n == end) {
        mask(p, n) = true;
        continue;
      }
      const BioTag& next = labels.tag(n);
      if (next.kind != Bio::kI) {
        mask(p, n) = true;
        continue;
      }
      if (p == start) continue;
      const BioTag& prev = labels.tag(p);
      mask(p, n) = prev.kind != Bio::kO && prev.slot == next.slot;
    }
  }
  return mask;
}

}  // namespace fewshot
