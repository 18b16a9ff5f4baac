#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "fewshot/emission.h"
#include "fewshot/error.h"

namespace fewshot {
namespace {

Eigen::MatrixXd gaussian(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = normal(gen);
  }
  return m;
}

Prototypes all_present(const Eigen::MatrixXd& means) {
  Prototypes p;
  p.means = means;
  p.present.assign(static_cast<std::size_t>(means.rows()), true);
  return p;
}

Eigen::MatrixXd random_rotation(int dim, std::mt19937_64& gen) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(dim, dim, gen));
  return qr.householderQ();
}

TEST(BuildScorer, VariantDefaults) {
  const auto wpz = build_scorer(Variant::kWpz);
  EXPECT_EQ(wpz.alpha, 0.0);
  EXPECT_EQ(wpz.beta, 0.0);
  EXPECT_EQ(wpz.similarity, Similarity::kNegSquaredDistance);
  const auto tap = build_scorer(Variant::kTapNet);
  EXPECT_EQ(tap.alpha, 0.0);
  EXPECT_EQ(tap.beta, 1.0);
  EXPECT_EQ(tap.similarity, Similarity::kProjectedDot);
  const auto lt = build_scorer(Variant::kLTapNet);
  EXPECT_EQ(lt.alpha, 0.5);
  EXPECT_EQ(lt.beta, 0.7);
  EXPECT_TRUE(lt.uses_transitions());
  EXPECT_TRUE(lt.pairwise());
}

TEST(BuildScorer, AblationsAndContradictions) {
  Ablations a;
  apply_ablation(a, "label-semantic");
  EXPECT_EQ(build_scorer(Variant::kLTapNet, a).alpha, 0.0);
  Ablations p;
  apply_ablation(p, "prototype");
  EXPECT_EQ(build_scorer(Variant::kLTapNet, p).beta, 1.0);
  Ablations c;
  apply_ablation(c, "cdt");
  EXPECT_FALSE(build_scorer(Variant::kLTapNet, c).uses_transitions());
  EXPECT_THROW(apply_ablation(c, "dropout"), ConfigError);
  EXPECT_THROW(build_scorer(Variant::kTapNet, a), ConfigError);
  EXPECT_THROW(build_scorer(Variant::kLTapNet, {}, 1.5), ConfigError);
  EXPECT_THROW(build_scorer(Variant::kWpz, {}, std::nullopt, std::nullopt, 4), ConfigError);
  EXPECT_THROW(parse_variant("bert"), ConfigError);
  EXPECT_EQ(parse_variant("l-wpz"), Variant::kLWpz);
}

TEST(Representations, AlphaZeroAndBetaOneAreExact) {
  std::mt19937_64 gen(1);
  const Eigen::MatrixXd phi = gaussian(4, 6, gen);
  const Eigen::MatrixXd s = gaussian(4, 6, gen);
  EXPECT_EQ(enhanced_references(phi, s, 0.0), phi);
  const Eigen::MatrixXd psi = enhanced_references(phi, s, 0.3);
  EXPECT_LT((psi - (0.7 * phi + 0.3 * s)).cwiseAbs().maxCoeff(), 1e-15);
  Prototypes p = all_present(gaussian(4, 6, gen));
  EXPECT_EQ(label_representations(p, psi, 1.0), psi);
  p.present[2] = false;
  const Eigen::MatrixXd omega = label_representations(p, psi, 0.7);
  EXPECT_EQ(omega.row(2), psi.row(2));
  EXPECT_LT((omega.row(0) - (0.3 * p.means.row(0) + 0.7 * psi.row(0))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ErrorNulling, AlignmentErrorsFollowDefinition) {
  std::mt19937_64 gen(2);
  const Eigen::MatrixXd psi = gaussian(4, 8, gen);
  Prototypes p = all_present(gaussian(4, 8, gen));
  p.present[1] = false;
  const Eigen::MatrixXd e = alignment_errors(psi, p);
  ASSERT_EQ(e.rows(), 3);
  const std::vector<int> live = {0, 2, 3};
  for (int k = 0; k < 3; ++k) {
    Eigen::RowVectorXd others = Eigen::RowVectorXd::Zero(8);
    for (int l : live) {
      if (l != live[k]) others += psi.row(l);
    }
    const Eigen::RowVectorXd r = psi.row(live[k]) - others / 2.0;
    const Eigen::RowVectorXd want = r / r.norm() - p.means.row(live[k]) / p.means.row(live[k]).norm();
    EXPECT_LT((e.row(k) - want).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(ErrorNulling, NullsErrorsWithOrthonormalColumns) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 8 + trial % 3 * 12;
    const int labels = 2 + trial % (dim - 2);
    const Eigen::MatrixXd psi = gaussian(labels, dim, gen);
    const Prototypes p = all_present(gaussian(labels, dim, gen));
    const Eigen::MatrixXd m = error_nulling_projection(psi, p);
    EXPECT_EQ(m.cols(), dim - labels);
    EXPECT_LT((alignment_errors(psi, p) * m).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((m.transpose() * m - Eigen::MatrixXd::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ErrorNulling, ProjectionSizeAndDegenerateCases) {
  std::mt19937_64 gen(4);
  const Eigen::MatrixXd psi = gaussian(3, 8, gen);
  const Prototypes p = all_present(gaussian(3, 8, gen));
  EXPECT_EQ(error_nulling_projection(psi, p, 2).cols(), 2);
  EXPECT_THROW(error_nulling_projection(psi, p, 6), DimensionError);
  Prototypes one = p;
  one.present = {true, false, false};
  EXPECT_THROW(error_nulling_projection(psi, one), DegenerateGeometryError);
  Prototypes zero = p;
  zero.means.row(1).setZero();
  EXPECT_THROW(error_nulling_projection(psi, zero), DegenerateGeometryError);
  EXPECT_THROW(error_nulling_projection(gaussian(3, 3, gen), all_present(gaussian(3, 3, gen))),
               DegenerateGeometryError);
}

TEST(Emission, RowsAreLogDistributions) {
  std::mt19937_64 gen(5);
  const Eigen::MatrixXd q = gaussian(5, 8, gen);
  const Eigen::MatrixXd omega = gaussian(3, 8, gen);
  for (auto sim : {Similarity::kProjectedDot, Similarity::kNegSquaredDistance}) {
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(8, 8);
    const Eigen::MatrixXd e = emission_scores(q, m, omega, sim);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(e.row(i).array().exp().sum(), 1.0, 1e-12);
  }
}

// A common rotation of queries, references and prototypes leaves the
// projected-dot emission unchanged.
TEST(Emission, RotationInvariant) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 12;
    const Eigen::MatrixXd psi = gaussian(4, dim, gen);
    const Prototypes p = all_present(gaussian(4, dim, gen));
    const Eigen::MatrixXd q = gaussian(6, dim, gen);
    const Eigen::MatrixXd omega = label_representations(p, psi, 0.7);
    const Eigen::MatrixXd e1 =
        emission_scores(q, error_nulling_projection(psi, p), omega, Similarity::kProjectedDot);
    const Eigen::MatrixXd r = random_rotation(dim, gen);
    const Prototypes pr = all_present(p.means * r);
    const Eigen::MatrixXd e2 = emission_scores(q * r, error_nulling_projection(psi * r, pr),
                                               label_representations(pr, psi * r, 0.7),
                                               Similarity::kProjectedDot);
    EXPECT_LT((e1 - e2).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Emission, LabelPermutationPermutesColumns) {
  std::mt19937_64 gen(7);
  const int dim = 10;
  const Eigen::MatrixXd psi = gaussian(4, dim, gen);
  const Prototypes p = all_present(gaussian(4, dim, gen));
  const Eigen::MatrixXd q = gaussian(3, dim, gen);
  const std::vector<int> perm = {2, 0, 3, 1};
  Eigen::MatrixXd psi_p(4, dim);
  Prototypes pp = p;
  for (int j = 0; j < 4; ++j) {
    psi_p.row(j) = psi.row(perm[static_cast<std::size_t>(j)]);
    pp.means.row(j) = p.means.row(perm[static_cast<std::size_t>(j)]);
  }
  for (auto sim : {Similarity::kProjectedDot, Similarity::kNegSquaredDistance}) {
    const Eigen::MatrixXd m1 = sim == Similarity::kProjectedDot ? error_nulling_projection(psi, p) : Eigen::MatrixXd{};
    const Eigen::MatrixXd m2 = sim == Similarity::kProjectedDot ? error_nulling_projection(psi_p, pp) : Eigen::MatrixXd{};
    const Eigen::MatrixXd e1 = emission_scores(q, m1, label_representations(p, psi, 0.5), sim);
    const Eigen::MatrixXd e2 = emission_scores(q, m2, label_representations(pp, psi_p, 0.5), sim);
    for (int j = 0; j < 4; ++j) {
      EXPECT_LT((e2.col(j) - e1.col(perm[static_cast<std::size_t>(j)])).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Emission, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 gen(8);
  const Eigen::MatrixXd q = gaussian(4, 6, gen);
  const Eigen::MatrixXd omega = gaussian(3, 6, gen);
  const Eigen::MatrixXd weights = gaussian(4, 3, gen);  // loss = sum(weights .* logp)
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(6, 6, gen));
  const Eigen::MatrixXd m = Eigen::MatrixXd(qr.householderQ()).leftCols(4);
  for (auto sim : {Similarity::kProjectedDot, Similarity::kNegSquaredDistance}) {
    auto loss = [&](const Eigen::MatrixXd& o) { return emission_scores(q, m, o, sim).cwiseProduct(weights).sum(); };
    const Eigen::MatrixXd g = emission_backward(q, m, omega, sim, emission_scores(q, m, omega, sim), weights);
    for (int j = 0; j < 3; ++j) {
      for (int d = 0; d < 6; ++d) {
        Eigen::MatrixXd up = omega, down = omega;
        up(j, d) += 1e-5;
        down(j, d) -= 1e-5;
        EXPECT_NEAR(g(j, d), (loss(up) - loss(down)) / 2e-5, 1e-7);
      }
    }
  }
}

TEST(References, AssignmentIsInjective) {
  const LabelSet labels({"a", "b", "c"});
  EXPECT_EQ(assign_references(9, labels, AssignMode::kDeterministic), (std::vector<int>{0, 1, 2, 3, 4, 5, 6}));
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    auto rows = assign_references(9, labels, AssignMode::kRandom, &rng);
    std::sort(rows.begin(), rows.end());
    EXPECT_EQ(std::adjacent_find(rows.begin(), rows.end()), rows.end());
    EXPECT_LT(rows.back(), 9);
  }
  EXPECT_THROW(assign_references(5, labels, AssignMode::kDeterministic), ConfigError);
}

TEST(Prototypes, MeansAndPresence) {
  Eigen::MatrixXd s0(2, 2);
  s0 << 1, 0, 0, 1;
  Eigen::MatrixXd s1(1, 2);
  s1 << 3, 0;
  const Prototypes p = compute_prototypes({s0, s1}, {{1, 0}, {1}}, 3);
  EXPECT_EQ(p.present, (std::vector<bool>{true, true, false}));
  EXPECT_EQ(p.means.row(1), Eigen::RowVector2d(2, 0));
  EXPECT_EQ(p.means.row(2), Eigen::RowVector2d(0, 0));
  EXPECT_EQ(p.count_present(), 2);
}

}  // namespace
}  // namespace fewshot
