// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <set>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "mpcert/instances.hpp"
#include "mpcert/online.hpp"
#include "mpcert/problem.hpp"
#include "test_util.hpp"

namespace mpcert {
namespace {

using testing::V;

TEST(Problem, TinyIsValid) {
  const MpProblem p = PTiny();
  EXPECT_NO_THROW(p.Validate());
  EXPECT_EQ(p.n(), 2);
  EXPECT_TRUE(p.IsBinary(1));
  EXPECT_FALSE(p.IsBinary(0));
}

TEST(Problem, ValidateRejectsBadShapes) {
  MpProblem p = PTiny();
  p.W = Matrix::Zero(3, 1);
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p = PTiny();
  p.binary_set = {2};
  EXPECT_THROW(p.Validate(), std::invalid_argument);
}

TEST(Problem, KindRoundTrip) {
  EXPECT_EQ(ParseProblemKind(ToString(ProblemKind::kMiqp)), ProblemKind::kMiqp);
  EXPECT_EQ(ParseProblemKind(ToString(ProblemKind::kMilp)), ProblemKind::kMilp);
  EXPECT_THROW(ParseProblemKind("sdp"), std::invalid_argument);
}

TEST(Relaxation, RootKeepsAllVariablesAndAddsBounds) {
  for (ProblemKind kind : {ProblemKind::kMilp, ProblemKind::kMiqp}) {
    const MpProblem p = GenRandom({kind, 3, 5});
    const Relaxation r = MakeRelaxation(p, Node{});
    EXPECT_EQ(r.num_vars(), p.n());
    EXPECT_EQ(r.num_rows(), p.m() + 2 * p.n_b);
    EXPECT_EQ(r.free_binaries.size(), 3u);
  }
}

TEST(Relaxation, TinyFixedToZero) {
  const MpProblem p = PTiny();
  const Relaxation r = MakeRelaxation(p, Node{{1}, {}});
  ASSERT_EQ(r.num_vars(), 1);
  EXPECT_EQ(r.var_map, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(r.c(0), -1.0);
  // x_c <= 1 + theta at theta = 0.2, x_c = 0.7: both formulations agree.
  const Vector theta = V({0.2});
  const Vector x = V({0.7});
  const Vector slack = r.RhsAt(theta) - r.A * x;
  EXPECT_GE(slack.minCoeff(), 0.0);
  const Vector full = r.Lift(x);
  EXPECT_DOUBLE_EQ(full(1), 0.0);
  EXPECT_DOUBLE_EQ(r.Objective(x, theta), p.c.dot(full));
  const Vector full_slack = p.b + p.W * theta - p.A * full;
  EXPECT_GE(full_slack.minCoeff(), 0.0);
  EXPECT_NEAR(r.RhsAt(theta)(0) - r.A(0, 0) * 1.2, 0.0, 1e-12);
}

TEST(Relaxation, FullFixingHasNoBoundRows) {
  const MpProblem p = GenRandom({ProblemKind::kMilp, 3, 2});
  const Relaxation r = MakeRelaxation(p, Node{{3}, {4, 5}});
  EXPECT_EQ(r.num_vars(), p.n_c);
  EXPECT_EQ(r.num_rows(), p.m());
  EXPECT_TRUE(r.free_binaries.empty());
}

TEST(Relaxation, RejectsOverlappingFixings) {
  EXPECT_THROW(MakeRelaxation(PTiny(), Node{{1}, {1}}), std::invalid_argument);
}

TEST(Relaxation, ObjectiveMatchesFullProblemMiqp) {
  const MpProblem p = GenRandom({ProblemKind::kMiqp, 2, 9});
  const Node node{{2}, {3}};
  const Relaxation r = MakeRelaxation(p, node);
  const Vector theta = Vector::Constant(p.theta_dim(), 0.1);
  const Vector x = V({0.3, -0.2});
  const Vector full = r.Lift(x);
  const double direct = 0.5 * full.dot(p.H * full) + (p.f + p.f_theta * theta).dot(full);
  EXPECT_NEAR(r.Objective(x, theta), direct, 1e-12);
  // Row feasibility is preserved by the substitution.
  const Vector lhs_full = p.b + p.W * theta - p.A * full;
  const Vector lhs_red = r.RhsAt(theta) - r.A * x;
  for (int i = 0; i < p.m(); ++i) EXPECT_NEAR(lhs_full(i), lhs_red(i), 1e-12);
}

TEST(Branch, ChildrenAndDepth) {
  const MpProblem p = PTiny();
  const auto [one, zero] = Branch(Node{}, 1, p);
  EXPECT_EQ(one, (Node{{}, {1}}));
  EXPECT_EQ(zero, (Node{{1}, {}}));
  EXPECT_EQ(one.depth(), 1);
  EXPECT_THROW(Branch(one, 1, p), std::invalid_argument);
}

TEST(Branch, DeepNodeGivesLeaves) {
  const MpProblem p = GenRandom({ProblemKind::kMilp, 3, 1});
  const Node n{{3}, {4}};
  const auto [a, b] = Branch(n, SelectBranchIndex(n, p), p);
  EXPECT_TRUE(FreeBinaries(p, a).empty());
  EXPECT_TRUE(FreeBinaries(p, b).empty());
}

TEST(Branch, LowestFreeIndex) {
  const MpProblem p = GenRandom({ProblemKind::kMilp, 3, 1});
  EXPECT_EQ(SelectBranchIndex(Node{}, p), 3);
  EXPECT_EQ(SelectBranchIndex(Node{{3}, {}}, p), 4);
  EXPECT_EQ(SelectBranchIndex(Node{{3}, {5}}, p), 4);
  EXPECT_THROW(SelectBranchIndex(Node{{3, 4}, {5}}, p), std::invalid_argument);
}

TEST(Branch, CompletenessOfLeaves) {
  // Repeated branching from the root reaches each of the 2^n_b full fixings once.
  const MpProblem p = GenRandom({ProblemKind::kMilp, 3, 1});
  std::vector<Node> stack{Node{}}, leaves;
  while (!stack.empty()) {
    Node n = stack.back();
    stack.pop_back();
    if (FreeBinaries(p, n).empty()) {
      leaves.push_back(n);
      continue;
    }
    auto [a, b] = Branch(n, SelectBranchIndex(n, p), p);
    stack.push_back(b);
    stack.push_back(a);
  }
  ASSERT_EQ(leaves.size(), 8u);
  std::set<std::vector<int>> ones;
  for (const Node& n : leaves) {
    std::vector<int> o = n.fixed_one;
    std::sort(o.begin(), o.end());
    ones.insert(o);
  }
  EXPECT_EQ(ones.size(), 8u);
}

TEST(Instances, GeneratorIsDeterministic) {
  const MpProblem a = GenRandom({ProblemKind::kMiqp, 4, 17});
  const MpProblem b = GenRandom({ProblemKind::kMiqp, 4, 17});
  EXPECT_EQ(a.A, b.A);
  EXPECT_EQ(a.H, b.H);
  EXPECT_EQ(a.W, b.W);
  const MpProblem c = GenRandom({ProblemKind::kMiqp, 4, 18});
  EXPECT_NE(a.A, c.A);
}

TEST(Instances, GeneratorDimensions) {
  for (int nb : {1, 4, 5, 8, 20}) {
    const GenSpec s{ProblemKind::kMilp, nb, 3};
    const MpProblem p = GenRandom(s);
    EXPECT_EQ(p.n(), 2 * nb);
    EXPECT_EQ(p.m(), 2 * nb + 8);
    EXPECT_EQ(p.theta_dim(), (nb + 3) / 4);
    EXPECT_EQ(p.binary_set.front(), nb);
    EXPECT_NO_THROW(p.Validate());
  }
}

TEST(Instances, MiqpHessianPositiveDefinite) {
  const MpProblem p = GenRandom({ProblemKind::kMiqp, 5, 2});
  Eigen::SelfAdjointEigenSolver<Matrix> es(p.H);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(Instances, PendulumDimensions) {
  for (int N = 1; N <= 6; ++N) {
    const MpProblem p = PendulumMiqp({N, ""});
    EXPECT_EQ(p.kind, ProblemKind::kMiqp);
    EXPECT_EQ(p.n_b, 2 * N);
    EXPECT_EQ(p.n(), 4 * N);
    EXPECT_EQ(p.m(), 19 * N);
    EXPECT_NO_THROW(p.Validate());
  }
}

}  // namespace
}  // namespace mpcert
