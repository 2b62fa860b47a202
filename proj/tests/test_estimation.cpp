#include "oracles.hpp"

#include "diph/constants.hpp"
#include "diph/error.hpp"
#include "diph/estimation.hpp"
#include "diph/metrics.hpp"

#include <gtest/gtest.h>

using namespace diph;

namespace {

LatentConfig opposite_pair() {
  Matrix V(2, 1);
  V << 1, -1;
  return LatentConfig{V, 1.0, Vector::Ones(2)};
}

std::vector<Subset> draw_edges(const LatentConfig& c, int n, Rng& rng) {
  const KernelMatrix L = build_kernel(c);
  std::vector<Subset> out;
  for (int l = 0; l < n; ++l) out.push_back(sample(L, rng));
  return out;
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(1e-8, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

TEST(Objective, HandExample) {
  const Hypergraph H(2, {{0}, {1}});
  EXPECT_NEAR(objective(opposite_pair(), H), -std::log(8.0) + std::log(2.0), 1e-14);
}

TEST(Objective, EmptyEdgesContributeZero) {
  const Hypergraph H(2, {{}, {}});
  EXPECT_NEAR(objective(opposite_pair(), H), -std::log(8.0), 1e-14);
}

TEST(Objective, DuplicatesAverage) {
  EXPECT_NEAR(objective(opposite_pair(), Hypergraph(2, {{0}, {0}})),
              objective(opposite_pair(), Hypergraph(2, {{0}})), 1e-15);
}

TEST(Objective, MatchesDenseFormula) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const LatentConfig c = oracle::random_config(12, 3, rng);
    const auto edges = draw_edges(c, 150, rng);
    EXPECT_NEAR(objective(c, edges), oracle::dense_objective(c, edges), 1e-10);
    EXPECT_NEAR(objective(c, Hypergraph(12, edges)), oracle::dense_objective(c, edges), 1e-10);
  }
}

TEST(Objective, ReportsSingularEdge) {
  Matrix V(3, 1);
  V << 1, 1, 1;
  const LatentConfig c{V, 1.0, Vector::Constant(3, 1e-20)};
  const ObjectiveValue v = evaluate_objective(c, Hypergraph(3, {{0}, {1}, {0, 2}, {1, 2}}));
  EXPECT_EQ(v.value, kLogZero);
  ASSERT_TRUE(v.singular_edge.has_value());
  EXPECT_EQ(*v.singular_edge, 2);
}

TEST(Gradient, FiniteDifferences) {
  Rng rng(1234);
  for (int trial = 0; trial < 5; ++trial) {
    const LatentConfig c = oracle::random_config(15, 2, rng);
    const auto edges = draw_edges(c, 200, rng);
    const Gradient g = gradient(c, edges);
    const Gradient fd = oracle::numeric_gradient(c, edges, 1e-5);
    for (Eigen::Index i = 0; i < g.V.size(); ++i) {
      EXPECT_LE(rel_diff(g.V(i), fd.V(i)), 1e-4) << "V entry " << i;
    }
    EXPECT_LE(rel_diff(g.beta, fd.beta), 1e-4);
    for (Eigen::Index i = 0; i < g.alpha.size(); ++i) {
      EXPECT_LE(rel_diff(g.alpha(i), fd.alpha(i)), 1e-4) << "alpha " << i;
    }
  }
}

TEST(Gradient, MatchesDenseKernelSpaceFormula) {
  Rng rng(77);
  const LatentConfig c = oracle::random_config(10, 3, rng);
  const auto edges = draw_edges(c, 60, rng);
  Matrix L = c.beta * c.V * c.V.transpose();
  L.diagonal() += c.alpha;
  Matrix G = -(L + Matrix::Identity(10, 10)).inverse();
  for (const Subset& e : edges) {
    const Matrix inv = oracle::sub(L, e).inverse();
    for (std::size_t a = 0; a < e.size(); ++a) {
      for (std::size_t b = 0; b < e.size(); ++b) G(e[a], e[b]) += inv(a, b) / edges.size();
    }
  }
  const Gradient g = gradient(c, edges);
  EXPECT_TRUE(g.V.isApprox(2.0 * c.beta * G * c.V, 1e-10));
  EXPECT_NEAR(g.beta, (G.array() * (c.V * c.V.transpose()).array()).sum(), 1e-10);
  EXPECT_TRUE(g.alpha.isApprox(G.diagonal(), 1e-10));
}

TEST(Gradient, DiagonalKernelAlphaComponent) {
  // beta ~ 0 leaves L = diag(alpha).
  Matrix V(3, 1);
  V << 1, 1, 1;
  const LatentConfig c{V, 1e-14, (Vector(3) << 0.5, 1.0, 2.0).finished()};
  const std::vector<Subset> edges{{0}, {1}, {2}, {0}, {1}, {2}};
  const Gradient g = gradient(c, edges);
  for (int i = 0; i < 3; ++i) {
    const double want = -1.0 / (1.0 + c.alpha(i)) + (1.0 / 3.0) / c.alpha(i);
    EXPECT_NEAR(g.alpha(i), want, 1e-10);
  }
}

TEST(Gradient, RejectsSingularBatch) {
  Matrix V(3, 1);
  V << 1, 1, 1;
  const LatentConfig c{V, 1.0, Vector::Constant(3, 1e-20)};
  EXPECT_THROW(gradient(c, std::vector<Subset>{{0, 1}}), NumericalError);
}

TEST(Project, Examples) {
  Matrix V(2, 2);
  V << 3, 4, 0, 2;
  const Projection p = project(V, 1.0, (Vector(2) << -0.1, 0.3).finished(), 1e-8);
  EXPECT_NEAR(p.config.V(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(p.config.V(0, 1), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(p.config.alpha(0), 1e-8);
  EXPECT_DOUBLE_EQ(p.config.alpha(1), 0.3);
  EXPECT_TRUE(p.zero_rows.empty());

  const Projection again = project(p.config.V, p.config.beta, p.config.alpha, 1e-8);
  EXPECT_EQ(again.config.V, p.config.V);
  EXPECT_EQ(again.config.alpha, p.config.alpha);
  EXPECT_EQ(again.config.beta, p.config.beta);
}

TEST(Project, ZeroRowAndClamps) {
  Matrix V(3, 2);
  V << 0, 0, 1, 1, 0, 1e-13;
  const Projection p = project(V, -2.0, Vector::Constant(3, std::nan("")), 1e-6);
  EXPECT_EQ(p.zero_rows, (std::vector<int>{0, 2}));
  EXPECT_EQ(p.config.V(0, 0), 1.0);
  EXPECT_EQ(p.config.V(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(p.config.beta, 1e-6);
  EXPECT_TRUE((p.config.alpha.array() == 1e-6).all());
  EXPECT_TRUE(validate_config(p.config).empty());
}

TEST(Aic, Formula) {
  EXPECT_DOUBLE_EQ(aic(10, 2, 100, -3.5), 2.0 * 21 + 2.0 * 350);
}

TEST(FitOptions, Validation) {
  FitOptions o;
  EXPECT_NO_THROW(validate_options(o, 5));
  o.d = 5;
  EXPECT_THROW(validate_options(o, 5), ValidationError);
  o = {};
  o.backtrack_factor = 1.0;
  EXPECT_THROW(validate_options(o, 5), ValidationError);
  o = {};
  o.n_inits = 0;
  EXPECT_THROW(validate_options(o, 5), ValidationError);
  o = {};
  o.floor_eps = 0.0;
  EXPECT_THROW(validate_options(o, 5), ValidationError);
}

TEST(InitialConfig, FeasibleAndSeeded) {
  const Hypergraph H(5, {{0, 1}, {0}, {2, 3}, {0, 4}});
  const LatentConfig a = initial_config(H, 2, 1e-8, 42);
  const LatentConfig b = initial_config(H, 2, 1e-8, 42);
  EXPECT_TRUE(validate_config(a).empty());
  EXPECT_EQ(a.V, b.V);
  EXPECT_DOUBLE_EQ(a.beta, 0.5);
  // Node 0 appears in 3 of 4 edges: p/(1-p) - 0.5 = 2.5.
  EXPECT_NEAR(a.alpha(0), 2.5, 1e-12);
  EXPECT_DOUBLE_EQ(a.alpha(1), 1e-8);
}

class FitFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng(2024);
    truth = oracle::random_config(12, 2, rng, 1.0, 1.0, 0.05, 0.3);
    H = Hypergraph(12, draw_edges(truth, 600, rng));
  }
  LatentConfig truth;
  Hypergraph H;
};

TEST_F(FitFixture, FullBatchTraceIsMonotone) {
  FitOptions o;
  o.full_batch = true;
  o.n_inits = 2;
  const FitResult r = fit(H, o);
  ASSERT_FALSE(r.objective_trace.empty());
  for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
    EXPECT_GE(r.objective_trace[k], r.objective_trace[k - 1]);
  }
  EXPECT_EQ(r.restart_objectives.size(), 2u);
  EXPECT_DOUBLE_EQ(r.final_objective,
                   *std::max_element(r.restart_objectives.begin(), r.restart_objectives.end()));
  EXPECT_NEAR(r.final_objective, objective(r.config, H), 1e-12);
  EXPECT_DOUBLE_EQ(r.aic, aic(12, 2, H.num_edges(), r.final_objective));
  EXPECT_TRUE(validate_config(r.config).empty());
}

TEST_F(FitFixture, NeverWorseThanStart) {
  FitOptions o;
  o.max_iters = 30;
  const LatentConfig start = initial_config(H, 2, o.floor_eps, 5);
  const FitResult r = fit_from(H, o, start);
  EXPECT_GE(r.final_objective, objective(start, H));
  for (int r0 = 0; r0 < o.n_inits; ++r0) {
    const LatentConfig s = initial_config(H, 2, o.floor_eps, derive_seed(derive_seed(o.seed, r0), 1));
    EXPECT_GE(fit(H, o).final_objective, objective(s, H));
  }
}

TEST_F(FitFixture, SignReflectionGivesIdenticalTraces) {
  Rng rng(8);
  const LatentConfig start = initial_config(H, 2, 1e-8, 11);
  LatentConfig flipped = start;
  const SignVector s = oracle::random_signs(12, rng);
  for (int i = 0; i < 12; ++i) flipped.V.row(i) *= s[i];
  for (bool full : {true, false}) {
    FitOptions o;
    o.full_batch = full;
    o.batch_size = 100;
    o.max_iters = 200;
    const FitResult a = fit_from(H, o, start);
    const FitResult b = fit_from(H, o, flipped);
    EXPECT_EQ(a.objective_trace, b.objective_trace);
  }
}

TEST_F(FitFixture, BatchOfAllEdgesEqualsFullBatch) {
  FitOptions full;
  full.full_batch = true;
  full.n_inits = 2;
  full.max_iters = 300;
  FitOptions all = full;
  all.full_batch = false;
  all.batch_size = H.num_edges();
  const FitResult a = fit(H, full);
  const FitResult b = fit(H, all);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.config.V, b.config.V);
}

TEST_F(FitFixture, SeededRunsRepeat) {
  FitOptions o;
  o.batch_size = 128;
  o.max_iters = 200;
  o.seed = 9;
  const FitResult a = fit(H, o);
  const FitResult b = fit(H, o);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.config.V, b.config.V);
}

TEST(Fit, RejectsDegenerateInput) {
  EXPECT_THROW(fit(Hypergraph(4, {{}, {}}), FitOptions{}), ValidationError);
  FitOptions o;
  o.d = 4;
  EXPECT_THROW(fit(Hypergraph(4, {{0, 1}}), o), ValidationError);
}

TEST(Fit, RecoversPlantedKernel) {
  Rng rng(515);
  const LatentConfig truth = oracle::random_config(20, 2, rng, 1.0, 1.0, 0.0025, 0.04);
  const Hypergraph H(20, draw_edges(truth, 5000, rng));
  FitOptions o;
  o.full_batch = true;
  o.seed = 1;
  const FitResult r = fit(H, o);
  EXPECT_LE(relative_errors(r.config, truth).L, 0.15);
}

TEST(SelectDimension, SingleCandidateAndRanges) {
  Rng rng(19);
  const LatentConfig truth = oracle::random_config(8, 2, rng);
  const Hypergraph H(8, draw_edges(truth, 300, rng));
  FitOptions o;
  o.full_batch = true;
  o.n_inits = 1;
  const DimensionSelection one = select_dimension(H, {3}, o);
  EXPECT_EQ(one.best_d, 3);
  ASSERT_EQ(one.fits.size(), 1u);
  EXPECT_TRUE(one.fits[0].result.has_value());
  EXPECT_THROW(select_dimension(H, {}, o), ValidationError);
  EXPECT_THROW(select_dimension(H, {2, 8}, o), ValidationError);

  const DimensionSelection many = select_dimension(H, {1, 2, 3}, o);
  double best = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (const auto& f : many.fits) {
    if (f.result->aic < best) {
      best = f.result->aic;
      arg = f.d;
    }
  }
  EXPECT_EQ(many.best_d, arg);
}
