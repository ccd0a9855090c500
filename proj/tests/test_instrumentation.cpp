#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "aloe/instrumentation.hpp"
#include "aloe/theory.hpp"
#include "support.hpp"

using namespace aloe;
using aloe::testing::for_all;
using aloe::testing::Gen;

namespace {

IterationRecord record(double alpha, double g_norm, double grad_err, double e_curr, double e_plus) {
  IterationRecord r;
  r.alpha = alpha;
  r.g_norm_sq = g_norm * g_norm;
  r.grad_err_norm = grad_err;
  r.e_curr = e_curr;
  r.e_plus = e_plus;
  return r;
}

struct Path {
  std::vector<std::uint8_t> I, Theta, U;
};

// The step-size walk of the loop on the lattice alpha0 gamma^i, with the grid
// point at exponent d. True iterations with a small step always succeed, which
// is the only property of the dynamics the path lemmas rely on; everything
// else is drawn at random, including successes of false iterations.
Path abstract_path(Gen& gen, int t, int d, int cap, double p_true, double p_lucky) {
  Path path;
  int i = 0;
  for (int k = 0; k < t; ++k) {
    const bool is_true = gen.coin(p_true);
    const bool small_step = i >= d;
    const bool success = (is_true && small_step) || gen.coin(p_lucky);
    const int next = success ? std::max(i - 1, -cap) : i + 1;
    path.I.push_back(is_true);
    path.Theta.push_back(success);
    path.U.push_back(std::max(i, next) <= d);
    i = next;
  }
  return path;
}

}  // namespace

TEST(ClassifyTrue, BothConditionsRequired) {
  EXPECT_TRUE(classify_true(record(1.0, 1.0, 0.5, 0.1, 0.1), 0.5, 0.0, 0.1));
  EXPECT_FALSE(classify_true(record(1.0, 1.0, 0.51, 0.1, 0.1), 0.5, 0.0, 0.1));
  EXPECT_FALSE(classify_true(record(1.0, 1.0, 0.5, 0.1, 0.1000001), 0.5, 0.0, 0.1));
  // Relative branch: kappa alpha ||g|| = 0.5 * 2 * 3 = 3.
  EXPECT_TRUE(classify_true(record(2.0, 3.0, 3.0, 0.0, 0.0), 0.0, 0.5, 0.0));
}

TEST(ClassifyLarge, WorkedValues) {
  EXPECT_EQ(classify_large(2.0, 2.5, 1.0), StepClass::large);
  EXPECT_EQ(classify_large(0.5, 0.4, 1.0), StepClass::small);
  EXPECT_EQ(classify_large(0.5, 0.25, 0.5), StepClass::small);
  EXPECT_EQ(classify_large(0.5, 0.625, 0.5), StepClass::large);
  EXPECT_THROW(classify_large(0.8, 1.25, 1.0), std::logic_error);
}

TEST(ProgressZ, WorkedValues) {
  EXPECT_EQ(progress_Z(FunctionClass::nonconvex, 3.0, 1.0, 0.1), 2.0);
  EXPECT_NEAR(progress_Z(FunctionClass::strongly_convex, std::exp(1.0) * 0.01, 0.0, 0.01), 1.0,
              1e-15);
  EXPECT_EQ(progress_Z(FunctionClass::convex, 0.25, 0.0, 0.25), 0.0);
  EXPECT_EQ(progress_Z(FunctionClass::convex, 0.0, 0.0, 0.25),
            -std::numeric_limits<double>::infinity());
}

TEST(StoppingTime, ZeroAtStationaryStartAndCensoredOtherwise) {
  auto p = make_strongly_convex_quadratic(3, 1.0, 2.0, 1);
  Trace tr;
  tr.records.resize(4);
  for (int k = 0; k < 4; ++k) {
    tr.records[k].k = k;
    tr.records[k].phi_curr = 1.0;
    tr.records[k].grad_true_norm = 1.0;
  }
  tr.phi_final = 1.0;
  tr.grad_final_norm = 1.0;
  const StoppingSpec nc{FunctionClass::nonconvex, 0.5, std::nullopt};
  EXPECT_FALSE(stopping_time(tr, p, nc).has_value());
  tr.grad_final_norm = 0.5;
  EXPECT_EQ(stopping_time(tr, p, nc), 4);
  tr.records[2].grad_true_norm = 0.1;
  EXPECT_EQ(stopping_time(tr, p, nc), 2);
  tr.records[0].grad_true_norm = 0.0;
  EXPECT_EQ(stopping_time(tr, p, nc), 0);

  const StoppingSpec cv{FunctionClass::convex, 0.01, 0.05};
  tr.records[0].grad_true_norm = 1.0;
  tr.records[2].grad_true_norm = 0.05;
  EXPECT_EQ(stopping_time(tr, p, cv), 2);
}

TEST(GoodCountGrid, NineEquallySpacedLevels) {
  const auto g = good_count_grid();
  ASSERT_EQ(g.size(), 9u);
  EXPECT_NEAR(g.front(), 0.55, 1e-15);
  EXPECT_NEAR(g.back(), 0.95, 1e-15);
}

TEST(PathLemmas, AdversarialAllFailurePathPasses) {
  for (int d : {0, 1, 3, 7}) {
    Gen gen(static_cast<std::uint64_t>(d) + 1);
    const auto path = abstract_path(gen, 200, d, 2, 0.0, 0.0);
    const auto v = verify_path_lemmas(path.I, path.Theta, path.U, std::nullopt, d);
    EXPECT_TRUE(v.lemma2 && v.corollary1 && v.lemma3 && v.lemma4) << "d = " << d;
    EXPECT_EQ(v.first_violation_t, -1);
  }
}

TEST(PathLemmas, PlantedViolationsAreFlagged) {
  // Two large failures with d = 1.
  const std::vector<std::uint8_t> z2{0, 0}, one2{1, 1};
  auto v = verify_path_lemmas(z2, z2, one2, std::nullopt, 1.0);
  EXPECT_FALSE(v.lemma2);
  EXPECT_EQ(v.first_violation_t, 2);

  // A small true iteration with no small false one before it.
  const std::vector<std::uint8_t> I{1}, Th{1}, U{0};
  v = verify_path_lemmas(I, Th, U, std::nullopt, 0.0);
  EXPECT_FALSE(v.lemma3);
  // ... is ignored once the path has stopped at t = 1.
  v = verify_path_lemmas(I, Th, U, 1, 0.0);
  EXPECT_TRUE(v.lemma3);

  // All true, no large successes.
  const std::vector<std::uint8_t> ones(20, 1), zeros(20, 0);
  v = verify_path_lemmas(ones, zeros, ones, std::nullopt, 0.0);
  EXPECT_FALSE(v.lemma4);
}

TEST(PathLemmasProperty, AbstractProcessNeverViolates) {
  long long violations = 0;
  for_all(10000, 41, [&](Gen& gen, int) {
    const int d = gen.integer(0, 6);
    const auto path = abstract_path(gen, 200, d, gen.integer(0, 4), gen.uniform(0.3, 1.0),
                                    gen.uniform(0.0, 0.6));
    const auto v = verify_path_lemmas(path.I, path.Theta, path.U, std::nullopt, d);
    if (!(v.lemma2 && v.corollary1 && v.lemma3 && v.lemma4)) {
      ++violations;
      ADD_FAILURE() << "violation at t = " << v.first_violation_t << " (large-step " << v.lemma2
                    << ", corollary " << v.corollary1 << ", small-step " << v.lemma3 << ", good-iteration "
                    << v.lemma4 << ", d = " << d << ")";
    }
  });
  EXPECT_EQ(violations, 0);
}

TEST(AnalysePath, RealRunOnlyProducesConsistentFlags) {
  auto p = std::make_shared<ProblemInstance>(make_strongly_convex_quadratic(5, 0.1, 2.0, 3));
  const ZerothOracleSpec zs{1e-4, 0.0, 0.0, NoiseMode::bounded, 0.0};
  const FirstOracleSpec fs{0.0, 0.5, 0.2};
  SyntheticZerothOracle z(p, zs);
  SyntheticFirstOracle f(p, fs);
  AloeParams params;
  params.eps_f_input = 1e-4;
  params.max_iters = 300;
  const auto tr = aloe_run(*p, z, f, params, 5);

  TheoryInputs in;
  in.cls = FunctionClass::nonconvex;
  in.L = p->lipschitz_L;
  in.kappa = fs.kappa;
  in.eps_f = zs.eps_f;
  in.delta = fs.delta;
  in.eps = 1e-3;
  in.phi_gap0 = eval_value(*p, p->x0) - p->phi_star;
  const auto th = compute_theory(in);

  PathContext ctx;
  ctx.stopping = {FunctionClass::nonconvex, 1e-3, std::nullopt};
  ctx.eps_g = fs.eps_g;
  ctx.kappa = fs.kappa;
  ctx.bar_alpha_grid = th.bar_alpha_grid;
  ctx.d = th.d;
  const auto rep = analyse_path(tr, *p, ctx);
  ASSERT_EQ(rep.I.size(), 300u);
  ASSERT_EQ(rep.Z.size(), 301u);
  EXPECT_EQ(rep.Z.back(), tr.phi_final - p->phi_star);
  long long s = 0;
  for (std::size_t k = 0; k < rep.I.size(); ++k) {
    const auto& r = tr.records[k];
    EXPECT_EQ(rep.Theta[k], r.success);
    EXPECT_EQ(rep.U[k], std::min(r.alpha, r.alpha_next) >= th.bar_alpha_grid);
    s += r.success;
    // Below the grid point with both conditions met, the step must succeed.
    if (rep.I[k] && !rep.U[k] && (!rep.T_eps || static_cast<int>(k) < *rep.T_eps))
      EXPECT_TRUE(r.success);
  }
  EXPECT_DOUBLE_EQ(rep.frac_success, static_cast<double>(s) / 300.0);
  EXPECT_TRUE(rep.verdicts.lemma2 && rep.verdicts.corollary1 && rep.verdicts.lemma3 &&
              rep.verdicts.lemma4);
}
