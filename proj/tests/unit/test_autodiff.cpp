#include <gtest/gtest.h>

#include <cmath>

#include "cade/autodiff.hpp"
#include "cade/error.hpp"
#include "cade/grad_check.hpp"
#include "cade/gradcheck_suite.hpp"

using cade::Matrix;
namespace ad = cade::ad;

TEST(Tape, ForwardValuesOfBasicOps) {
  ad::Tape t;
  ad::Value a = t.constant(Matrix{{1, 2}, {3, 4}});
  ad::Value b = t.constant(Matrix{{10, 20}});
  EXPECT_EQ(ad::add(a, b).data(), (Matrix{{11, 22}, {13, 24}}));
  EXPECT_EQ(ad::column_sums(a).data(), (Matrix{{4, 6}}));
  EXPECT_EQ(ad::row_sums(a).data(), (Matrix{{3}, {7}}));
  EXPECT_EQ(ad::reduce_mean_rows(a, 2).data(), (Matrix{{2, 3}}));
  EXPECT_EQ(ad::reduce_max_rows(a, 2).data(), (Matrix{{3, 4}}));
  EXPECT_EQ(ad::dot(a, a).scalar(), 30.0);
  const std::int64_t idx[] = {1, -1};
  EXPECT_EQ(ad::gather_rows(a, idx).data(), (Matrix{{3, 4}, {0, 0}}));
}

TEST(Tape, SoftmaxFlatSumsToOne) {
  ad::Tape t;
  const Matrix s = ad::softmax_flat(t.constant(Matrix{{1000, 1001}, {-5, 3}})).data();
  double total = 0.0;
  for (double x : s.values()) total += x;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_TRUE(s.all_finite());
}

TEST(Tape, LogSigmoidIsStableAtExtremes) {
  ad::Tape t;
  const Matrix v = ad::log_sigmoid(t.constant(Matrix{{-800, 800, 0}})).data();
  EXPECT_NEAR(v[0], -800.0, 1e-9);
  EXPECT_EQ(v[1], 0.0);
  EXPECT_NEAR(v[2], -std::log(2.0), 1e-15);
}

TEST(Tape, ParameterGradientsAccumulateAcrossBackwardCalls) {
  ad::Parameter w("w", Matrix{{1, 2}});
  auto run = [&] {
    ad::Tape t;
    ad::Value x = t.parameter(w);
    t.backward(ad::dot(x, x));
  };
  run();
  EXPECT_EQ(w.grad(), (Matrix{{2, 4}}));
  run();
  EXPECT_EQ(w.grad(), (Matrix{{4, 8}}));
  w.zero_grad();
  EXPECT_EQ(w.grad(), (Matrix{{0, 0}}));
}

TEST(Tape, StopGradientGivesExactZero) {
  ad::Parameter w("w", Matrix{{0.3, -0.7}});
  ad::Tape t;
  ad::Value x = t.parameter(w);
  t.backward(ad::dot(ad::stop_gradient(x), t.constant(Matrix{{1, 1}})));
  for (double g : w.grad().values()) EXPECT_EQ(g, 0.0);
}

TEST(Tape, RowSparseParameterTouchesOnlyGatheredRows) {
  ad::Parameter table("B", Matrix(5, 2, 1.0), /*row_sparse=*/true);
  ad::Tape t;
  const std::int64_t idx[] = {3, -1, 1, 3};
  t.backward(ad::sum(ad::gather_rows(t.parameter(table), idx)));
  EXPECT_EQ(table.touched_count(), 2u);
  EXPECT_TRUE(table.touched(1));
  EXPECT_TRUE(table.touched(3));
  EXPECT_EQ(table.grad()(3, 0), 2.0);
  EXPECT_EQ(table.grad()(0, 0), 0.0);
  table.zero_grad();
  EXPECT_EQ(table.touched_count(), 0u);
  EXPECT_EQ(table.grad()(3, 0), 0.0);
}

TEST(Tape, BackwardOnNonScalarIsShapeError) {
  ad::Tape t;
  ad::Value a = t.input(Matrix(2, 2));
  EXPECT_THROW(t.backward(a), cade::ShapeError);
}

TEST(Tape, ShapeMismatchIsShapeError) {
  ad::Tape t;
  EXPECT_THROW(ad::add(t.constant(Matrix(2, 3)), t.constant(Matrix(3, 2))), cade::ShapeError);
  EXPECT_THROW(ad::concat_cols(t.constant(Matrix(2, 3)), t.constant(Matrix(3, 3))), cade::ShapeError);
}

TEST(Tape, MaxTieRoutesGradientToFirstMaximum) {
  ad::Parameter w("w", Matrix{{1.0}, {1.0}});
  ad::Tape t;
  t.backward(ad::sum(ad::reduce_max_rows(t.parameter(w), 2)));
  EXPECT_EQ(w.grad(), (Matrix{{1.0}, {0.0}}));
}

TEST(GradCheck, RelativeErrorFloor) {
  EXPECT_DOUBLE_EQ(cade::relative_error(1.0, 1.5, 1e-4), 0.5 / 1.5);
  EXPECT_DOUBLE_EQ(cade::relative_error(0.0, 1e-9, 1e-4), 1e-9 / 1e-4);
}

TEST(GradCheck, DetectsAWrongGradient) {
  // d/dx of x^2 via a loss that hides part of the dependency.
  ad::Parameter w("w", Matrix{{0.5, -1.5}});
  ad::Parameter* params[] = {&w};
  const auto r = cade::grad_check(
      [&](ad::Tape& t) {
        ad::Value x = t.parameter(w);
        return ad::dot(x, ad::stop_gradient(x));
      },
      params);
  EXPECT_GT(r.max_rel_error, 0.4);
}

TEST(GradCheck, SuitePassesEveryOpAndObjective) {
  const auto report = cade::run_gradcheck_suite();
  EXPECT_GE(report.entries.size(), 25u);
  for (const auto& e : report.entries) EXPECT_LT(e.result.max_rel_error, 1e-6) << e.name;
  EXPECT_LT(report.worst, 1e-4);
}
