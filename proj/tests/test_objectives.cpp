#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "pflow/objectives.hpp"
#include "pflow/rng.hpp"

using namespace pflow;

namespace {

Mat random_mat(Index rows, Index cols, std::uint64_t seed, std::uint64_t stream = 4242) {
  Philox rng(seed, stream);
  Mat a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = rng.next_gaussian();
  return a;
}

// Central difference of a scalar function along direction d.
double directional_fd(const std::function<double(double)>& value_at, double h = 1e-6) {
  return (value_at(h) - value_at(-h)) / (2.0 * h);
}

void check_gradient_fd(const std::function<double(const Mat&)>& f, const Mat& at,
                       const Mat& grad, std::uint64_t seed, int dirs = 5) {
  for (int t = 0; t < dirs; ++t) {
    Mat d = random_mat(at.rows(), at.cols(), seed, 50 + static_cast<std::uint64_t>(t));
    d /= d.norm();
    const double fd = directional_fd([&](double h) { return f(at + h * d); });
    const double an = (grad.array() * d.array()).sum();
    CHECK(an == doctest::Approx(fd).epsilon(1e-5));
  }
}

}  // namespace

TEST_CASE("f value and gradient on symmetric ensembles") {
  const MeasurementOp op = spiked_gaussian_ensemble(8, 120, 3);
  const Mat x = random_mat(8, 2, 1);
  const Vec b = op.apply(x * x.transpose());
  const Mat u = random_mat(8, 2, 2);

  const ObjectiveEval eval = f_eval(op, b, u);
  CHECK(eval.residual.size() == 120);
  CHECK(eval.value ==
        doctest::Approx(0.25 * (op.apply(u * u.transpose()) - b).squaredNorm()));
  CHECK(eval.grad_v.size() == 0);

  check_gradient_fd([&](const Mat& w) { return f_eval(op, b, w).value; }, u,
                    eval.grad_u, 11);
}

TEST_CASE("f at zero is a quarter of ||b||^2") {
  const MeasurementOp op = spiked_gaussian_ensemble(6, 40, 5);
  const Vec b = Vec(random_mat(40, 1, 6));
  const ObjectiveEval eval = f_eval(op, b, Mat::Zero(6, 2));
  CHECK(eval.value == doctest::Approx(0.25 * b.squaredNorm()));
  CHECK(eval.grad_u.norm() == 0.0);
}

TEST_CASE("f uses the measurement matrices literally, no symmetrization") {
  // One deliberately asymmetric measurement matrix.
  Mat a = Mat::Zero(3, 3);
  a(0, 1) = 1.0;
  const MeasurementOp op = MeasurementOp::from_matrices({a}, false);
  const Mat u = random_mat(3, 1, 7);
  const Vec b = Vec::Zero(1);
  const ObjectiveEval eval = f_eval(op, b, u);
  // grad = A*(res) u with A*(res) = res_0 * A — asymmetric as given.
  const double res0 = (u * u.transpose())(0, 1);
  const Mat expect = res0 * a * u;
  CHECK((eval.grad_u - expect).norm() < 1e-14);
}

TEST_CASE("g value, residual and both gradients") {
  const MeasurementOp op = gaussian_ensemble(7, 5, 150, 9);
  const Mat x = random_mat(7, 2, 10);
  const Mat y = random_mat(5, 2, 11);
  const Vec b = op.apply(x * y.transpose());
  const Mat u = random_mat(7, 2, 12);
  const Mat v = random_mat(5, 2, 13);
  const FactorPair pair{u, v, false};

  const ObjectiveEval eval = g_eval(op, b, pair);
  const Mat gap = u.transpose() * u - v.transpose() * v;
  CHECK(eval.value ==
        doctest::Approx(0.5 * (op.apply(u * v.transpose()) - b).squaredNorm() +
                        gap.squaredNorm() / 16.0));

  check_gradient_fd(
      [&](const Mat& w) { return g_eval(op, b, FactorPair{w, v, false}).value; }, u,
      eval.grad_u, 21);
  check_gradient_fd(
      [&](const Mat& w) { return g_eval(op, b, FactorPair{u, w, false}).value; }, v,
      eval.grad_v, 22);
}

TEST_CASE("g regularizer vanishes on balanced factors") {
  const MeasurementOp op = gaussian_ensemble(6, 6, 80, 15);
  const Mat x = random_mat(6, 2, 16);
  const Vec b = op.apply(x * x.transpose());
  const FactorPair balanced{x, x, false};
  const ObjectiveEval eval = g_eval(op, b, balanced);
  CHECK(eval.value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eval.residual.norm() < 1e-10);
}

TEST_CASE("g gradient equals the naive per-matrix assembly") {
  const MeasurementOp op = gaussian_ensemble(5, 4, 30, 17);
  const Mat u = random_mat(5, 2, 18);
  const Mat v = random_mat(4, 2, 19);
  const Vec b = Vec(random_mat(30, 1, 20));
  const ObjectiveEval eval = g_eval(op, b, FactorPair{u, v, false});

  const Vec res = op.apply(u * v.transpose()) - b;
  Mat gu = 0.25 * u * (u.transpose() * u - v.transpose() * v);
  Mat gv = 0.25 * v * (v.transpose() * v - u.transpose() * u);
  for (Index k = 0; k < op.m(); ++k) {
    gu += res(k) * op.matrix(k) * v;
    gv += res(k) * op.matrix(k).transpose() * u;
  }
  CHECK((eval.grad_u - gu).norm() < 1e-12 * (1.0 + gu.norm()));
  CHECK((eval.grad_v - gv).norm() < 1e-12 * (1.0 + gv.norm()));
}

TEST_CASE("reference objective: scalar case and finite differences") {
  Mat u(1, 1), x(1, 1);
  u << 2.0;
  x << 1.0;
  const ObjectiveEval scalar = ref_f_eval(u, x);
  CHECK(scalar.value == doctest::Approx(2.25));   // (4-1)^2 / 4
  CHECK(scalar.grad_u(0, 0) == doctest::Approx(6.0));  // (4-1)*2

  const Mat uu = random_mat(6, 2, 23);
  const Mat xx = random_mat(6, 2, 24);
  const ObjectiveEval eval = ref_f_eval(uu, xx);
  check_gradient_fd([&](const Mat& w) { return ref_f_eval(w, xx).value; }, uu,
                    eval.grad_u, 31);
}

TEST_CASE("reference objective on rectangular pairs uses the stacked factors") {
  const FactorPair pair{random_mat(5, 2, 25), random_mat(4, 2, 26), false};
  const FactorPair truth{random_mat(5, 2, 27), random_mat(4, 2, 28), false};
  const ObjectiveEval eval = ref_f_eval(pair, truth);
  const ObjectiveEval direct = ref_f_eval(pair.stacked(), truth.stacked());
  CHECK(eval.value == doctest::Approx(direct.value));
  CHECK((eval.grad_u - direct.grad_u.topRows(5)).norm() == 0.0);
  CHECK((eval.grad_v - direct.grad_u.bottomRows(4)).norm() == 0.0);

  check_gradient_fd(
      [&](const Mat& w) { return ref_f_eval(FactorPair{w, pair.v, false}, truth).value; },
      pair.u, eval.grad_u, 33);
  check_gradient_fd(
      [&](const Mat& w) { return ref_f_eval(FactorPair{pair.u, w, false}, truth).value; },
      pair.v, eval.grad_v, 34);

  // PSD pairs collapse to the symmetric form.
  const FactorPair ppair{random_mat(5, 2, 29), random_mat(5, 2, 29), true};
  const FactorPair ptruth{random_mat(5, 2, 35), random_mat(5, 2, 35), true};
  const ObjectiveEval psd = ref_f_eval(ppair, ptruth);
  const ObjectiveEval psd_direct = ref_f_eval(ppair.u, ptruth.u);
  CHECK(psd.value == doctest::Approx(psd_direct.value));
  CHECK((psd.grad_u - psd_direct.grad_u).norm() == 0.0);
}

TEST_CASE("objective shape validation") {
  const MeasurementOp rect = gaussian_ensemble(4, 3, 10, 40);
  CHECK_THROWS_AS(f_eval(rect, Vec::Zero(10), Mat::Zero(4, 1)), InvalidInput);
  const MeasurementOp sq = gaussian_ensemble(4, 4, 10, 41);
  CHECK_THROWS_AS(f_eval(sq, Vec::Zero(9), Mat::Zero(4, 1)), InvalidInput);
  CHECK_THROWS_AS(f_eval(sq, Vec::Zero(10), Mat::Zero(5, 1)), InvalidInput);
  CHECK_THROWS_AS(
      g_eval(rect, Vec::Zero(10), FactorPair{Mat::Zero(4, 2), Mat::Zero(3, 1), false}),
      InvalidInput);
  CHECK_THROWS_AS(ref_f_eval(Mat::Zero(3, 1), Mat::Zero(4, 1)), InvalidInput);
}
