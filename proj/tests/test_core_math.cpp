#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "e2nn/distributions.hpp"
#include "e2nn/error.hpp"
#include "e2nn/linalg.hpp"
#include "support.hpp"

using namespace e2nn;
using e2nn::testing::simpson;

namespace {

// Minimum-norm least squares through the eigendecomposition of A^T A.
Vector min_norm_oracle(const Matrix& a, const Vector& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = 1e-12 * lambda.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > cutoff) inv(i) = 1.0 / lambda(i);
  }
  const Matrix& v = eig.eigenvectors();
  return v * inv.asDiagonal() * v.transpose() * a.transpose() * b;
}

template <class E>
ErrorCode code_of(E&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an e2nn::Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("pinv_solve on an identity design returns the targets") {
  const auto sol = pinv_solve(Matrix::Identity(2, 2), Vector{{3.0, 5.0}}, 1e-10);
  CHECK(sol.weights(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(sol.weights(1) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(sol.max_abs_weight == doctest::Approx(5.0));
  CHECK(sol.residual_nrmse < 1e-14);
}

TEST_CASE("pinv_solve gives the minimum-norm solution for collinear columns") {
  Matrix a(3, 2);
  a << 1.0, 2.0, 2.0, 4.0, -1.0, -2.0;
  const Vector b{{0.7, -1.3, 2.2}};
  const auto sol = pinv_solve(a, b, 1e-10);
  const Vector expect = min_norm_oracle(a, b);
  CHECK((sol.weights - expect).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(sol.weights.norm() - expect.norm()) < 1e-8);
}

TEST_CASE("pinv_solve interpolates a quadratic through a Vandermonde design") {
  Matrix v(3, 3);
  const double xs[] = {0.0, 0.5, 1.0};
  Vector y(3);
  for (int i = 0; i < 3; ++i) {
    v(i, 0) = 1.0;
    v(i, 1) = xs[i];
    v(i, 2) = xs[i] * xs[i];
    y(i) = xs[i] * xs[i];
  }
  const auto sol = pinv_solve(v, y, 1e-10);
  CHECK(std::abs(sol.weights(0)) < 1e-8);
  CHECK(std::abs(sol.weights(1)) < 1e-8);
  CHECK(std::abs(sol.weights(2) - 1.0) < 1e-8);
}

TEST_CASE("pinv_solve with a tiny rcond interpolates a full-rank design") {
  Matrix a = Matrix::Random(6, 9);
  const Vector b = Vector::Random(6);
  const auto sol = pinv_solve(a, b, 1e-15);
  CHECK(sol.residual_nrmse < 1e-10);
}

TEST_CASE("pinv_solve rejects bad input") {
  CHECK(code_of([] { (void)pinv_solve(Matrix(0, 0), Vector(0)); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { (void)pinv_solve(Matrix::Identity(2, 2), Vector::Ones(3)); }) ==
        ErrorCode::DimensionMismatch);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { (void)pinv_solve(bad, Vector::Ones(2)); }) == ErrorCode::NonFinite);
  CHECK(code_of([] { (void)pinv_solve(Matrix::Identity(2, 2), Vector{{1.0, INFINITY}}); }) ==
        ErrorCode::NonFinite);
  CHECK(code_of([] { (void)pinv_solve(Matrix::Identity(2, 2), Vector::Ones(2), 0.0); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([] { (void)pinv_solve(Matrix::Identity(2, 2), Vector::Ones(2), 1.0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("ridge_solve") {
  SUBCASE("lambda = 0 matches pinv_solve on a full-rank square design") {
    Matrix a(3, 3);
    a << 4.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.5, -1.0, 2.0;
    const Vector b{{1.0, -2.0, 0.5}};
    CHECK((ridge_solve(a, b, 0.0).weights - pinv_solve(a, b).weights).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("1x1 closed form") {
    const auto sol = ridge_solve(Matrix::Ones(1, 1), Vector::Ones(1), 1.0);
    CHECK(sol.weights(0) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("huge lambda shrinks everything") {
    const auto sol = ridge_solve(Matrix::Random(5, 4), Vector::Random(5), 1e12);
    CHECK(sol.weights.cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("negative lambda is rejected") {
    CHECK(code_of([] { (void)ridge_solve(Matrix::Ones(1, 1), Vector::Ones(1), -1.0); }) ==
          ErrorCode::InvalidArgument);
  }
}

TEST_CASE("nrmse") {
  const std::vector<double> truths{2.0, 4.0};
  CHECK(nrmse(truths, truths) == 0.0);
  const std::vector<double> mean_pred{3.0, 3.0};
  CHECK(nrmse(mean_pred, truths) == doctest::Approx(1.0));
  const std::vector<double> pred{1.0, 2.0};
  CHECK(nrmse(pred, truths) == doctest::Approx(std::sqrt(2.5)));

  const std::vector<double> flat{1.0, 1.0, 1.0};
  CHECK(code_of([&] { (void)nrmse(flat, flat); }) == ErrorCode::DegenerateTruths);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS((void)nrmse(one, one), Error);
  CHECK(code_of([&] { (void)nrmse(pred, flat); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("normal pdf and cdf") {
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
  CHECK(normal_cdf(0.0) == 0.5);
  const double integral = simpson(e2nn::testing::oracle_normal_pdf, -40.0, 1.96);
  CHECK(integral == doctest::Approx(0.9750).epsilon(1e-4));
  CHECK(std::abs(normal_cdf(1.96) - integral) < 1e-4);
  CHECK(std::abs(normal_cdf(1.96) - integral) < 1e-10);
}

TEST_CASE("Student-t pdf and cdf") {
  CHECK(t_pdf(0.0, 1.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
  for (double nu : {0.5, 1.0, 3.0, 30.0, 1e6}) CHECK(t_cdf(0.0, nu) == doctest::Approx(0.5));

  SUBCASE("t_pdf matches an independently coded density") {
    for (double nu : {1.0, 2.5, 7.0, 100.0}) {
      for (double z = -6.0; z <= 6.0; z += 0.25) {
        CHECK(t_pdf(z, nu) == doctest::Approx(e2nn::testing::oracle_t_pdf(z, nu)).epsilon(1e-12));
      }
    }
  }
  SUBCASE("t_cdf against quadrature of the density") {
    for (double nu : {3.0, 10.0}) {
      for (double z : {-2.0, -0.5, 0.7, 1.5, 3.0}) {
        const double q = 0.5 + simpson([nu](double u) { return e2nn::testing::oracle_t_pdf(u, nu); }, 0.0, z);
        CHECK(std::abs(t_cdf(z, nu) - q) < 1e-10);
      }
    }
  }
  SUBCASE("large nu approaches the normal") {
    for (double z = -4.0; z <= 4.0; z += 0.1) {
      const double q = 0.5 + simpson([](double u) { return e2nn::testing::oracle_t_pdf(u, 1000.0); }, 0.0, z);
      CHECK(std::abs(q - normal_cdf(z)) < 1e-3);
      CHECK(std::abs(t_cdf(z, 1000.0) - normal_cdf(z)) < 1e-3);
      CHECK(std::abs(t_cdf(z, 1e4) - normal_cdf(z)) < 1e-3);
    }
  }
  SUBCASE("t_quantile inverts t_cdf") {
    for (double nu : {3.0, 15.0}) {
      for (double p : {0.025, 0.3, 0.975}) CHECK(t_cdf(t_quantile(p, nu), nu) == doctest::Approx(p).epsilon(1e-12));
    }
  }
  SUBCASE("non-positive dof") {
    CHECK(code_of([] { (void)t_pdf(0.0, 0.0); }) == ErrorCode::InvalidDof);
    CHECK(code_of([] { (void)t_cdf(0.0, -1.0); }) == ErrorCode::InvalidDof);
  }
}

TEST_CASE("densities integrate to one on [-50, 50]") {
  CHECK(std::abs(simpson([](double z) { return normal_pdf(z); }, -50.0, 50.0, 200000) - 1.0) < 1e-6);
  // Below nu = 5 the tail mass beyond |z| = 50 alone exceeds 1e-6.
  for (double nu : {5.0, 10.0, 100.0}) {
    const double mass = simpson([nu](double z) { return t_pdf(z, nu); }, -50.0, 50.0, 200000);
    CHECK(std::abs(mass - 1.0) < 1e-6);
  }
}
