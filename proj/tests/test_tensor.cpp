#include <random>

#include "dissipnet/tensor.hpp"
#include "doctest.h"

using namespace dn;

namespace {

std::mt19937_64 rng(42);

Tensor3 random_mat(double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Tensor3 m;
  for (int i = 0; i < 9; ++i) m.a[i] = nd(rng);
  return m;
}

SymTensor3 random_sym(double scale = 1.0) { return sym(random_mat(scale)); }

SymTensor3 random_spd(double shift = 0.1) {
  Tensor3 a = random_mat();
  return sym(transpose(a) * a + Tensor3::diag(shift, shift, shift));
}

Tensor3 random_rotation() {
  std::normal_distribution<double> nd(0.0, 1.0);
  UnitVector3 n = make_unit(nd(rng), nd(rng), nd(rng));
  Tensor3 R1 = rodrigues(n);
  std::uniform_real_distribution<double> ud(0.0, 6.283185307179586);
  double th = ud(rng);
  double c = std::cos(th), s = std::sin(th);
  Tensor3 R2 = Tensor3::zero();
  R2(0, 0) = 1.0;
  R2(1, 1) = c;
  R2(1, 2) = -s;
  R2(2, 1) = s;
  R2(2, 2) = c;
  return R1 * R2;
}

}  // namespace

TEST_CASE("det basics") {
  CHECK(det(Tensor3::identity()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(det(Tensor3::diag(2, 3, 4)) == doctest::Approx(24.0).epsilon(1e-15));
  Tensor3 m = random_mat();
  for (int j = 0; j < 3; ++j) m(2, j) = m(0, j);  // two equal rows
  CHECK(std::abs(det(m)) < 1e-14);
}

TEST_CASE("cof basics and identity cof A = det(A) A^-T") {
  Tensor3 I = Tensor3::identity();
  CHECK(norm(cof(I) - I) < 1e-15);
  Tensor3 d = cof(Tensor3::diag(2, 3, 4));
  CHECK(norm(d - Tensor3::diag(12, 8, 6)) < 1e-13);

  UnitVector3 a = make_unit(1.0, -2.0, 0.5);
  Tensor3 r1 = outer(a, a);
  CHECK(norm(cof(r1)) < 1e-14);

  for (int t = 0; t < 1000; ++t) {
    Tensor3 m = random_mat();
    if (std::abs(det(m)) < 1e-3) continue;
    Tensor3 lhs = cof(m);
    Tensor3 rhs = det(m) * transpose(inverse(m));
    CHECK(norm(lhs - rhs) <= 1e-10 * std::max(1.0, norm(rhs)));
  }
}

TEST_CASE("eig_sym reconstructs and orders") {
  EigSym e = eig_sym(SymTensor3::identity());
  CHECK(e.w[0] == doctest::Approx(1.0));
  CHECK(e.w[2] == doctest::Approx(1.0));

  e = eig_sym(SymTensor3::diag(3, 2, 1));
  CHECK(e.w[0] == doctest::Approx(3.0));
  CHECK(e.w[1] == doctest::Approx(2.0));
  CHECK(e.w[2] == doctest::Approx(1.0));

  for (int t = 0; t < 2000; ++t) {
    SymTensor3 A = random_sym(t % 3 == 0 ? 1e-4 : 2.0);
    if (t % 7 == 0) {
      // near-degenerate spectra exercise the Jacobi fallback
      A = SymTensor3::diag(1.0, 1.0 + 1e-10, 1.0 - 1e-10);
      SymTensor3 p = random_sym(1e-9);
      A = A + p;
    }
    EigSym e2 = eig_sym(A);
    SymTensor3 R = SymTensor3::zero();
    for (int k = 0; k < 3; ++k) {
      R.a[0] += e2.w[k] * e2.v[k][0] * e2.v[k][0];
      R.a[1] += e2.w[k] * e2.v[k][1] * e2.v[k][1];
      R.a[2] += e2.w[k] * e2.v[k][2] * e2.v[k][2];
      R.a[3] += e2.w[k] * e2.v[k][0] * e2.v[k][1];
      R.a[4] += e2.w[k] * e2.v[k][0] * e2.v[k][2];
      R.a[5] += e2.w[k] * e2.v[k][1] * e2.v[k][2];
    }
    CHECK(norm(R - A) <= 1e-12 * std::max(1.0, norm(A)));
    CHECK(e2.w[0] >= e2.w[1]);
    CHECK(e2.w[1] >= e2.w[2]);
    // orthonormal basis
    CHECK(std::abs(dot(e2.v[0], e2.v[1])) < 1e-10);
    CHECK(std::abs(norm(e2.v[2]) - 1.0) < 1e-10);
  }
}

TEST_CASE("sqrt_spd") {
  CHECK(norm(sqrt_spd(SymTensor3::identity()) - SymTensor3::identity()) <
        1e-14);
  CHECK(norm(sqrt_spd(SymTensor3::diag(4, 9, 16)) -
             SymTensor3::diag(2, 3, 4)) < 1e-12);
  for (int t = 0; t < 500; ++t) {
    SymTensor3 A = random_spd();
    SymTensor3 R = sqrt_spd(A);
    CHECK(norm(sym(R.full() * R.full()) - A) <= 1e-12 * norm(A));
  }
  CHECK_THROWS_AS(sqrt_spd(SymTensor3::diag(1, 1, -1)), std::domain_error);
}

TEST_CASE("expm_sym against the series oracle") {
  CHECK(norm(expm_sym(SymTensor3::zero()) - SymTensor3::identity()) < 1e-15);
  SymTensor3 d = expm_sym(SymTensor3::diag(1, 2, -1));
  CHECK(d.a[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-13));
  CHECK(d.a[1] == doctest::Approx(std::exp(2.0)).epsilon(1e-13));
  CHECK(d.a[2] == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));

  for (int t = 0; t < 500; ++t) {
    SymTensor3 A = random_sym(1.5);
    SymTensor3 E = expm_sym(A);
    SymTensor3 Eo = expm_series(A);
    CHECK(norm(E - Eo) <= 1e-10 * std::max(1.0, norm(Eo)));
    // det(exp A) = exp(tr A)
    CHECK(det(E) == doctest::Approx(std::exp(trace(A))).epsilon(1e-12));
  }
}

TEST_CASE("expm inverse identity") {
  for (int t = 0; t < 1000; ++t) {
    SymTensor3 A = random_sym(1.0);
    double n = norm(A);
    if (n > 5.0) A = (5.0 / n) * A;
    Tensor3 p = expm_sym(A).full() * expm_sym((-1.0) * A).full();
    CHECK(norm(p - Tensor3::identity()) <= 1e-10);
  }
}

TEST_CASE("dev") {
  CHECK(norm(dev(Tensor3::identity())) < 1e-15);
  Tensor3 t1 = Tensor3::diag(2, -1, -1);
  CHECK(norm(dev(t1) - t1) < 1e-15);
  CHECK(norm(dev(Tensor3::diag(3, 0, 0)) - Tensor3::diag(2, -1, -1)) < 1e-14);
  for (int t = 0; t < 100; ++t)
    CHECK(std::abs(trace(dev(random_mat(10.0)))) < 1e-13);
}

TEST_CASE("outer_hash") {
  UnitVector3 e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};
  Tensor3 h = outer_hash(outer(e1, e1), outer(e2, e2));
  CHECK(norm(h - outer(e3, e3)) < 1e-14);

  // I # M = I - M for M = n (x) n
  UnitVector3 n = make_unit(0.3, -0.5, 0.81);
  Tensor3 M = outer(n, n);
  CHECK(norm(outer_hash(Tensor3::identity(), M) -
             (Tensor3::identity() - M)) < 1e-13);

  // B # (g (x) g) is positive semi-definite for SPD B
  for (int t = 0; t < 200; ++t) {
    SymTensor3 B = random_spd();
    std::normal_distribution<double> nd(0.0, 1.0);
    UnitVector3 g = make_unit(nd(rng), nd(rng), nd(rng));
    SymTensor3 H = sym(outer_hash(B.full(), outer(g, g)));
    EigSym e = eig_sym(H);
    CHECK(e.w[2] >= -1e-12 * std::max(1.0, norm(H)));
  }
}

TEST_CASE("outer_hash covariance under inversion-transpose") {
  // (P A P^-1) # (P B P^-1) = P^-T (A # B) P^T
  for (int t = 0; t < 1000; ++t) {
    SymTensor3 A = random_sym(), B = random_sym();
    Tensor3 P = random_rotation();  // random invertible; rotations suffice
    if (t % 2) P = P * Tensor3::diag(1.3, 0.8, 1.1);
    Tensor3 Pi = inverse(P);
    Tensor3 lhs = outer_hash(P * A.full() * Pi, P * B.full() * Pi);
    Tensor3 rhs = transpose(Pi) * outer_hash(A.full(), B.full()) * transpose(P);
    CHECK(norm(lhs - rhs) <= 1e-10 * std::max(1.0, norm(rhs)));
  }
}

TEST_CASE("rodrigues") {
  CHECK(norm(rodrigues(UnitVector3{1, 0, 0}) - Tensor3::identity()) < 1e-14);

  Tensor3 R = rodrigues(UnitVector3{0, 1, 0});
  Tensor3 expect = Tensor3::zero();
  expect(0, 1) = -1;
  expect(1, 0) = 1;
  expect(2, 2) = 1;
  CHECK(norm(R - expect) < 1e-13);

  Tensor3 Ra = rodrigues(UnitVector3{-1, 0, 0});
  Vec3<double> im = Ra * Vec3<double>{1, 0, 0};
  CHECK(im[0] == doctest::Approx(-1.0));
  CHECK(det(Ra) == doctest::Approx(1.0).epsilon(1e-12));

  for (int t = 0; t < 200; ++t) {
    std::normal_distribution<double> nd(0.0, 1.0);
    UnitVector3 n = make_unit(nd(rng), nd(rng), nd(rng));
    Tensor3 Rn = rodrigues(n);
    Vec3<double> e1n = Rn * Vec3<double>{1, 0, 0};
    CHECK(std::abs(e1n[0] - n[0]) < 1e-12);
    CHECK(std::abs(e1n[1] - n[1]) < 1e-12);
    CHECK(std::abs(e1n[2] - n[2]) < 1e-12);
    CHECK(det(Rn) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cholesky_from_states") {
  std::array<double, 6> h{};
  CHECK(norm(cholesky_from_states(h) - SymTensor3::identity()) < 1e-15);

  h = {1, 0, 0, 0, 0, 0};
  double f1 = std::log(3.0) / std::log(2.0);
  SymTensor3 u = cholesky_from_states(h);
  CHECK(u.a[0] == doctest::Approx(f1 * f1).epsilon(1e-12));
  CHECK(u.a[1] == doctest::Approx(1.0));
  CHECK(u.a[2] == doctest::Approx(1.0));

  h = {0, 0, 0, 1, 0, 0};
  u = cholesky_from_states(h);
  CHECK(u(0, 0) == doctest::Approx(1.0));
  CHECK(u(0, 1) == doctest::Approx(1.0));
  CHECK(u(1, 1) == doctest::Approx(2.0));
  CHECK(u(2, 2) == doctest::Approx(1.0));
  CHECK(u(0, 2) == doctest::Approx(0.0));

  // SPD for random states with |h| <= 10
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> rd(0.0, 10.0);
  for (int t = 0; t < 10000; ++t) {
    std::array<double, 6> hh;
    double n2 = 0.0;
    for (auto& x : hh) {
      x = nd(rng);
      n2 += x * x;
    }
    double scale = rd(rng) / std::sqrt(n2);
    for (auto& x : hh) x *= scale;
    SymTensor3 U = cholesky_from_states(hh);
    CHECK(is_spd(U));
    EigSym e = eig_sym(U);
    CHECK(e.w[2] > 0.0);
  }
}

TEST_CASE("is_spd") {
  CHECK(is_spd(SymTensor3::identity()));
  CHECK(!is_spd(SymTensor3::diag(1, -1, 1)));
  for (int t = 0; t < 100; ++t) CHECK(is_spd(random_spd()));
}
