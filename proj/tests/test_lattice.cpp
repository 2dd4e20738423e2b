#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "kw/lattice.hpp"

using namespace kw;

TEST_CASE("domain enumeration and point counts") {
  auto d = make_domain(3);
  CHECK(d->interior().size() == 29);  // |x|^2 <= 9
  auto t = make_domain(2, NormKind::taxicab_ball);
  CHECK(t->interior().size() == 13);

  // Lexicographic order of the interior enumeration.
  for (std::size_t i = 1; i < d->interior().size(); ++i) {
    Point a = d->interior()[i - 1], b = d->interior()[i];
    CHECK((a.x1 < b.x1 || (a.x1 == b.x1 && a.x2 < b.x2)));
  }
  for (Point q : d->boundary()) {
    CHECK(!d->is_interior(q));
    bool adjacent = false;
    for (Point s : {Point{1, 0}, Point{-1, 0}, Point{0, 1}, Point{0, -1}})
      if (d->is_interior({q.x1 + s.x1, q.x2 + s.x2})) adjacent = true;
    CHECK(adjacent);
  }
}

TEST_CASE("laplacian kills affine functions") {
  auto d = make_domain(6);
  GridFunction f(d);
  for (Point p : d->interior()) f.set(p, 3.0 * p.x1 - 2.0 * p.x2 + 1.5);
  for (Point p : d->boundary()) f.set(p, 3.0 * p.x1 - 2.0 * p.x2 + 1.5);
  for (Point p : d->interior()) CHECK(laplacian(f, p) == doctest::Approx(0.0).epsilon(1e-14));

  GridFunction g(d);
  for (Point p : d->interior()) g.set(p, double(p.x1) * p.x1);
  for (Point p : d->boundary()) g.set(p, double(p.x1) * p.x1);
  for (Point p : d->interior()) CHECK(laplacian(g, p) == doctest::Approx(2.0));
}

TEST_CASE("delta and lattice_sum") {
  auto d = make_domain(5);
  GridFunction f = delta_at(d, {1, -2}, 3.5);
  CHECK(lattice_sum(f) == 3.5);
  CHECK(f.at({1, -2}) == 3.5);
  CHECK(f.at({0, 0}) == 0.0);
}

TEST_CASE("weighted norm ordering") {
  auto d = make_domain(10);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  GridFunction f(d);
  for (Point p : d->interior()) f.set(p, unif(rng));
  CHECK(norm_ordering_check(f, 3.0, 2.0));
  CHECK(norm_ordering_check(f, 4.5, 0.5));
  CHECK_THROWS_AS(norm_ordering_check(f, 2.0, 3.0), std::invalid_argument);
}

TEST_CASE("tail_bound closed forms") {
  // sigma = 4, rho = 0, r = 4: pi 2^7 (1/2) 4^{-2} = 4 pi.
  CHECK(tail_bound(4.0, 0.0, 4.0) == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-12));
  // rho = -1 branch: pi 2^{11}/2 r^{-2} ln r.
  double r = 16.0;
  CHECK(tail_bound(4.0, -1.0, r) ==
        doctest::Approx(std::numbers::pi * 1024.0 / (r * r) * std::log(r)).epsilon(1e-12));
  CHECK_THROWS_AS(tail_bound(2.0, 0.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(tail_bound(4.0, 0.0, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(tail_bound(4.0, -1.0, 4.0), std::invalid_argument);  // below 4 e^{2/(sigma-2)}
}

TEST_CASE("tail_bound dominates the head of the actual series") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> sig(2.4, 6.0), rho_d(-1.8, 2.0), r_d(6.0, 40.0);
  for (int trial = 0; trial < 100; ++trial) {
    double sigma = sig(rng), rho = rho_d(rng), r = r_d(rng);
    double bound = tail_bound(sigma, rho, r);
    CompensatedSum head;
    int lim = 300;
    for (int x1 = -lim; x1 <= lim; ++x1)
      for (int x2 = -lim; x2 <= lim; ++x2) {
        double rr = std::hypot(double(x1), double(x2));
        if (rr <= r) continue;
        head.add(std::pow(rr, -sigma) * std::pow(std::log(rr), -rho));
      }
    CHECK(head.value() <= bound);
  }
}

TEST_CASE("tail model evaluation") {
  auto d = make_domain(4);
  GridFunction f(d);
  f.tail = TailModel{1.5, 2.0, TailModel::Kind::log};
  Point far{100, 0};
  CHECK(f.eval(far) == doctest::Approx(-1.5 * std::log(100.0) + 2.0));
  GridFunction g(d);
  CHECK_THROWS_AS(g.eval(far), std::domain_error);
}
