#include "kw/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace kw {

namespace {

bool inside(Point p, int radius, NormKind kind) {
  if (kind == NormKind::euclidean_ball)
    return norm_sq(p) <= (long long)radius * radius;
  return norm_taxicab(p) <= radius;
}

constexpr Point kNeighborSteps[4] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};

}  // namespace

TruncatedDomain::TruncatedDomain(int radius, NormKind kind)
    : radius_(radius), kind_(kind) {
  if (radius < 1) throw std::invalid_argument("TruncatedDomain: radius must be >= 1");
  side_ = 2 * (radius_ + 2) + 1;
  status_.assign(std::size_t(side_) * side_, 0);

  for (int x1 = -radius_; x1 <= radius_; ++x1)
    for (int x2 = -radius_; x2 <= radius_; ++x2) {
      Point p{x1, x2};
      if (inside(p, radius_, kind_)) {
        status_[dense_index(p)] = 1;
        interior_.push_back(p);
      }
    }
  // Boundary ring: outside points adjacent to the interior.
  for (int x1 = -radius_ - 1; x1 <= radius_ + 1; ++x1)
    for (int x2 = -radius_ - 1; x2 <= radius_ + 1; ++x2) {
      Point p{x1, x2};
      if (status_[dense_index(p)] == 1) continue;
      bool adjacent = false;
      for (Point s : kNeighborSteps) {
        Point q{p.x1 + s.x1, p.x2 + s.x2};
        if (in_dense_range(q) && status_[dense_index(q)] == 1) adjacent = true;
      }
      if (adjacent) {
        status_[dense_index(p)] = 2;
        boundary_.push_back(p);
      }
    }
}

DomainPtr make_domain(int radius, NormKind kind) {
  return std::make_shared<const TruncatedDomain>(radius, kind);
}

double TailModel::eval(Point p, double kappa) const {
  double r = norm(p);
  if (kind == Kind::log) return -slope_a * std::log(r) + constant_d;
  // Double-log form of the extremal solution; both log slopes pinned to 2/kappa.
  (void)kappa;
  return -slope_a * (std::log(r) + std::log(std::log(r))) + constant_d;
}

GridFunction::GridFunction(DomainPtr domain, double fill)
    : domain_(std::move(domain)) {
  values_.assign(std::size_t(domain_->side()) * domain_->side(), 0.0);
  if (fill != 0.0) {
    for (Point p : domain_->interior()) values_[domain_->dense_index(p)] = fill;
    for (Point p : domain_->boundary()) values_[domain_->dense_index(p)] = fill;
  }
}

double GridFunction::eval(Point p) const {
  if (domain_->is_stored(p)) return values_[domain_->dense_index(p)];
  if (!tail) throw std::domain_error("GridFunction::eval: point beyond box and no tail model");
  return tail->eval(p, tail_kappa);
}

GridFunction delta_at(DomainPtr domain, Point p, double mass) {
  GridFunction f(std::move(domain));
  f.set(p, mass);
  return f;
}

double laplacian(const GridFunction& f, Point x) {
  const auto& d = f.domain();
  if (!d.is_interior(x)) throw std::domain_error("laplacian: point not interior");
  double fx = f.raw(x);
  double s = 0.0;
  for (Point st : kNeighborSteps) s += f.raw({x.x1 + st.x1, x.x2 + st.x2}) - fx;
  return s;
}

double weighted_norm(const GridFunction& f, double sigma) {
  const auto& d = f.domain();
  double best = 0.0;
  auto scan = [&](const std::vector<Point>& pts) {
    for (Point p : pts) {
      double v = std::abs(f.raw(p)) * std::pow(1.0 + norm(p), sigma);
      best = std::max(best, v);
    }
  };
  scan(d.interior());
  scan(d.boundary());
  return best;
}

bool norm_ordering_check(const GridFunction& f, double sigma1, double sigma2) {
  if (sigma1 <= sigma2)
    throw std::invalid_argument("norm_ordering_check: requires sigma1 > sigma2");
  return weighted_norm(f, sigma2) <= weighted_norm(f, sigma1) * (1.0 + 1e-14);
}

namespace {

// Descending product b (b-1) ... (b - ceil(b) + 1), with b! = 1 on [0,1].
double ceil_factorial(double b) {
  if (b < 0.0) throw std::invalid_argument("ceil_factorial: negative argument");
  if (b <= 1.0) return 1.0;
  int n = int(std::ceil(b));
  double prod = 1.0;
  for (int k = 0; k < n; ++k) prod *= b - k;
  return prod;
}

}  // namespace

double tail_bound(double sigma, double rho, double r) {
  if (sigma <= 2.0) throw std::invalid_argument("tail_bound: sigma must be > 2");
  if (rho == -1.0) {
    double rmin = 4.0 * std::exp(2.0 / (sigma - 2.0));
    if (r < rmin) throw std::invalid_argument("tail_bound: r below rho=-1 branch threshold");
    return M_PI * std::pow(2.0, 2.0 * sigma + 3.0) / (sigma - 2.0) *
           std::pow(r, 2.0 - sigma) * std::log(r);
  }
  if (r < 4.0) throw std::invalid_argument("tail_bound: requires r >= 4");
  double varpi;
  if (rho < 0.0) {
    double n = std::ceil(-rho);
    varpi = ceil_factorial(n) * std::pow(sigma, n) / std::pow(sigma - 2.0, n + 1.0);
  } else {
    varpi = 1.0 / (sigma - 2.0);
  }
  return M_PI * std::pow(2.0, 2.0 * sigma + 2.0 * std::abs(rho) - 1.0) * varpi *
         std::pow(r, 2.0 - sigma) * std::pow(std::log(r), -rho);
}

double lattice_sum(const GridFunction& f) {
  CompensatedSum s;
  for (Point p : f.domain().interior()) s.add(f.raw(p));
  for (Point p : f.domain().boundary()) s.add(f.raw(p));
  return s.value();
}

}  // namespace kw
