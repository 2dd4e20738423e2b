#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace kw {

/// Vertex of the integer lattice Z^2.
struct Point {
  int x1 = 0;
  int x2 = 0;

  friend bool operator==(const Point& a, const Point& b) {
    return a.x1 == b.x1 && a.x2 == b.x2;
  }
};

inline double norm(Point p) { return std::hypot(double(p.x1), double(p.x2)); }
inline long long norm_sq(Point p) {
  return (long long)p.x1 * p.x1 + (long long)p.x2 * p.x2;
}
inline int norm_taxicab(Point p) { return std::abs(p.x1) + std::abs(p.x2); }
inline int norm_inf(Point p) { return std::max(std::abs(p.x1), std::abs(p.x2)); }

enum class NormKind { euclidean_ball, taxicab_ball };

/// Finite box Q_R (euclidean or taxicab ball) with its one-ring boundary,
/// the computational stand-in for Z^2.  Interior points are enumerated in
/// lexicographic (x1,x2) order so that every reduction over the domain has a
/// fixed, reproducible order.
class TruncatedDomain {
 public:
  TruncatedDomain(int radius, NormKind kind = NormKind::euclidean_ball);

  int radius() const { return radius_; }
  NormKind norm_kind() const { return kind_; }

  bool is_interior(Point p) const { return cell(p) == 1; }
  bool is_boundary(Point p) const { return cell(p) == 2; }
  bool is_stored(Point p) const { return cell(p) != 0; }

  const std::vector<Point>& interior() const { return interior_; }
  const std::vector<Point>& boundary() const { return boundary_; }

  // Dense-grid indexing over [-radius-2, radius+2]^2; used by GridFunction.
  int side() const { return side_; }
  int origin_offset() const { return radius_ + 2; }
  std::size_t dense_index(Point p) const {
    return std::size_t(p.x1 + origin_offset()) * side_ + (p.x2 + origin_offset());
  }
  bool in_dense_range(Point p) const {
    return std::abs(p.x1) <= radius_ + 2 && std::abs(p.x2) <= radius_ + 2;
  }

 private:
  int8_t cell(Point p) const {
    if (!in_dense_range(p)) return 0;
    return status_[dense_index(p)];
  }

  int radius_;
  NormKind kind_;
  int side_;
  std::vector<int8_t> status_;  // 0 outside, 1 interior, 2 boundary
  std::vector<Point> interior_;
  std::vector<Point> boundary_;
};

using DomainPtr = std::shared_ptr<const TruncatedDomain>;

DomainPtr make_domain(int radius, NormKind kind = NormKind::euclidean_ball);

struct TailModel {
  enum class Kind { log, log_double_log };
  double slope_a = 0.0;     // u ~ -slope_a * ln|x| + constant_d
  double constant_d = 0.0;
  Kind kind = Kind::log;

  double eval(Point p, double kappa = 0.0) const;
};

/// Real values on interior + boundary of a TruncatedDomain, with an optional
/// asymptotic tail model for queries beyond the box.  Immutable by
/// convention once a solver hands one out.
class GridFunction {
 public:
  explicit GridFunction(DomainPtr domain, double fill = 0.0);

  const TruncatedDomain& domain() const { return *domain_; }
  DomainPtr domain_ptr() const { return domain_; }

  double at(Point p) const {
    if (!domain_->is_stored(p)) throw std::domain_error("GridFunction::at: point not stored");
    return values_[domain_->dense_index(p)];
  }
  void set(Point p, double v) {
    if (!domain_->is_stored(p)) throw std::domain_error("GridFunction::set: point not stored");
    values_[domain_->dense_index(p)] = v;
  }

  /// Stored value inside the box, tail model outside.
  double eval(Point p) const;

  // Raw dense access for kernels; cells outside interior+boundary read 0.
  double raw(Point p) const { return values_[domain_->dense_index(p)]; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  std::optional<TailModel> tail;
  double tail_kappa = 0.0;  // used by the double-log tail form

 private:
  DomainPtr domain_;
  std::vector<double> values_;
};

GridFunction delta_at(DomainPtr domain, Point p, double mass = 1.0);

/// 4-neighbor graph Laplacian, sum_{y~x} (f(y) - f(x)).
double laplacian(const GridFunction& f, Point x);

/// sup |f(x)| (1+|x|)^sigma over stored points (tail excluded).
double weighted_norm(const GridFunction& f, double sigma);

/// Lemma-style ordering ||f||_{sigma2} <= ||f||_{sigma1} for sigma1 > sigma2.
bool norm_ordering_check(const GridFunction& f, double sigma1, double sigma2);

/// Upper bound for sum_{|x|>r} |x|^{-sigma} (ln|x|)^{-rho} on Z^2.
/// Requires sigma > 2, r >= 4; the rho == -1 case has its own branch and
/// needs r >= 4 e^{2/(sigma-2)}.
double tail_bound(double sigma, double rho, double r);

/// Neumaier compensated accumulator; all lattice sums in the library go
/// through this in a fixed enumeration order.
class CompensatedSum {
 public:
  void add(double v) {
    double t = s_ + v;
    if (std::abs(s_) >= std::abs(v))
      c_ += (s_ - t) + v;
    else
      c_ += (v - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// Sum of f over interior + boundary, lexicographic order, compensated.
double lattice_sum(const GridFunction& f);

}  // namespace kw
