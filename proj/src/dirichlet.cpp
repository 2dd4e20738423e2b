#include "kw/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace kw {

namespace {

constexpr Point kSteps[4] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};

// Index of every interior point in the dense grid, -1 elsewhere.
std::vector<int> interior_index(const TruncatedDomain& d) {
  std::vector<int> idx(std::size_t(d.side()) * d.side(), -1);
  int k = 0;
  for (Point p : d.interior()) idx[d.dense_index(p)] = k++;
  return idx;
}

// Effective right-hand side: rhs plus boundary values moved across.
std::vector<double> effective_rhs(const DirichletProblem& p) {
  const auto& d = *p.domain;
  std::vector<double> b(d.interior().size());
  for (std::size_t i = 0; i < d.interior().size(); ++i) {
    Point x = d.interior()[i];
    double v = p.rhs.raw(x);
    for (Point s : kSteps) {
      Point q{x.x1 + s.x1, x.x2 + s.x2};
      if (d.is_boundary(q)) v += p.boundary.raw(q);
    }
    b[i] = v;
  }
  return b;
}

GridFunction pack_solution(const DirichletProblem& p, const std::vector<double>& u) {
  GridFunction out(p.domain);
  const auto& d = *p.domain;
  for (std::size_t i = 0; i < d.interior().size(); ++i)
    out.set(d.interior()[i], u[i]);
  for (Point q : d.boundary()) out.set(q, p.boundary.raw(q));
  return out;
}

// A v for the Dirichlet operator (4 + c) I - adjacency, interior only.
void apply_op(const DirichletProblem& p, const std::vector<int>& idx,
              const std::vector<double>& v, std::vector<double>& out) {
  const auto& d = *p.domain;
  ptrdiff_t n = ptrdiff_t(d.interior().size());
#pragma omp parallel for schedule(static)
  for (ptrdiff_t i = 0; i < n; ++i) {
    Point x = d.interior()[std::size_t(i)];
    double diag = 4.0 + (p.coeff ? p.coeff->raw(x) : 0.0);
    double s = diag * v[std::size_t(i)];
    for (Point st : kSteps) {
      Point q{x.x1 + st.x1, x.x2 + st.x2};
      int j = idx[d.dense_index(q)];
      if (j >= 0) s -= v[std::size_t(j)];
    }
    out[std::size_t(i)] = s;
  }
}

std::vector<double> solve_direct(const DirichletProblem& p, const std::vector<int>& idx,
                                 const std::vector<double>& b) {
  const auto& d = *p.domain;
  int n = int(d.interior().size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(n) * 5);
  for (int i = 0; i < n; ++i) {
    Point x = d.interior()[std::size_t(i)];
    trips.emplace_back(i, i, 4.0 + (p.coeff ? p.coeff->raw(x) : 0.0));
    for (Point st : kSteps) {
      Point q{x.x1 + st.x1, x.x2 + st.x2};
      int j = idx[d.dense_index(q)];
      if (j >= 0) trips.emplace_back(i, j, -1.0);
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(A);
  if (chol.info() != Eigen::Success)
    throw std::runtime_error("solve_dirichlet: factorization failed");
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
  Eigen::VectorXd u = chol.solve(bv);
  return {u.data(), u.data() + n};
}

std::vector<double> solve_cg(const DirichletProblem& p, const std::vector<int>& idx,
                             const std::vector<double>& b, const DirichletOptions& opts) {
  const auto& d = *p.domain;
  std::size_t n = d.interior().size();
  std::vector<double> u(n, 0.0);
  if (opts.warm_start)
    for (std::size_t i = 0; i < n; ++i) u[i] = opts.warm_start->raw(d.interior()[i]);

  std::vector<double> r(n), q(n), z(n);
  apply_op(p, idx, u, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  std::vector<double> dir = r;

  // Serial compensated dot products keep runs bit-reproducible.
  auto dot = [](const std::vector<double>& a, const std::vector<double>& c) {
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * c[i]);
    return s.value();
  };
  auto inf_norm = [](const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  };

  long cap = opts.max_iterations > 0 ? opts.max_iterations
                                     : 200L * d.side() + 2000;
  double rho = dot(r, r);
  for (long it = 0; it < cap; ++it) {
    if (inf_norm(r) <= opts.tol) return u;
    apply_op(p, idx, dir, q);
    double alpha = rho / dot(dir, q);
    for (std::size_t i = 0; i < n; ++i) u[i] += alpha * dir[i];
    // Recompute the true residual periodically to stop drift.
    if (it % 64 == 63) {
      apply_op(p, idx, u, q);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * q[i];
    }
    double rho_next = dot(r, r);
    double beta = rho_next / rho;
    rho = rho_next;
    for (std::size_t i = 0; i < n; ++i) dir[i] = r[i] + beta * dir[i];
  }
  std::ostringstream os;
  os << "solve_dirichlet: CG hit the iteration cap, residual " << inf_norm(r);
  throw std::runtime_error(os.str());
}

}  // namespace

GridFunction solve_dirichlet(const DirichletProblem& p, const DirichletOptions& opts) {
  if (opts.tol <= 0.0) throw std::invalid_argument("solve_dirichlet: tol must be > 0");
  if (p.coeff)
    for (Point x : p.domain->interior())
      if (p.coeff->raw(x) < 0.0)
        throw std::invalid_argument("solve_dirichlet: coeff must be >= 0");
  auto idx = interior_index(*p.domain);
  auto b = effective_rhs(p);
  std::vector<double> u = p.domain->interior().size() <= 40000
                              ? solve_direct(p, idx, b)
                              : solve_cg(p, idx, b, opts);
  return pack_solution(p, u);
}

bool maximum_principle_check(const GridFunction& u, const GridFunction& c,
                             const TruncatedDomain& domain, double tol) {
  for (Point x : domain.interior()) {
    if (c.raw(x) < 0.0)
      throw std::invalid_argument("maximum_principle_check: c must be >= 0");
    if (-laplacian(u, x) + c.raw(x) * u.raw(x) < -tol) return true;  // premise fails
  }
  for (Point q : domain.boundary())
    if (u.raw(q) < -tol) return true;  // premise fails
  for (Point x : domain.interior())
    if (u.raw(x) < -10.0 * tol) return false;
  return true;
}

}  // namespace kw
