#pragma once

#include "kw/lattice.hpp"

namespace kw {

/// -Delta u + coeff u = rhs on the interior, u = boundary on the one-ring
/// boundary layer.  coeff is optional and must be >= 0 where present.
struct DirichletProblem {
  DomainPtr domain;
  GridFunction rhs;
  GridFunction boundary;
  const GridFunction* coeff = nullptr;

  explicit DirichletProblem(DomainPtr d)
      : domain(d), rhs(d), boundary(d) {}
};

struct DirichletOptions {
  double tol = 1e-10;          // absolute sup-norm residual
  long max_iterations = 0;     // 0 = automatic cap
  const GridFunction* warm_start = nullptr;
};

/// Direct sparse factorization up to 40000 unknowns, conjugate gradient
/// above.  Throws a solver error with the residual attached if the
/// iteration cap is hit.
GridFunction solve_dirichlet(const DirichletProblem& p, const DirichletOptions& opts = {});

/// Finite-box maximum principle oracle: true iff the premises
/// -Delta u + c u >= -tol (interior), u >= -tol (boundary) fail, or the
/// conclusion u >= -10 tol holds on the interior.
bool maximum_principle_check(const GridFunction& u, const GridFunction& c,
                             const TruncatedDomain& domain, double tol = 1e-12);

}  // namespace kw
