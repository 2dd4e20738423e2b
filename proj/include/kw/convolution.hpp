#pragma once

#include "kw/greens.hpp"
#include "kw/lattice.hpp"

namespace kw {

/// Diagnostics for the decay estimates on Phi_0 * f.
struct DecayReport {
  double m = 0.0;                  // weight exponent of f
  double observed_ratio_sup = 0.0; // sup of |residual| / envelope
  double bound_constant = 0.0;     // observed_ratio_sup (m-2)^4 / ||f||_m
  Point witness{0, 0};
};

/// g(x) = sum_y Phi_0(y-x) f(y) over the stored points of f, for every
/// stored x.  Small supports go through direct summation; dense data through
/// a zero-padded FFT of the same truncated sum.  Both paths evaluate Phi_0
/// via the table's exact/asymptotic split.
GridFunction convolve(const GreensTable& table, const GridFunction& f);

/// Direct-summation reference, single thread, compensated accumulation.
GridFunction convolve_serial(const GreensTable& table, const GridFunction& f);

/// FFT path regardless of support size (exposed for tests and benchmarks).
GridFunction convolve_fft(const GreensTable& table, const GridFunction& f);

/// Envelope (e+|x|)^{(2-m)/(m+1)} (ln(e+|x|))^{1/(m+1)} of the mean-zero
/// decay estimate.
double decay_envelope(Point x, double m);

/// Checks the mean-zero decay estimate: requires sum f = 0 (to 1e-12) and
/// m > 2; reports the sup of |Phi_0*f| against the envelope.
DecayReport mean_zero_decay_check(const GreensTable& table, const GridFunction& f, double m);

/// Checks the nonzero-mean version: with beta_f = (sum f)/2pi > 0 the
/// residual (Phi_0*f)(x) + beta_f ln(1+|x|) + 2pi beta_f fitted_constant
/// must obey the same envelope.
DecayReport nonzero_mean_decay_check(const GreensTable& table, const GridFunction& f, double m);

/// b_{m,tau} = c0^m/(m-2)^4 (1/(m-2-tau(m+1)))^{1/(m+1)}, the norm bound
/// constant implied by the decay estimate.  Requires m > 2 and
/// 0 < tau < (m-2)/(m+1).
double b_m_tau(double m, double tau, double c0);

}  // namespace kw
