#include "kw/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace kw {

namespace {

struct SupportEntry {
  Point p;
  double v;
};

std::vector<SupportEntry> gather_support(const GridFunction& f) {
  std::vector<SupportEntry> s;
  for (Point p : f.domain().interior())
    if (double v = f.raw(p); v != 0.0) s.push_back({p, v});
  for (Point p : f.domain().boundary())
    if (double v = f.raw(p); v != 0.0) s.push_back({p, v});
  return s;
}

std::vector<Point> stored_points(const TruncatedDomain& d) {
  std::vector<Point> pts = d.interior();
  pts.insert(pts.end(), d.boundary().begin(), d.boundary().end());
  return pts;
}

GridFunction convolve_direct(const GreensTable& table, const GridFunction& f,
                             const std::vector<SupportEntry>& support) {
  GridFunction g(f.domain_ptr());
  auto pts = stored_points(f.domain());
  ptrdiff_t n = ptrdiff_t(pts.size());
#pragma omp parallel for schedule(static)
  for (ptrdiff_t i = 0; i < n; ++i) {
    Point x = pts[std::size_t(i)];
    CompensatedSum acc;
    for (const auto& [y, v] : support)
      acc.add(table.eval({y.x1 - x.x1, y.x2 - x.x2}) * v);
    g.set(x, acc.value());
  }
  return g;
}

// Smallest 5-smooth number >= n; FFTW is fast for these sizes.
int good_fft_size(int n) {
  for (int L = n;; ++L) {
    int r = L;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return L;
  }
}

}  // namespace

// Zero-padded FFT evaluation of exactly the same truncated sum: the kernel
// grid holds eval_phi0 on every difference y-x the box can produce, so the
// result matches direct summation up to FFT roundoff.  Phi_0 is symmetric,
// which turns the correlation into a plain convolution.
GridFunction convolve_fft(const GreensTable& table, const GridFunction& f) {
  const auto& d = f.domain();
  int n = d.side();
  int off = d.origin_offset();
  int L = good_fft_size(2 * n - 1);
  std::size_t real_n = std::size_t(L) * L;
  std::size_t cplx_n = std::size_t(L) * (L / 2 + 1);

  double* a = fftw_alloc_real(real_n);
  double* b = fftw_alloc_real(real_n);
  fftw_complex* fa = fftw_alloc_complex(cplx_n);
  fftw_complex* fb = fftw_alloc_complex(cplx_n);
  fftw_plan fwd_a = fftw_plan_dft_r2c_2d(L, L, a, fa, FFTW_ESTIMATE);
  fftw_plan fwd_b = fftw_plan_dft_r2c_2d(L, L, b, fb, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_c2r_2d(L, L, fa, a, FFTW_ESTIMATE);

  std::fill(a, a + real_n, 0.0);
  std::fill(b, b + real_n, 0.0);
  // Data at its grid position, kernel wrapped so index d mod L holds
  // Phi_0 of the difference d in [-(n-1), n-1].
  for (int x1 = -off; x1 <= off; ++x1)
    for (int x2 = -off; x2 <= off; ++x2) {
      Point p{x1, x2};
      if (d.is_stored(p))
        a[std::size_t(x1 + off) * L + (x2 + off)] = f.raw(p);
    }
  for (int d1 = -(n - 1); d1 <= n - 1; ++d1)
    for (int d2 = -(n - 1); d2 <= n - 1; ++d2) {
      std::size_t i = std::size_t((d1 + L) % L) * L + std::size_t((d2 + L) % L);
      b[i] = table.eval({d1, d2});
    }

  fftw_execute(fwd_a);
  fftw_execute(fwd_b);
  double scale = 1.0 / double(real_n);
  for (std::size_t i = 0; i < cplx_n; ++i) {
    std::complex<double> u(fa[i][0], fa[i][1]), v(fb[i][0], fb[i][1]);
    auto w = u * v * scale;
    fa[i][0] = w.real();
    fa[i][1] = w.imag();
  }
  fftw_execute(bwd);

  GridFunction g(f.domain_ptr());
  for (Point p : d.interior())
    g.set(p, a[std::size_t(p.x1 + off) * L + (p.x2 + off)]);
  for (Point p : d.boundary())
    g.set(p, a[std::size_t(p.x1 + off) * L + (p.x2 + off)]);

  fftw_destroy_plan(fwd_a);
  fftw_destroy_plan(fwd_b);
  fftw_destroy_plan(bwd);
  fftw_free(a);
  fftw_free(b);
  fftw_free(fa);
  fftw_free(fb);
  return g;
}

GridFunction convolve(const GreensTable& table, const GridFunction& f) {
  auto support = gather_support(f);
  auto pts_count = f.domain().interior().size() + f.domain().boundary().size();
  if (double(support.size()) * double(pts_count) <= 1e8)
    return convolve_direct(table, f, support);
  return convolve_fft(table, f);
}

GridFunction convolve_serial(const GreensTable& table, const GridFunction& f) {
  auto support = gather_support(f);
  GridFunction g(f.domain_ptr());
  for (Point x : stored_points(f.domain())) {
    CompensatedSum acc;
    for (const auto& [y, v] : support)
      acc.add(table.eval({y.x1 - x.x1, y.x2 - x.x2}) * v);
    g.set(x, acc.value());
  }
  return g;
}

double decay_envelope(Point x, double m) {
  double w = std::numbers::e + norm(x);
  return std::pow(w, (2.0 - m) / (m + 1.0)) * std::pow(std::log(w), 1.0 / (m + 1.0));
}

namespace {

DecayReport ratio_report(const GridFunction& residual, const GridFunction& f, double m) {
  DecayReport rep;
  rep.m = m;
  for (Point p : residual.domain().interior()) {
    double r = std::abs(residual.raw(p)) / decay_envelope(p, m);
    if (r > rep.observed_ratio_sup) {
      rep.observed_ratio_sup = r;
      rep.witness = p;
    }
  }
  double nf = weighted_norm(f, m);
  rep.bound_constant = nf > 0.0
      ? rep.observed_ratio_sup * std::pow(m - 2.0, 4.0) / nf
      : 0.0;
  return rep;
}

}  // namespace

DecayReport mean_zero_decay_check(const GreensTable& table, const GridFunction& f, double m) {
  if (m <= 2.0) throw std::invalid_argument("mean_zero_decay_check: m must be > 2");
  if (std::abs(lattice_sum(f)) > 1e-12)
    throw std::invalid_argument("mean_zero_decay_check: f is not mean-zero");
  GridFunction g = convolve(table, f);
  return ratio_report(g, f, m);
}

DecayReport nonzero_mean_decay_check(const GreensTable& table, const GridFunction& f, double m) {
  if (m <= 2.0) throw std::invalid_argument("nonzero_mean_decay_check: m must be > 2");
  double beta_f = lattice_sum(f) / (2.0 * std::numbers::pi);
  if (beta_f <= 0.0)
    throw std::invalid_argument("nonzero_mean_decay_check: requires positive mean");
  GridFunction g = convolve(table, f);
  GridFunction resid(f.domain_ptr());
  auto fill = [&](const std::vector<Point>& pts) {
    for (Point p : pts) {
      double corr = beta_f * std::log(1.0 + norm(p)) +
                    2.0 * std::numbers::pi * beta_f * table.fitted_constant();
      resid.set(p, g.raw(p) + corr);
    }
  };
  fill(f.domain().interior());
  fill(f.domain().boundary());
  return ratio_report(resid, f, m);
}

double b_m_tau(double m, double tau, double c0) {
  if (m <= 2.0) throw std::invalid_argument("b_m_tau: m must be > 2");
  if (tau <= 0.0 || tau >= (m - 2.0) / (m + 1.0))
    throw std::invalid_argument("b_m_tau: tau outside (0, (m-2)/(m+1))");
  return std::pow(c0, m) / std::pow(m - 2.0, 4.0) *
         std::pow(1.0 / (m - 2.0 - tau * (m + 1.0)), 1.0 / (m + 1.0));
}

}  // namespace kw
