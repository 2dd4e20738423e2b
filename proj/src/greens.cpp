#include "kw/greens.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace kw {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// 16-point Gauss-Legendre rule on [-1, 1].
constexpr double kGLNode[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr double kGLWeight[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

std::size_t tri(int m, int n) { return std::size_t(m) * (m + 1) / 2 + n; }

// Quadrature evaluation of Phi_0 on the octant 0 <= n <= m <= R.  Starting
// from the Fourier integral over [-pi,pi]^2, the integral in the second
// variable has an elementary antiderivative, which leaves
//   Phi_0(m,n) = -(1/2pi) int_0^pi (1 - cos(n t) e^{-m s(t)}) / sinh s(t) dt
// with s(t) = 2 asinh(sin(t/2)).  The integrand extends analytically through
// t = 0, so a composite Gauss-Legendre rule converges spectrally; the
// numerator is assembled as -expm1(-m s) cos(n t) + (1 - cos(n t)) to avoid
// cancellation for small m s.
std::vector<double> octant_by_quadrature(int R, int quad_points) {
  int panels = std::max({128, R, quad_points / 16});
  int nodes = panels * 16;
  std::vector<double> theta(nodes), wgt(nodes), s(nodes), inv_sinh(nodes);
  double h = std::numbers::pi / panels;
  for (int p = 0; p < panels; ++p) {
    double mid = (p + 0.5) * h;
    for (int k = 0; k < 8; ++k) {
      int i0 = p * 16 + 2 * k;
      theta[i0] = mid - 0.5 * h * kGLNode[k];
      theta[i0 + 1] = mid + 0.5 * h * kGLNode[k];
      wgt[i0] = wgt[i0 + 1] = 0.5 * h * kGLWeight[k];
    }
  }
  for (int j = 0; j < nodes; ++j) {
    double sh = std::sin(0.5 * theta[j]);
    s[j] = 2.0 * std::asinh(sh);
    inv_sinh[j] = 1.0 / (2.0 * sh * std::sqrt(1.0 + sh * sh));
  }

  std::vector<double> out(tri(R, R) + 1, 0.0);
  std::vector<double> em(nodes), cos_t(nodes), c_prev(nodes), c_cur(nodes);
  for (int j = 0; j < nodes; ++j) cos_t[j] = std::cos(theta[j]);

  for (int m = 0; m <= R; ++m) {
    for (int j = 0; j < nodes; ++j) em[j] = std::expm1(-double(m) * s[j]);
    for (int n = 0; n <= m; ++n) {
      // cos(n theta) by the Chebyshev three-term recurrence across n.
      if (n == 0) {
        std::fill(c_cur.begin(), c_cur.end(), 1.0);
      } else if (n == 1) {
        c_prev = c_cur;
        c_cur = cos_t;
      } else {
        for (int j = 0; j < nodes; ++j) {
          double next = 2.0 * cos_t[j] * c_cur[j] - c_prev[j];
          c_prev[j] = c_cur[j];
          c_cur[j] = next;
        }
      }
      CompensatedSum acc;
      for (int j = 0; j < nodes; ++j) {
        double numer = -em[j] * c_cur[j] + (1.0 - c_cur[j]);
        acc.add(wgt[j] * numer * inv_sinh[j]);
      }
      out[tri(m, n)] = -acc.value() / (2.0 * std::numbers::pi);
    }
  }
  return out;
}

// Independent exact values inside a small radius: the stencil recurrence
// seeded by Phi_0(0,0) = 0, Phi_0(1,0) = -1/4 and the closed-form diagonal
// Phi_0(k,k) = -(1/pi) sum_{j<=k} 1/(2j-1).  Column-by-column fill; the
// recurrence amplifies roundoff, which is why it only serves as a check.
std::vector<double> octant_by_recurrence(int R) {
  std::vector<double> v(tri(R, R) + 1, 0.0);
  v[tri(0, 0)] = 0.0;
  if (R >= 1) {
    v[tri(1, 0)] = -0.25;
    v[tri(1, 1)] = -1.0 / std::numbers::pi;
  }
  double diag = -1.0 / std::numbers::pi;
  for (int m = 1; m < R; ++m) {
    // -Delta Phi_0 = 0 away from the origin, with Phi_0(m,-1) = Phi_0(m,1).
    for (int n = 0; n < m; ++n) {
      double up = v[tri(m, n + 1)];
      double down = (n == 0) ? v[tri(m, 1)] : v[tri(m, n - 1)];
      v[tri(m + 1, n)] = 4.0 * v[tri(m, n)] - v[tri(std::max(m - 1, n), std::min(m - 1, n))] - up - down;
    }
    diag += -1.0 / (std::numbers::pi * (2.0 * (m + 1) - 1.0));
    v[tri(m + 1, m + 1)] = diag;
    // Stencil at the diagonal point (m,m) with the two off-diagonal
    // neighbors identified by symmetry.
    v[tri(m + 1, m)] = 2.0 * v[tri(m, m)] - v[tri(m, m - 1)];
  }
  return v;
}

}  // namespace

double GreensTable::gamma0() {
  return (kEulerGamma + 0.5 * std::numbers::ln2) / std::numbers::pi;
}

double GreensTable::classical_constant() {
  return (2.0 * kEulerGamma + 3.0 * std::numbers::ln2) / (4.0 * std::numbers::pi);
}

void GreensTable::finalize() {
  int R = exact_radius_;
  // Measure the additive constant in Phi_0 ~ -ln|x|/(2pi) - const on the
  // outer annulus, then the residual scaled by |x|.
  CompensatedSum csum;
  long count = 0;
  double rlo = 0.5 * R, rhi = double(R);
  for (int m = 0; m <= R; ++m)
    for (int n = 0; n <= m; ++n) {
      double r = std::hypot(double(m), double(n));
      if (r < rlo || r > rhi) continue;
      csum.add(-octant_[tri(m, n)] - std::log(r) / (2.0 * std::numbers::pi));
      ++count;
    }
  fitted_constant_ = csum.value() / double(count);
  double worst = 0.0;
  for (int m = 0; m <= R; ++m)
    for (int n = 0; n <= m; ++n) {
      double r = std::hypot(double(m), double(n));
      if (r < rlo || r > rhi) continue;
      double resid = octant_[tri(m, n)] + std::log(r) / (2.0 * std::numbers::pi) + fitted_constant_;
      worst = std::max(worst, std::abs(resid) * r);
    }
  max_residual_times_r_ = worst;

  // Crossover: largest ring whose one-ring neighborhood has exact and
  // asymptotic evaluations agreeing to 1e-6, floored at 32.  If even the
  // floor misses the target the achieved seam error is kept and reported.
  auto ring_error = [&](int ring) {
    double e = 0.0;
    for (int n = 0; n <= ring; ++n) {
      double r = std::hypot(double(ring), double(n));
      double asym = -std::log(r) / (2.0 * std::numbers::pi) - fitted_constant_;
      e = std::max(e, std::abs(asym - octant_[tri(ring, n)]));
    }
    return e;
  };
  auto seam = [&](int c) {
    return std::max({ring_error(c - 1), ring_error(c), ring_error(c + 1)});
  };
  int floor_c = std::min(32, R - 1);
  crossover_radius_ = floor_c;
  seam_error_ = seam(floor_c);
  for (int c = R - 1; c > floor_c; --c) {
    double e = seam(c);
    if (e < 1e-6) {
      crossover_radius_ = c;
      seam_error_ = e;
      break;
    }
  }
}

GreensTable build_greens_table(int exact_radius, int quadrature_points) {
  if (exact_radius < 8)
    throw std::invalid_argument("build_greens_table: exact_radius must be >= 8");
  GreensTable t;
  t.exact_radius_ = exact_radius;
  t.quadrature_points_ = quadrature_points;
  t.octant_ = octant_by_quadrature(exact_radius, quadrature_points);

  auto ref = octant_by_recurrence(8);
  double disagree = 0.0;
  for (int m = 0; m <= 8; ++m)
    for (int n = 0; n <= m; ++n)
      disagree = std::max(disagree, std::abs(ref[tri(m, n)] - t.octant_[tri(m, n)]));
  if (disagree > 1e-8) {
    std::ostringstream os;
    os << "build_greens_table: quadrature and recurrence disagree by " << disagree;
    throw std::runtime_error(os.str());
  }

  t.finalize();
  return t;
}

AsymptoticFit asymptotic_fit(const GreensTable& table) {
  if (table.exact_radius() < 64)
    throw std::invalid_argument("asymptotic_fit: needs exact_radius >= 64");
  AsymptoticFit fit;
  fit.constant = table.fitted_constant();
  fit.max_residual_times_r = table.max_residual_times_r();
  fit.c1_two_sided = estimate_c1(table);
  return fit;
}

double estimate_c1(const GreensTable& table) {
  double c1 = 1.0;
  int R = table.exact_radius();
  for (int m = 0; m <= R; ++m)
    for (int n = 0; n <= m; ++n) {
      if (m == 0 && n == 0) continue;
      double r = std::hypot(double(m), double(n));
      double phi = table.exact_value({m, n});
      double lg = std::log(1.0 + r);
      c1 = std::max(c1, std::abs(phi + lg / (2.0 * std::numbers::pi)));
      c1 = std::max(c1, -phi / lg);
      c1 = std::max(c1, lg / -phi);
    }
  return c1;
}

std::string GreensTable::fingerprint() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "greens:R%d:q%d:c%d:%.12e", exact_radius_,
                quadrature_points_, crossover_radius_, fitted_constant_);
  return buf;
}

void save_greens_table(const GreensTable& table, const std::string& csv_path,
                       const std::string& meta_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("save_greens_table: cannot open " + csv_path);
  csv << "x1,x2,phi0\n";
  csv.precision(17);
  int R = table.exact_radius();
  for (int m = 0; m <= R; ++m)
    for (int n = 0; n <= m; ++n)
      csv << m << ',' << n << ',' << table.exact_value({m, n}) << '\n';

  nlohmann::json meta{
      {"exact_radius", table.exact_radius()},
      {"quadrature_points", table.quadrature_points()},
      {"crossover_radius", table.crossover_radius()},
      {"fitted_constant", table.fitted_constant()},
      {"max_residual_times_r", table.max_residual_times_r()},
      {"seam_error", table.seam_error()},
      {"gamma0", GreensTable::gamma0()},
  };
  std::ofstream mf(meta_path);
  if (!mf) throw std::runtime_error("save_greens_table: cannot open " + meta_path);
  mf << meta.dump(2) << '\n';
}

GreensTable load_greens_table(const std::string& csv_path, const std::string& meta_path) {
  nlohmann::json meta;
  {
    std::ifstream mf(meta_path);
    if (!mf) throw std::runtime_error("load_greens_table: cannot open " + meta_path);
    mf >> meta;
  }
  GreensTable t;
  t.exact_radius_ = meta.at("exact_radius").get<int>();
  t.quadrature_points_ = meta.at("quadrature_points").get<int>();
  t.crossover_radius_ = meta.at("crossover_radius").get<int>();
  t.fitted_constant_ = meta.at("fitted_constant").get<double>();
  t.max_residual_times_r_ = meta.at("max_residual_times_r").get<double>();
  t.seam_error_ = meta.at("seam_error").get<double>();

  int R = t.exact_radius_;
  t.octant_.assign(tri(R, R) + 1, std::nan(""));
  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("load_greens_table: cannot open " + csv_path);
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    int m, n;
    double v;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &m, &n, &v) != 3)
      throw std::runtime_error("load_greens_table: bad row: " + line);
    if (n > m || m > R || n < 0)
      throw std::runtime_error("load_greens_table: row outside octant: " + line);
    t.octant_[tri(m, n)] = v;
  }
  for (double v : t.octant_)
    if (std::isnan(v)) throw std::runtime_error("load_greens_table: incomplete table");
  return t;
}

GreensTable cached_greens_table(int exact_radius, int quadrature_points,
                                const std::string& cache_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(cache_dir);
  std::ostringstream base;
  base << cache_dir << "/greens_R" << exact_radius << "_q" << quadrature_points;
  std::string csv = base.str() + ".csv", meta = base.str() + ".json";
  if (fs::exists(csv) && fs::exists(meta)) {
    try {
      auto t = load_greens_table(csv, meta);
      if (t.exact_radius() == exact_radius && t.quadrature_points() == quadrature_points)
        return t;
    } catch (const std::exception&) {
      // fall through and rebuild
    }
  }
  auto t = build_greens_table(exact_radius, quadrature_points);
  save_greens_table(t, csv, meta);
  return t;
}

}  // namespace kw
