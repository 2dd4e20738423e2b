// Compares the serial reference convolution against the parallel direct
// kernel and the FFT path on growing supports.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "kw/convolution.hpp"
#include "kw/greens.hpp"

using clock_type = std::chrono::steady_clock;

static double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int main(int argc, char** argv) {
  int radius = argc > 1 ? std::atoi(argv[1]) : 96;
  std::printf("building Green's table (R = %d)...\n", radius + 8);
  kw::GreensTable table = kw::build_greens_table(radius + 8, 2048);

  auto domain = kw::make_domain(radius);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  for (int support : {4, 16, 64}) {
    kw::GridFunction f(domain);
    for (int x1 = -support; x1 <= support; ++x1)
      for (int x2 = -support; x2 <= support; ++x2)
        f.set({x1, x2}, unif(rng));

    auto t0 = clock_type::now();
    kw::GridFunction serial = kw::convolve_serial(table, f);
    double t_serial = seconds_since(t0);

    t0 = clock_type::now();
    kw::GridFunction fast = kw::convolve(table, f);
    double t_fast = seconds_since(t0);

    double diff = 0.0;
    for (kw::Point p : domain->interior())
      diff = std::max(diff, std::abs(serial.raw(p) - fast.raw(p)));

    std::printf("support Q_%-3d serial %8.3fs  default %8.3fs  speedup %5.2fx  max diff %.3e\n",
                support, t_serial, t_fast, t_serial / t_fast, diff);
  }
  return 0;
}
