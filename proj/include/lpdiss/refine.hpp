#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "lpdiss/rng.hpp"

namespace lpdiss {

/// Golden-section minimization of f over [a, b]; returns the argmin.
template <typename F>
double golden_min(F&& f, double a, double b, int iters = 80) {
  constexpr double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iters && b - a > 0.0; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

struct RefineOptions {
  int rounds = 40;
  int golden_iters = 48;
  double width_decay = 0.6;
  int random_directions = 2;  // extra line searches per round
  bool clamp = false;
  std::vector<double> lo, hi;  // used when clamp is set
};

/// Derivative-free local refinement: per round, a golden-section line search
/// along each coordinate axis (and a few deterministic random directions),
/// with shrinking brackets. Minimizes f in place.
inline double coordinate_refine(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double>& x, std::vector<double> widths,
                                const RefineOptions& opt, std::uint64_t dir_seed = 0x5EEDDA7A) {
  SplitMix64 rng(dir_seed);
  const std::size_t n = x.size();
  std::vector<double> trial = x;
  double best = f(x);

  auto line_search = [&](const std::vector<double>& dir, double w) {
    auto eval = [&](double t) {
      for (std::size_t i = 0; i < n; ++i) {
        double xi = x[i] + t * dir[i];
        if (opt.clamp) xi = std::min(std::max(xi, opt.lo[i]), opt.hi[i]);
        trial[i] = xi;
      }
      return f(trial);
    };
    const double t = golden_min(eval, -w, w, opt.golden_iters);
    const double ft = eval(t);
    if (ft < best) {
      best = ft;
      for (std::size_t i = 0; i < n; ++i) {
        double xi = x[i] + t * dir[i];
        if (opt.clamp) xi = std::min(std::max(xi, opt.lo[i]), opt.hi[i]);
        x[i] = xi;
      }
    }
  };

  for (int r = 0; r < opt.rounds; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> axis(n, 0.0);
      axis[i] = 1.0;
      line_search(axis, widths[i]);
    }
    double wmax = 0.0;
    for (double w : widths) wmax = std::max(wmax, w);
    for (int k = 0; k < opt.random_directions; ++k) {
      std::vector<double> dir(n);
      double norm = 0.0;
      for (auto& d : dir) {
        d = rng.next_normal();
        norm += d * d;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      for (auto& d : dir) d /= norm;
      line_search(dir, wmax);
    }
    for (double& w : widths) w *= opt.width_decay;
  }
  return best;
}

}  // namespace lpdiss
