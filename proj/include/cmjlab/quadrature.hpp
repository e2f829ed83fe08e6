#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "cmjlab/errors.hpp"

namespace cmjlab {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;  // error estimate, not a bound
  int panels = 0;          // number of GK15 panels evaluated
};

namespace detail {

// Gauss-Kronrod 15-point nodes/weights on [-1,1] (QUADPACK dqk15).
inline constexpr std::array<double, 8> kGk15Nodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
inline constexpr std::array<double, 8> kKronrodW = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
inline constexpr std::array<double, 4> kGaussW = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

template <class F>
inline void gk15_panel(const F& f, double a, double b, double& value, double& err) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double f_mid = f(mid);
  double kron = kKronrodW[7] * f_mid;
  double gauss = kGaussW[3] * f_mid;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kGk15Nodes[static_cast<std::size_t>(i)];
    const double fsum = f(mid - dx) + f(mid + dx);
    kron += kKronrodW[static_cast<std::size_t>(i)] * fsum;
    if (i % 2 == 1) gauss += kGaussW[static_cast<std::size_t>(i / 2)] * fsum;
  }
  value = kron * half;
  err = std::abs((kron - gauss) * half);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a,b] to absolute tolerance.
/// Splits the panel with the largest error estimate first. Throws
/// NumericalError with diagnostics if the panel budget runs out.
template <class F>
QuadResult integrate(const F& f, double a, double b, double abs_tol = 1e-10,
                     int max_panels = 4000) {
  struct Panel {
    double a, b, value, err;
    bool operator<(const Panel& o) const { return err < o.err; }
  };

  QuadResult out;
  std::priority_queue<Panel> panels;
  {
    Panel p{a, b, 0, 0};
    detail::gk15_panel(f, p.a, p.b, p.value, p.err);
    out.panels = 1;
    panels.push(p);
  }
  double total_err = panels.top().err;
  double total_val = panels.top().value;

  while (total_err > abs_tol) {
    if (out.panels >= max_panels) {
      throw NumericalError("quadrature did not converge: panels=" + std::to_string(out.panels) +
                           " err=" + std::to_string(total_err) +
                           " tol=" + std::to_string(abs_tol));
    }
    Panel worst = panels.top();
    panels.pop();
    total_err -= worst.err;
    total_val -= worst.value;
    const double mid = 0.5 * (worst.a + worst.b);
    for (int side = 0; side < 2; ++side) {
      Panel half{side == 0 ? worst.a : mid, side == 0 ? mid : worst.b, 0, 0};
      detail::gk15_panel(f, half.a, half.b, half.value, half.err);
      ++out.panels;
      total_err += half.err;
      total_val += half.value;
      panels.push(half);
    }
  }
  out.value = total_val;
  out.abs_error = total_err;
  return out;
}

}  // namespace cmjlab
