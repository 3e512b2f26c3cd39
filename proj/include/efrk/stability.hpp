#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "efrk/error.hpp"
#include "efrk/tableau.hpp"
#include "efrk/taylor.hpp"

namespace efrk {

// All quantities here are scalar functions of z = -tau * ell >= 0, the value
// of -tau L_kappa on one Fourier mode. Every operator in the energy analysis
// is a rational function of tau L_kappa, so evaluating it mode by mode is exact.

/// omega_{i,k} (k = 0..i) and Delta_{i,j} = sum_{k=j}^{i} omega_{i,k} (j = 1..i)
/// for i = 1..s, stored 1-based in the first index.
struct DeltaCoefficients {
  int stages = 0;
  std::vector<std::vector<double>> omega;  // omega[i][k]
  std::vector<std::vector<double>> delta;  // delta[i][j], j >= 1

  double Delta(int i, int j) const { return delta[i][j]; }

  double zero_sum_defect = 0.0;            // max_i |sum_k omega_{i,k}|, exact

  double max_zero_sum_defect() const { return zero_sum_defect; }
};

namespace detail {

using Rational = boost::multiprecision::cpp_rational;

/// The rational with the smallest denominator (at most 10^6) that rounds to
/// `x`, or the exact binary value of `x` when there is none.
inline Rational nearest_simple_rational(double x) {
  using boost::multiprecision::cpp_int;
  if (!std::isfinite(x)) throw ValidationError("tableau coefficient is not finite");
  const double target = x;
  double rem = std::abs(x);
  cpp_int h0 = 1, h1 = 0, k0 = 0, k1 = 1;  // convergents h/k
  for (int it = 0; it < 40; ++it) {
    const double fl = std::floor(rem);
    const cpp_int q(fl);
    cpp_int h2 = q * h0 + h1, k2 = q * k0 + k1;
    h1 = h0;
    h0 = h2;
    k1 = k0;
    k0 = k2;
    if (k0 > 1000000) break;
    const Rational r(h0, k0);
    if (static_cast<double>(r) == std::abs(target)) return target < 0 ? Rational(-r) : r;
    const double frac = rem - fl;
    if (frac == 0.0) break;
    rem = 1.0 / frac;
  }
  return Rational(target);
}

template <class T>
T phi_exact(int k, const T& z) {
  T r = 1;
  for (int j = k; j >= 1; --j) r = 1 + z * r / j;
  return r;
}

}  // namespace detail

/// Inductive construction of the expansion
///   tau (L u_i + N(u_{i-1})) = sum_k omega_{i,k} u_k.
/// tau N(u_j) is carried as a coefficient vector eta_j over u_0..u_{j+1}:
///   eta_{i-1} = (a_{i,i-1} phi_{i-1})^{-1} (phi_i e_i - e_0 - sum_{j<i-1} a_{i,j} phi_j eta_j)
///   omega_i   = eta_{i-1} - z e_i
/// with phi_j = phi_j(c_j z).
/// The sums cancel O(z) terms down to O(z^-2) results, so the recurrence runs
/// in exact rational arithmetic on z and on the tableau entries, each read as
/// the simplest rational that rounds to it.
inline DeltaCoefficients delta_coefficients(const ButcherTableau& t, double z_in) {
  using Q = detail::Rational;
  const int s = t.stages();
  if (s > 4) throw ValidationError("delta_coefficients: s > 4 unsupported");
  if (!(z_in >= 0.0) || !std::isfinite(z_in))
    throw ValidationError("delta_coefficients: need finite z >= 0");
  const Q z(z_in);
  std::vector<std::vector<Q>> a(static_cast<std::size_t>(s) + 1);
  std::vector<Q> c(static_cast<std::size_t>(s) + 1, Q(0));
  for (int i = 1; i <= s; ++i) {
    for (int j = 0; j < i; ++j) {
      a[i].push_back(detail::nearest_simple_rational(t.a(i, j)));
      c[i] += a[i].back();
    }
  }
  std::vector<Q> ph(static_cast<std::size_t>(s) + 1);
  for (int j = 0; j <= s; ++j) ph[j] = detail::phi_exact(j, Q(c[j] * z));

  DeltaCoefficients out;
  out.stages = s;
  out.omega.assign(static_cast<std::size_t>(s) + 1, {});
  out.delta.assign(static_cast<std::size_t>(s) + 1, {});
  std::vector<std::vector<Q>> eta(static_cast<std::size_t>(s));

  for (int i = 1; i <= s; ++i) {
    std::vector<Q> v(static_cast<std::size_t>(i) + 1, Q(0));
    v[i] += ph[i];
    v[0] -= 1;
    for (int j = 0; j + 1 < i; ++j) {
      const Q w = a[i][j] * ph[j];
      for (std::size_t k = 0; k < eta[j].size(); ++k) v[k] -= w * eta[j][k];
    }
    const Q pivot = a[i][i - 1] * ph[i - 1];
    if (pivot == 0) throw ValidationError("delta_coefficients: a_{i,i-1} must be nonzero");
    for (Q& x : v) x /= pivot;
    eta[i - 1] = v;

    std::vector<Q> om = v;
    om[i] -= z;
    Q total = 0;
    for (const Q& x : om) {
      out.omega[i].push_back(static_cast<double>(x));
      total += x;
    }
    out.zero_sum_defect = std::max(out.zero_sum_defect, std::abs(static_cast<double>(total)));
    auto& de = out.delta[i];
    de.assign(static_cast<std::size_t>(i) + 1, 0.0);
    Q tail = 0;
    for (int j = i; j >= 1; --j) {
      tail += om[j];
      de[j] = static_cast<double>(tail);
    }
  }
  return out;
}

/// Closed-form Delta_{i,j} for s <= 3 obtained by eliminating the nonlinear
/// terms stage by stage by hand; an independent route to delta_coefficients.
inline DeltaCoefficients delta_closed_form(const ButcherTableau& t, double z) {
  const int s = t.stages();
  if (s > 3) throw ValidationError("delta_closed_form: s <= 3 only");
  auto a = [&](int i, int j) { return t.a(i, j); };
  DeltaCoefficients out;
  out.stages = s;
  out.delta.assign(static_cast<std::size_t>(s) + 1, {});
  for (int i = 1; i <= s; ++i) out.delta[i].assign(static_cast<std::size_t>(i) + 1, 0.0);
  out.omega = out.delta;

  out.delta[1][1] = 1.0 / a(1, 0);
  if (s >= 2) {
    const double p1 = phi(1, t.c(1) * z);
    if (s == 2) {
      out.delta[2][1] = (a(1, 0) - a(2, 0)) / (a(2, 1) * a(1, 0) * p1);
      out.delta[2][2] = (1.0 + a(2, 0) * z) / (a(2, 1) * p1);
    } else {
      out.delta[2][1] = (a(1, 0) - a(2, 0)) / (a(2, 1) * a(1, 0) * p1);
      out.delta[2][2] = (1.0 + a(2, 0) * z) / (a(2, 1) * p1);
      const double p2 = phi(2, t.c(2) * z);
      out.delta[3][1] =
          (a(3, 1) * a(2, 0) + a(2, 1) * a(1, 0) - a(3, 1) * a(1, 0) - a(3, 0) * a(2, 1)) /
          (a(3, 2) * a(2, 1) * a(1, 0) * p2);
      out.delta[3][2] =
          ((a(2, 1) - a(3, 1)) + (a(3, 0) * a(2, 1) - a(3, 1) * a(2, 0)) * z) /
          (a(3, 2) * a(2, 1) * p2);
      out.delta[3][3] = (1.0 + a(3, 0) * z + a(3, 1) * p1 * z) / (a(3, 2) * p2);
    }
  }
  return out;
}

struct NamedValue {
  std::string name;
  double value;
};

/// Entries of the energy-stability matrices: every off-diagonal Delta_{i,j}
/// (i > j) and every diagonal combination
///   Delta_{i,i} - 1/2 sum_{j<i} Delta_{i,j} - 1/2 sum_{j>i} Delta_{j,i}.
/// Unconditional energy decay holds when all of them are >= 0 for all z >= 0.
inline std::vector<NamedValue> energy_matrix_entries(const DeltaCoefficients& d) {
  const int s = d.stages;
  std::vector<NamedValue> out;
  for (int i = 1; i <= s; ++i) {
    double v = d.Delta(i, i);
    for (int j = 1; j < i; ++j) v -= 0.5 * d.Delta(i, j);
    for (int j = i + 1; j <= s; ++j) v -= 0.5 * d.Delta(j, i);
    out.push_back({"D" + std::to_string(i) + std::to_string(i) + " (diagonal)", v});
    for (int j = 1; j < i; ++j)
      out.push_back({"D" + std::to_string(i) + std::to_string(j), d.Delta(i, j)});
  }
  return out;
}

inline std::vector<NamedValue> energy_matrix_entries(const ButcherTableau& t, double z) {
  return energy_matrix_entries(delta_coefficients(t, z));
}

struct PsdScan {
  double min_value = 0.0;
  double argmin_z = 0.0;
  std::string argmin_entry;
  std::size_t samples = 0;
};

/// Minimum of all energy-matrix entries over z = 0 and `samples - 1`
/// log-spaced points in [z_lo, z_hi].
inline PsdScan scan_energy_matrices(const ButcherTableau& t, std::size_t samples = 1000,
                                    double z_lo = 1e-8, double z_hi = 1e8) {
  PsdScan scan;
  scan.min_value = INFINITY;
  auto visit = [&](double z) {
    for (const auto& e : energy_matrix_entries(t, z)) {
      if (e.value < scan.min_value) {
        scan.min_value = e.value;
        scan.argmin_z = z;
        scan.argmin_entry = e.name;
      }
    }
    ++scan.samples;
  };
  visit(0.0);
  const double l0 = std::log10(z_lo);
  const double l1 = std::log10(z_hi);
  for (std::size_t k = 0; k + 1 < samples; ++k) {
    const double frac = samples > 2 ? static_cast<double>(k) / static_cast<double>(samples - 2) : 0.0;
    visit(std::pow(10.0, l0 + frac * (l1 - l0)));
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Linear stability of the exponential-free schemes on
//   u_t = Delta(-eps^2 Delta u + lambda u),   kappa = theta * lambda.

using Cplx = std::complex<double>;

/// Phi(theta, z) = phi_s(-(1 - theta) z) / phi_s(theta z).
inline Cplx stability_function(int s, double theta, Cplx z) {
  if (s < 1 || s > 3) throw ValidationError("stability_function: need 1 <= s <= 3");
  const Cplx den = phi(s, theta * z);
  if (std::abs(den) < 1e-300) throw ValidationError("stability_function: pole");
  return phi(s, -(1.0 - theta) * z) / den;
}

/// The amplification factor in the plotting plane w = -z, where theta = 0
/// recovers the classical RK region {|phi_s(w)| <= 1}.
inline double amplification(int s, double theta, Cplx w) {
  const Cplx den = phi(s, -theta * w);
  if (std::abs(den) < 1e-300) return 1e300;
  return std::abs(phi(s, (1.0 - theta) * w) / den);
}

struct Window {
  double re_min = -6.0;
  double re_max = 2.0;
  double im_min = -4.0;
  double im_max = 4.0;
};

/// Largest |Phi| on an n x n lattice covering `w`.
inline double max_amplification(int s, double theta, const Window& w, int n) {
  double m = 0.0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double x = w.re_min + (w.re_max - w.re_min) * ix / (n - 1);
      const double y = w.im_min + (w.im_max - w.im_min) * iy / (n - 1);
      m = std::max(m, amplification(s, theta, {x, y}));
    }
  return m;
}

/// Fraction of lattice points with |Phi| <= 1.
inline double stable_fraction(int s, double theta, const Window& w, int n) {
  std::size_t inside = 0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double x = w.re_min + (w.re_max - w.re_min) * ix / (n - 1);
      const double y = w.im_min + (w.im_max - w.im_min) * iy / (n - 1);
      if (amplification(s, theta, {x, y}) <= 1.0) ++inside;
    }
  return static_cast<double>(inside) / (static_cast<double>(n) * n);
}

using Polyline = std::vector<Cplx>;

/// Level set |Phi(theta, -w)| = 1 over `win`, traced by marching squares on a
/// resolution x resolution cell lattice and chained into polylines.
inline std::vector<Polyline> stability_boundary(int s, double theta, int resolution,
                                                const Window& win = {}) {
  if (resolution < 64) throw ValidationError("stability_boundary: resolution must be >= 64");
  const int n = resolution;
  const double dx = (win.re_max - win.re_min) / n;
  const double dy = (win.im_max - win.im_min) / n;
  auto node = [&](int ix, int iy) { return Cplx(win.re_min + ix * dx, win.im_min + iy * dy); };

  std::vector<double> val(static_cast<std::size_t>(n + 1) * (n + 1));
  auto V = [&](int ix, int iy) -> double& { return val[static_cast<std::size_t>(iy) * (n + 1) + ix]; };
  for (int iy = 0; iy <= n; ++iy)
    for (int ix = 0; ix <= n; ++ix) {
      const double a = amplification(s, theta, node(ix, iy));
      V(ix, iy) = std::log(std::max(a, 1e-300));  // sign of |Phi| - 1, smoother
    }

  // Edge ids: horizontal edge (ix, iy)->(ix+1, iy) and vertical (ix, iy)->(ix, iy+1).
  auto h_edge = [&](int ix, int iy) { return 2L * (static_cast<long>(iy) * (n + 1) + ix); };
  auto v_edge = [&](int ix, int iy) { return 2L * (static_cast<long>(iy) * (n + 1) + ix) + 1; };
  std::map<long, Cplx> points;
  auto crossing = [&](long id, int ix0, int iy0, int ix1, int iy1) {
    if (!points.count(id)) {
      const double f0 = V(ix0, iy0), f1 = V(ix1, iy1);
      const double t = f0 / (f0 - f1);
      points[id] = node(ix0, iy0) + t * (node(ix1, iy1) - node(ix0, iy0));
    }
    return id;
  };

  std::vector<std::pair<long, long>> segments;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double f00 = V(ix, iy), f10 = V(ix + 1, iy), f11 = V(ix + 1, iy + 1),
                   f01 = V(ix, iy + 1);
      const bool b00 = f00 > 0, b10 = f10 > 0, b11 = f11 > 0, b01 = f01 > 0;
      std::vector<long> cuts;
      if (b00 != b10) cuts.push_back(crossing(h_edge(ix, iy), ix, iy, ix + 1, iy));
      if (b10 != b11) cuts.push_back(crossing(v_edge(ix + 1, iy), ix + 1, iy, ix + 1, iy + 1));
      if (b01 != b11) cuts.push_back(crossing(h_edge(ix, iy + 1), ix, iy + 1, ix + 1, iy + 1));
      if (b00 != b01) cuts.push_back(crossing(v_edge(ix, iy), ix, iy, ix, iy + 1));
      if (cuts.size() == 2) {
        segments.emplace_back(cuts[0], cuts[1]);
      } else if (cuts.size() == 4) {
        // Saddle: decide connectivity from the cell-centre value.
        const double centre = 0.25 * (f00 + f10 + f11 + f01);
        if ((centre > 0) == b00) {
          segments.emplace_back(cuts[0], cuts[1]);
          segments.emplace_back(cuts[2], cuts[3]);
        } else {
          segments.emplace_back(cuts[0], cuts[3]);
          segments.emplace_back(cuts[1], cuts[2]);
        }
      }
    }

  std::map<long, std::vector<std::size_t>> incident;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    incident[segments[k].first].push_back(k);
    incident[segments[k].second].push_back(k);
  }
  std::vector<bool> used(segments.size(), false);
  std::vector<Polyline> lines;
  auto extend = [&](std::vector<long>& chain) {
    for (;;) {
      const long tip = chain.back();
      bool moved = false;
      for (std::size_t k : incident[tip]) {
        if (used[k]) continue;
        used[k] = true;
        chain.push_back(segments[k].first == tip ? segments[k].second : segments[k].first);
        moved = true;
        break;
      }
      if (!moved) return;
    }
  };
  for (std::size_t k = 0; k < segments.size(); ++k) {
    if (used[k]) continue;
    used[k] = true;
    std::vector<long> chain{segments[k].first, segments[k].second};
    extend(chain);
    std::reverse(chain.begin(), chain.end());
    extend(chain);
    Polyline line;
    line.reserve(chain.size());
    for (long id : chain) line.push_back(points[id]);
    lines.push_back(std::move(line));
  }
  return lines;
}

/// Left end of the real-axis stability interval of phi_s at theta = 0, i.e.
/// the root of |phi_s(w)| = 1 on (lo, hi), by bisection.
inline double real_axis_limit(int s, double theta, double lo, double hi, double tol = 1e-12) {
  auto g = [&](double w) { return amplification(s, theta, {w, 0.0}) - 1.0; };
  double glo = g(lo);
  if ((glo > 0) == (g(hi) > 0)) throw ValidationError("real_axis_limit: no sign change");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm > 0) == (glo > 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace efrk
