#include "ult/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ult {
namespace {

using V = StateVector;

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

template <typename Fn>
V combine(Fn&& fn) {
  V out;
  for (std::size_t i = 0; i < kStateSize; ++i) out[i] = fn(i);
  return out;
}

struct Step {
  V x1;
  V k7;  // f(x1), first stage of the next step
  V err;
  std::array<V, 7> k;
};

Step rk_step(const VectorField& f, const V& x, const V& k1, double h) {
  Step s;
  auto& k = s.k;
  k[0] = k1;
  k[1] = f(combine([&](auto i) { return x[i] + h * a21 * k[0][i]; }));
  k[2] = f(combine([&](auto i) { return x[i] + h * (a31 * k[0][i] + a32 * k[1][i]); }));
  k[3] = f(combine(
      [&](auto i) { return x[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]); }));
  k[4] = f(combine([&](auto i) {
    return x[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
  }));
  k[5] = f(combine([&](auto i) {
    return x[i] +
           h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] + a65 * k[4][i]);
  }));
  s.x1 = combine([&](auto i) {
    return x[i] +
           h * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] + a75 * k[4][i] + a76 * k[5][i]);
  });
  k[6] = f(s.x1);
  s.k7 = k[6];
  s.err = combine([&](auto i) {
    return h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] +
                e7 * k[6][i]);
  });
  return s;
}

double error_norm(const V& err, const V& x0, const V& x1, const Tolerances& tol) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kStateSize; ++i) {
    const double sc = tol.abs + tol.rel * std::max(std::abs(x0[i]), std::abs(x1[i]));
    const double r = err[i] / sc;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(kStateSize));
}

struct DenseOutput {
  std::array<V, 5> r;
  double t0 = 0.0;
  double h = 0.0;

  DenseOutput(const V& x0, const Step& s, double t0_, double h_) : t0(t0_), h(h_) {
    const auto& k = s.k;
    for (std::size_t i = 0; i < kStateSize; ++i) {
      const double dy = s.x1[i] - x0[i];
      const double bspl = h * k[0][i] - dy;
      r[0][i] = x0[i];
      r[1][i] = dy;
      r[2][i] = bspl;
      r[3][i] = dy - h * k[6][i] - bspl;
      r[4][i] = h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] + d5 * k[4][i] + d6 * k[5][i] +
                     d7 * k[6][i]);
    }
  }

  V operator()(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return combine([&](auto i) {
      return r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
    });
  }
};

bool crossed(const EventFunction& e, double g0, double g1) {
  return e.direction == CrossingDirection::Falling ? (g0 > 0.0 && g1 <= 0.0)
                                                   : (g0 < 0.0 && g1 >= 0.0);
}

bool past(const EventFunction& e, double g) {
  return e.direction == CrossingDirection::Falling ? g < 0.0 : g > 0.0;
}

// Brent's method on q(s) with q(a), q(b) of opposite sign (or q(b) == 0).
// Returns the end of the final bracket lying on the same side as b, so the
// returned point has already crossed.
template <typename Q>
double brent(Q&& q, double a, double b, double qa, double qb, double tol) {
  if (qb == 0.0) return b;
  const bool end_positive = qb > 0.0;
  auto crossed_end = [&](double x1, double q1, double x2, double q2) {
    if (q1 == 0.0 || (q1 > 0.0) == end_positive) return x1;
    return (q2 > 0.0) == end_positive || q2 == 0.0 ? x2 : x1;
  };
  double c = a, qc = qa, d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if ((qb > 0.0) == (qc > 0.0)) {
      c = a;
      qc = qa;
      d = e = b - a;
    }
    if (std::abs(qc) < std::abs(qb)) {
      a = b;
      b = c;
      c = a;
      qa = qb;
      qb = qc;
      qc = qa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || qb == 0.0) return crossed_end(b, qb, c, qc);
    if (std::abs(e) >= tol1 && std::abs(qa) > std::abs(qb)) {
      double p, r;
      const double s = qb / qa;
      if (a == c) {
        p = 2.0 * xm * s;
        r = 1.0 - s;
      } else {
        const double qq = qa / qc;
        const double rr = qb / qc;
        p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
        r = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
      }
      if (p > 0.0) r = -r;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * r - std::abs(tol1 * r), std::abs(e * r))) {
        e = d;
        d = p / r;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    qa = qb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    qb = q(b);
  }
  return crossed_end(b, qb, c, qc);
}

}  // namespace

OdeResult integrate(const VectorField& f, const StateVector& x0, double t0,
                    std::span<const EventFunction> events, const OdeOptions& opts,
                    const StepObserver& observer) {
  OdeResult res;
  res.t = t0;
  res.x = x0;

  std::vector<double> g(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) {
    g[e] = events[e].value(x0);
    if (events[e].fire_if_past && past(events[e], g[e])) {
      res.event = e;
      return res;
    }
  }

  const double t_end = t0 + opts.t_max;
  double t = t0;
  V x = x0;
  V k1 = f(x);
  double h = std::min(opts.h_initial, opts.h_max);
  double err_old = 1e-4;
  bool rejected_last = false;

  for (std::size_t n = 0; n < opts.max_steps; ++n) {
    if (t >= t_end) {
      res.t = t;
      res.x = x;
      res.steps = n;
      return res;
    }
    h = std::min(h, t_end - t);
    if (h < opts.h_min) {
      throw IntegrationError("step size underflow at t = " + std::to_string(t));
    }

    Step s = rk_step(f, x, k1, h);
    const double err = error_norm(s.err, x, s.x1, opts.tol);
    bool finite = true;
    for (double v : s.x1) finite = finite && std::isfinite(v);

    if (!finite || err > 1.0) {
      const double fac = finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0) : 0.1;
      h *= fac;
      rejected_last = true;
      continue;
    }

    // Accepted. Check for the earliest event crossing inside [t, t + h].
    std::optional<std::size_t> hit;
    double hit_s = h;
    V hit_x = s.x1;
    for (std::size_t e = 0; e < events.size(); ++e) {
      const double g1 = events[e].value(s.x1);
      if (!crossed(events[e], g[e], g1)) continue;
      const auto& fn = events[e].value;
      auto q = [&](double sub) { return fn(rk_step(f, x, k1, sub).x1); };
      const double root = brent(q, 0.0, h, g[e], g1, opts.event_tol);
      if (!hit || root < hit_s) {
        hit = e;
        hit_s = root;
      }
    }

    if (hit) {
      hit_x = hit_s == h ? s.x1 : rk_step(f, x, k1, hit_s).x1;
      if (observer) {
        const DenseOutput dense(x, s, t, h);
        observer(t, t + hit_s, [&](double tq) { return dense(tq); });
      }
      res.t = t + hit_s;
      res.x = hit_x;
      res.event = hit;
      res.steps = n + 1;
      return res;
    }

    if (observer) {
      const DenseOutput dense(x, s, t, h);
      observer(t, t + h, [&](double tq) { return dense(tq); });
    }
    for (std::size_t e = 0; e < events.size(); ++e) g[e] = events[e].value(s.x1);
    t += h;
    x = s.x1;
    k1 = s.k7;

    // PI controller (beta = 0.04).
    const double e_safe = std::max(err, 1e-10);
    double fac = 0.9 * std::pow(e_safe, -0.17) * std::pow(err_old, 0.04);
    fac = std::clamp(fac, 0.2, rejected_last ? 1.0 : 5.0);
    h = std::min(h * fac, opts.h_max);
    err_old = std::max(err, 1e-4);
    rejected_last = false;
  }
  throw IntegrationError("step budget exhausted");
}

}  // namespace ult
