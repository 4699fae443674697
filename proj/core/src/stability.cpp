#include "ult/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace ult {

SectionState reduce(const SystemState& s, const ControllerState& cs) {
  return {{s.r_c.y, s.r_f.x - s.r_c.x, s.r_f.y, s.theta, s.v_c.x, s.v_f.x, s.v_f.y, s.omega},
          cs.phi_des};
}

SystemState embed(const SectionState& z) {
  const auto& x = z.x;
  SystemState s;
  s.r_c = {0.0, x[0]};
  s.r_f = {x[1], x[2]};
  s.theta = x[3];
  s.v_c = {x[4], 0.0};
  s.v_f = {x[5], x[6]};
  s.omega = x[7];
  return s;
}

ControllerState embed_controller(const SectionState& z) { return {z.phi_des, Phase::Flight}; }

Eigen::VectorXd to_eigen(const SectionState& z) {
  Eigen::VectorXd v(kSectionSize);
  for (std::size_t i = 0; i < kReducedSize; ++i) v[i] = z.x[i];
  v[kReducedSize] = z.phi_des;
  return v;
}

SectionState from_eigen(const Eigen::VectorXd& v) {
  SectionState z;
  for (std::size_t i = 0; i < kReducedSize; ++i) z.x[i] = v[i];
  z.phi_des = v[kReducedSize];
  return z;
}

MapOutcome poincare_map(const SectionState& z, const ModelParams& mp, const ControlParams& cp,
                        const HybridOptions& opts) {
  CycleOutcome out = step_gait_cycle(embed(z), embed_controller(z), mp, cp, opts);
  if (auto* f = std::get_if<FallOutcome>(&out)) return *f;
  const auto& c = std::get<CycleResult>(out);
  return reduce(c.next_apex, c.controller);
}

VectorMap section_map(const ModelParams& mp, const ControlParams& cp, const HybridOptions& opts) {
  return [mp, cp, opts](const Eigen::VectorXd& v) -> std::optional<Eigen::VectorXd> {
    MapOutcome out = poincare_map(from_eigen(v), mp, cp, opts);
    if (auto* z = std::get_if<SectionState>(&out)) return to_eigen(*z);
    return std::nullopt;
  };
}

Eigen::MatrixXd linearize(const VectorMap& map, const Eigen::VectorXd& x, double eps) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = eps * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp[j] += h;
    xm[j] -= h;
    const auto fp = map(xp);
    if (!fp) throw LinearizationError("probe +e_" + std::to_string(j) + " fell");
    const auto fm = map(xm);
    if (!fm) throw LinearizationError("probe -e_" + std::to_string(j) + " fell");
    if (j == 0) jac.resize(fp->size(), n);
    // Divide by the realized step, which differs from 2h by rounding.
    jac.col(j) = (*fp - *fm) / (xp[j] - xm[j]);
  }
  return jac;
}

FloquetResult floquet_multipliers(const Eigen::MatrixXd& jacobian) {
  if (jacobian.rows() != jacobian.cols()) {
    throw std::invalid_argument("floquet_multipliers needs a square matrix");
  }
  FloquetResult res;
  if (jacobian.size() == 0) return res;
  Eigen::EigenSolver<Eigen::MatrixXd> es(jacobian, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue iteration did not converge");
  const auto& ev = es.eigenvalues();
  res.multipliers.assign(ev.data(), ev.data() + ev.size());
  std::sort(res.multipliers.begin(), res.multipliers.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
              if (a.real() != b.real()) return a.real() > b.real();
              return a.imag() > b.imag();
            });
  res.spectral_radius = std::abs(res.multipliers.front());
  return res;
}

FixedPointResult solve_fixed_point(const VectorMap& map, const Eigen::VectorXd& guess,
                                   const FixedPointOptions& opts) {
  FixedPointResult res;
  res.x = guess;
  auto residual_at = [&](const Eigen::VectorXd& x) -> std::optional<Eigen::VectorXd> {
    auto p = map(x);
    if (!p) return std::nullopt;
    return Eigen::VectorXd(*p - x);
  };

  auto r = residual_at(res.x);
  if (!r) {
    res.diagnostic = "initial guess falls";
    return res;
  }
  res.residual = r->lpNorm<Eigen::Infinity>();

  while (res.residual >= opts.tol) {
    if (res.iterations >= opts.max_iter) {
      res.diagnostic = "no convergence after " + std::to_string(opts.max_iter) + " iterations";
      return res;
    }
    ++res.iterations;

    bool stepped = false;
    try {
      const VectorMap residual_map = [&](const Eigen::VectorXd& x) { return residual_at(x); };
      const Eigen::MatrixXd jac = linearize(residual_map, res.x, opts.eps);
      const Eigen::VectorXd dx = -jac.fullPivLu().solve(*r);
      double alpha = 1.0;
      for (int k = 0; k < 10 && !stepped; ++k, alpha *= 0.5) {
        const Eigen::VectorXd xn = res.x + alpha * dx;
        auto rn = residual_at(xn);
        if (!rn) continue;
        const double norm = rn->lpNorm<Eigen::Infinity>();
        if (norm < res.residual) {
          res.x = xn;
          r = rn;
          res.residual = norm;
          stepped = true;
        }
      }
    } catch (const LinearizationError&) {
    }
    if (stepped) continue;

    // Plain iteration x <- P(x).
    for (std::size_t k = 0; k < opts.fallback_iterations; ++k) {
      const Eigen::VectorXd xn = res.x + *r;
      auto rn = residual_at(xn);
      if (!rn) {
        res.diagnostic = "map iteration fell";
        return res;
      }
      res.x = xn;
      r = rn;
    }
    const double norm = r->lpNorm<Eigen::Infinity>();
    if (!(norm < res.residual)) {
      res.residual = norm;
      res.diagnostic = "neither Newton nor map iteration reduced the residual";
      return res;
    }
    res.residual = norm;
  }
  res.converged = true;
  return res;
}

SectionFixedPoint find_fixed_point(const SectionState& guess, const ModelParams& mp,
                                   const ControlParams& cp, const FixedPointOptions& fo,
                                   const HybridOptions& opts) {
  const FixedPointResult r = solve_fixed_point(section_map(mp, cp, opts), to_eigen(guess), fo);
  return {from_eigen(r.x), r.residual, r.iterations, r.converged, r.diagnostic};
}

std::size_t steps_to_fall(const SectionState& initial, const ModelParams& mp,
                          const ControlParams& cp, std::size_t max_steps,
                          const HybridOptions& opts) {
  SystemState s = embed(initial);
  ControllerState cs = embed_controller(initial);
  for (std::size_t n = 0; n < max_steps; ++n) {
    CycleOutcome out = step_gait_cycle(s, cs, mp, cp, opts);
    if (std::holds_alternative<FallOutcome>(out)) return n;
    const auto& c = std::get<CycleResult>(out);
    s = c.next_apex;
    cs = c.controller;
  }
  return max_steps;
}

std::string to_string(RetractionMode m) {
  return m == RetractionMode::Absolute ? "absolute" : "relative";
}

RetractionMode parse_retraction_mode(const std::string& s) {
  if (s == "absolute") return RetractionMode::Absolute;
  if (s == "relative") return RetractionMode::Relative;
  throw std::invalid_argument("retraction mode must be absolute or relative, got '" + s + "'");
}

double swing_rest_length(double l0d, RetractionMode mode, const ModelParams& mp) {
  return mode == RetractionMode::Absolute ? l0d : mp.l_0 - l0d;
}

std::vector<double> GridAxis::values() const {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("grid axis needs lo <= hi and step > 0");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-3));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

std::vector<SweepCell> sweep(const SweepGrid& grid, RetractionMode mode, const SectionState& initial,
                             const ModelParams& mp, const ControlParams& cp_template,
                             std::size_t max_steps, std::size_t threads,
                             const HybridOptions& opts) {
  std::vector<SweepCell> cells;
  for (double vx : grid.vx.values()) {
    for (double l0d : grid.l0d.values()) cells.push_back({vx, l0d, 0});
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cells.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      ControlParams cp = cp_template;
      cp.vx_des = cells[i].vx_des;
      cp.l0_swing = swing_rest_length(cells[i].l0d, mode, mp);
      cells[i].steps = cp.l0_swing > 0.0 ? steps_to_fall(initial, mp, cp, max_steps, opts) : 0;
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return cells;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Converged: return "converged";
    case Verdict::Diverged: return "diverged";
    case Verdict::Fell: return "fell";
  }
  return "unknown";
}

PerturbationRecord perturb_and_track(const SectionState& x_star, double fraction,
                                     std::size_t n_cycles, const ModelParams& mp,
                                     const ControlParams& cp, const HybridOptions& opts) {
  PerturbationRecord rec;
  rec.fraction = fraction;
  const Eigen::VectorXd ref = to_eigen(x_star);
  SectionState z = x_star;
  z.x[0] *= 1.0 + fraction;
  rec.distances.push_back((to_eigen(z) - ref).lpNorm<Eigen::Infinity>());
  for (std::size_t n = 0; n < n_cycles; ++n) {
    MapOutcome out = poincare_map(z, mp, cp, opts);
    if (auto* f = std::get_if<FallOutcome>(&out)) {
      rec.fall = *f;
      rec.verdict = Verdict::Fell;
      return rec;
    }
    z = std::get<SectionState>(out);
    rec.distances.push_back((to_eigen(z) - ref).lpNorm<Eigen::Infinity>());
  }
  const double first = rec.distances.front();
  const double last = rec.distances.back();
  rec.verdict = (last < 0.01 * first || last < 1e-3) ? Verdict::Converged : Verdict::Diverged;
  return rec;
}

VelocityMap velocity_return_map(const SectionState& initial, const ModelParams& mp,
                                const ControlParams& cp, std::size_t n_cycles, bool adapt_phi,
                                const HybridOptions& opts) {
  ControlParams run = cp;
  SectionState z = initial;
  if (!adapt_phi) {
    run.K = 0.0;
    z.phi_des = cp.phi_0;
  }
  VelocityMap out;
  for (std::size_t n = 0; n < n_cycles; ++n) {
    MapOutcome next = poincare_map(z, mp, run, opts);
    if (std::holds_alternative<FallOutcome>(next)) {
      out.fell = true;
      return out;
    }
    const SectionState& zn = std::get<SectionState>(next);
    out.pairs.emplace_back(z.x[4], zn.x[4]);
    z = zn;
    ++out.cycles;
  }
  return out;
}

}  // namespace ult
