#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "ult/fixtures.hpp"
#include "ult/stability.hpp"

using namespace ult;

namespace {

struct Nominal {
  ModelParams mp;
  ControlParams cp;
  SectionState z = nominal_fixed_point();
  Nominal() { cp.l0_swing = 1.0 - kNominalRetraction; }
};

std::complex<double> product(const std::vector<std::complex<double>>& v) {
  std::complex<double> p = 1.0;
  for (const auto& x : v) p *= x;
  return p;
}

}  // namespace

TEST(Linearize, ExactForAffineMaps) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::MatrixXd A(5, 5);
  Eigen::VectorXd b(5), x(5);
  for (Eigen::Index i = 0; i < 5; ++i) {
    b[i] = u(rng);
    x[i] = 3.0 * u(rng);
    for (Eigen::Index j = 0; j < 5; ++j) A(i, j) = u(rng);
  }
  const VectorMap map = [&](const Eigen::VectorXd& v) -> std::optional<Eigen::VectorXd> {
    return Eigen::VectorXd(A * v + b);
  };
  const Eigen::MatrixXd J = linearize(map, x);
  EXPECT_LT((J - A).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Linearize, ExactForQuadratics) {
  const VectorMap square = [](const Eigen::VectorXd& v) -> std::optional<Eigen::VectorXd> {
    return Eigen::VectorXd::Constant(1, v[0] * v[0]);
  };
  Eigen::VectorXd x(1);
  x[0] = 3.0;
  EXPECT_NEAR(linearize(square, x)(0, 0), 6.0, 1e-9);
}

TEST(Linearize, ReportsFallingProbe) {
  const VectorMap cliff = [](const Eigen::VectorXd& v) -> std::optional<Eigen::VectorXd> {
    if (v[1] < 0.0) return std::nullopt;
    return v;
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  try {
    linearize(cliff, x);
    FAIL() << "expected LinearizationError";
  } catch (const LinearizationError& e) {
    EXPECT_NE(std::string(e.what()).find("-e_1"), std::string::npos);
  }
}

TEST(Floquet, Identity) {
  const FloquetResult r = floquet_multipliers(Eigen::MatrixXd::Identity(4, 4));
  ASSERT_EQ(r.multipliers.size(), 4u);
  for (const auto& m : r.multipliers) EXPECT_NEAR(std::abs(m - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(r.spectral_radius, 1.0, 1e-14);
}

TEST(Floquet, DiagonalSortedByMagnitude) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = -0.25;
  D(1, 1) = 0.5;
  const FloquetResult r = floquet_multipliers(D);
  EXPECT_NEAR(r.multipliers[0].real(), 0.5, 1e-15);
  EXPECT_NEAR(r.multipliers[1].real(), -0.25, 1e-15);
  EXPECT_NEAR(r.spectral_radius, 0.5, 1e-15);
}

TEST(Floquet, ScaledRotation) {
  const double a = std::numbers::pi / 6;
  Eigen::MatrixXd R(2, 2);
  R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  R *= 0.9;
  const FloquetResult r = floquet_multipliers(R);
  // Roots of lambda^2 - trace lambda + det.
  const double tr = R.trace();
  const double det = R.determinant();
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4 * det));
  const std::complex<double> l1 = 0.5 * (tr + disc);
  for (const auto& m : r.multipliers) {
    EXPECT_NEAR(std::abs(m), 0.9, 1e-14);
    EXPECT_NEAR(std::abs(std::arg(m)), a, 1e-14);
    EXPECT_NEAR(std::min(std::abs(m - l1), std::abs(m - std::conj(l1))), 0.0, 1e-14);
  }
}

TEST(Floquet, DeterminantIsProduct) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {3, 6, 9}) {
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) = u(rng);
    }
    const std::complex<double> p = product(floquet_multipliers(M).multipliers);
    const double det = M.determinant();
    EXPECT_LT(std::abs(p - det) / std::abs(det), 1e-8);
    EXPECT_LT(std::abs(p.imag()), 1e-12);
  }
}

TEST(FixedPoint, SyntheticContraction) {
  // P(x) = A (x - c) + c with a non-normal A.
  Eigen::MatrixXd A(2, 2);
  A << 0.5, 2.0, 0.0, -0.3;
  Eigen::VectorXd c(2);
  c << 1.0, -2.0;
  const VectorMap map = [&](const Eigen::VectorXd& v) -> std::optional<Eigen::VectorXd> {
    return Eigen::VectorXd(A * (v - c) + c);
  };
  const FixedPointResult r = solve_fixed_point(map, Eigen::VectorXd::Zero(2));
  ASSERT_TRUE(r.converged);
  EXPECT_LT((r.x - c).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE(r.iterations, 2u);
}

TEST(FixedPoint, SyntheticUnstableNonlinear) {
  // Expanding map: plain iteration would diverge, Newton does not care.
  const VectorMap map = [](const Eigen::VectorXd& v) -> std::optional<Eigen::VectorXd> {
    Eigen::VectorXd out(2);
    out << 3.0 * v[0] + 0.1 * v[1] * v[1] - 2.0, -2.5 * v[1] + std::sin(v[0] - 1.0) + 3.5;
    return out;
  };
  Eigen::VectorXd guess(2);
  guess << 0.8, 1.2;
  const FixedPointResult r = solve_fixed_point(map, guess);
  ASSERT_TRUE(r.converged) << r.diagnostic;
  EXPECT_LT(((*map(r.x)) - r.x).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FixedPoint, ExactGuessNeedsNoIteration) {
  Nominal n;
  const SectionFixedPoint r = find_fixed_point(n.z, n.mp, n.cp);
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_LT(r.residual, 1e-8);
}

TEST(FixedPoint, PerturbedGuessReturnsToSamePoint) {
  Nominal n;
  SectionState guess = n.z;
  guess.x[4] *= 1.01;
  const SectionFixedPoint r = find_fixed_point(guess, n.mp, n.cp);
  ASSERT_TRUE(r.converged) << r.diagnostic;
  EXPECT_LT((to_eigen(r.x) - to_eigen(n.z)).cwiseAbs().maxCoeff(), 1e-7);
  // Re-running from the found point barely moves it.
  const SectionFixedPoint again = find_fixed_point(r.x, n.mp, n.cp);
  EXPECT_LT((to_eigen(again.x) - to_eigen(r.x)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Section, EmbedReduceRoundTrip) {
  const SectionState z = nominal_fixed_point();
  const SectionState back = reduce(embed(z), embed_controller(z));
  EXPECT_EQ(back.x, z.x);
  EXPECT_EQ(back.phi_des, z.phi_des);
  EXPECT_EQ(embed(z).r_c.x, 0.0);
  EXPECT_EQ(embed(z).v_c.y, 0.0);
  EXPECT_EQ(from_eigen(to_eigen(z)).x, z.x);
}

TEST(PoincareMap, TranslationInvariant) {
  Nominal n;
  SectionState z = n.z;
  z.x[0] *= 1.002;
  SystemState s = embed(z);
  const CycleOutcome a = step_gait_cycle(s, embed_controller(z), n.mp, n.cp);
  s.r_c.x += 10.0;
  s.r_f.x += 10.0;
  const CycleOutcome b = step_gait_cycle(s, embed_controller(z), n.mp, n.cp);
  const SectionState ra = reduce(std::get<CycleResult>(a).next_apex, std::get<CycleResult>(a).controller);
  const SectionState rb = reduce(std::get<CycleResult>(b).next_apex, std::get<CycleResult>(b).controller);
  for (std::size_t i = 0; i < kReducedSize; ++i) EXPECT_NEAR(ra.x[i], rb.x[i], 1e-10) << i;
  EXPECT_NEAR(ra.phi_des, rb.phi_des, 1e-10);
}

TEST(PoincareMap, JacobianStepSelfConsistent) {
  Nominal n;
  const VectorMap map = section_map(n.mp, n.cp);
  const Eigen::MatrixXd a = linearize(map, to_eigen(n.z), 1e-6);
  const Eigen::MatrixXd b = linearize(map, to_eigen(n.z), 0.5e-6);
  const double scale = a.cwiseAbs().maxCoeff();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff() / scale, 1e-4);
  const FloquetResult fa = floquet_multipliers(a);
  EXPECT_LT(std::abs(product(fa.multipliers) - a.determinant()),
            1e-8 * std::max(1.0, std::abs(a.determinant())));
}

TEST(StepsToFall, BelowThresholdIsZero) {
  Nominal n;
  SectionState z = n.z;
  z.x[0] = 0.35;
  EXPECT_EQ(steps_to_fall(z, n.mp, n.cp), 0u);
}

TEST(StepsToFall, SlowTargetFallsEarly) {
  Nominal n;
  n.cp.vx_des = 0.5;
  EXPECT_LT(steps_to_fall(n.z, n.mp, n.cp), 100u);
}

TEST(Sweep, GridAxisInclusive) {
  const std::vector<double> v = GridAxis{0.05, 0.15, 0.002}.values();
  EXPECT_EQ(v.size(), 51u);
  EXPECT_NEAR(v.back(), 0.15, 1e-12);
  EXPECT_EQ(GridAxis({3.0, 6.0, 0.1}).values().size(), 31u);
  EXPECT_EQ(GridAxis({5.0, 5.0, 0.1}).values().size(), 1u);
  EXPECT_THROW(GridAxis({1.0, 0.0, 0.1}).values(), std::invalid_argument);
}

TEST(Sweep, RetractionModes) {
  const ModelParams mp;
  EXPECT_DOUBLE_EQ(swing_rest_length(0.087, RetractionMode::Absolute, mp), 0.087);
  EXPECT_DOUBLE_EQ(swing_rest_length(0.087, RetractionMode::Relative, mp), 0.913);
  EXPECT_EQ(parse_retraction_mode("absolute"), RetractionMode::Absolute);
  EXPECT_THROW(parse_retraction_mode("both"), std::invalid_argument);
}

TEST(Sweep, OrderAndThreadIndependence) {
  Nominal n;
  SweepGrid g;
  g.vx = {4.8, 5.0, 0.1};
  g.l0d = {0.085, 0.089, 0.002};
  const auto one = sweep(g, RetractionMode::Relative, n.z, n.mp, n.cp, 100, 1);
  const auto four = sweep(g, RetractionMode::Relative, n.z, n.mp, n.cp, 100, 4);
  ASSERT_EQ(one.size(), 9u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].vx_des, four[i].vx_des);
    EXPECT_EQ(one[i].l0d, four[i].l0d);
    EXPECT_EQ(one[i].steps, four[i].steps);
  }
  EXPECT_EQ(one.front().vx_des, 4.8);
  EXPECT_NEAR(one[1].l0d, 0.087, 1e-12);
  // The nominal cell replays the fixture itself.
  EXPECT_EQ(one[7].steps, steps_to_fall(n.z, n.mp, n.cp));
}

TEST(Perturbation, ZeroFractionStaysOnCycle) {
  Nominal n;
  const PerturbationRecord r = perturb_and_track(n.z, 0.0, 4, n.mp, n.cp);
  ASSERT_EQ(r.distances.size(), 5u);
  for (double d : r.distances) EXPECT_LT(d, 1e-8);
  EXPECT_EQ(r.verdict, Verdict::Converged);
}

TEST(VelocityMap, FrozenEqualsZeroGain) {
  Nominal n;
  const VelocityMap frozen = velocity_return_map(n.z, n.mp, n.cp, 5, false);
  ControlParams k0 = n.cp;
  k0.K = 0.0;
  SectionState z = n.z;
  z.phi_des = n.cp.phi_0;
  const VelocityMap zero_gain = velocity_return_map(z, n.mp, k0, 5, true);
  ASSERT_EQ(frozen.pairs.size(), zero_gain.pairs.size());
  for (std::size_t i = 0; i < frozen.pairs.size(); ++i) {
    EXPECT_EQ(frozen.pairs[i], zero_gain.pairs[i]);
  }
}

TEST(VelocityMap, PairsChain) {
  Nominal n;
  const VelocityMap m = velocity_return_map(n.z, n.mp, n.cp, 6, true);
  ASSERT_GE(m.pairs.size(), 2u);
  for (std::size_t i = 0; i + 1 < m.pairs.size(); ++i) {
    EXPECT_EQ(m.pairs[i].second, m.pairs[i + 1].first);
  }
  EXPECT_NEAR(m.pairs.front().first, n.z.x[4], 1e-15);
}
