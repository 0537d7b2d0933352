#include <doctest.h>

#include <cmath>

#include "msflow/degree.hpp"
#include "msflow/symplectic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace msflow;
using Preset = BoundaryCondition::Preset;

namespace {

// Dimension of the intersection of two subspaces given by frames.
int intersection_dim(const RMatrix& a, const RMatrix& b) {
  RMatrix ab(a.rows(), a.cols() + b.cols());
  ab << a, b;
  return static_cast<int>(a.cols() + b.cols() - orthonormal_columns(ab, 1e-10).cols());
}

SymplecticPath constant_path(const RMatrix& M) {
  SymplecticPath p;
  p.psi = [M](double) { return M; };
  p.with_derivative = [M](double) { return MonodromyDerivative{M, RMatrix::Zero(M.rows(), M.cols())}; };
  return p;
}

}  // namespace

TEST_SUITE("symplectic") {

TEST_CASE("Lagrangian of the diagonal") {
  for (int n : {1, 2, 3}) {
    RMatrix diag(2 * n, n);
    diag << RMatrix::Identity(n, n), RMatrix::Identity(n, n);
    const RMatrix L = lagrangian_from_bc(diag);
    CHECK(L.cols() == 2 * n);
    CHECK(isotropy_residual(L) < 1e-14);
    // the periodic condition: same subspace as ker [I, -I]
    CHECK(intersection_dim(L, lagrangian_of_boundary(BoundaryCondition::periodic(n))) == 2 * n);
  }
}

TEST_CASE("Lagrangian of {0} + R") {
  RMatrix z(2, 1);
  z << 0, 1;
  const RMatrix L = lagrangian_from_bc(z);
  REQUIRE(L.rows() == 4);
  REQUIRE(L.cols() == 2);
  RMatrix expect(4, 2);
  expect << 0, 1, 0, 0, 0, 0, 1, 0;
  CHECK(max_abs(RMatrix(L.cwiseAbs() - expect)) < 1e-14);
  CHECK(isotropy_residual(L) == 0.0);
}

TEST_CASE("full and rank-deficient Z") {
  const RMatrix L = lagrangian_from_bc(RMatrix::Identity(2, 2));
  CHECK(isotropy_residual(L) == 0.0);
  // Z = whole space: no condition on u, so v must vanish at both ends (Neumann)
  CHECK(intersection_dim(L, lagrangian_of_boundary(BoundaryCondition::neumann(1))) == 2);
  RMatrix bad(2, 2);
  bad << 1, 2, 1, 2;
  CHECK_THROWS_AS(lagrangian_from_bc(bad), Error);
  CHECK_THROWS_AS(lagrangian_from_bc(RMatrix::Zero(3, 1)), Error);
}

TEST_CASE("preset boundaries are Lagrangian and round-trip") {
  for (int n : {1, 2}) {
    for (const auto& bc : {BoundaryCondition::dirichlet(n), BoundaryCondition::neumann(n),
                           BoundaryCondition::periodic(n)}) {
      const RMatrix L = lagrangian_of_boundary(bc);
      CHECK(L.cols() == 2 * n);
      CHECK(isotropy_residual(L) < 1e-14);
      const BoundaryCondition back = boundary_from_lagrangian(L);
      CHECK(intersection_dim(lagrangian_of_boundary(back), L) == 2 * n);
    }
  }
}

TEST_CASE("constant path transversal to L has index zero") {
  RMatrix anti = lagrangian_of_boundary(BoundaryCondition::general(RMatrix::Identity(2, 2), RMatrix::Identity(2, 2)));
  const auto r = maslov_clm(anti, constant_path(RMatrix::Identity(2, 2)), 0.0, 1.0);
  CHECK(r.index == 0);
  CHECK(r.crossings.empty());
}

TEST_CASE("Maslov index of the running example") {
  const auto vp = validate_or_throw(support::scalar(-15.0));
  const auto r = maslov_clm(lagrangian_of_boundary(vp->bc), monodromy_path(vp), 0.0, 1.0);
  CHECK(r.index == 1);
  REQUIRE(r.crossings.size() == 1);
  CHECK(r.crossings[0].t == doctest::Approx(M_PI * M_PI / 15.0).epsilon(1e-9));
  CHECK(r.crossings[0].transversal_gap < 1e-6);
  CHECK_FALSE(r.endpoint_crossing);
}

TEST_CASE("Maslov index: additivity, reparametrization, symplectic conjugation") {
  const auto vp = validate_or_throw(support::scalar(-45.0));
  const RMatrix L = lagrangian_of_boundary(vp->bc);
  const SymplecticPath path = monodromy_path(vp);
  const int total = maslov_clm(L, path, 0.0, 1.0).index;
  CHECK(total == 2);
  CHECK(maslov_clm(L, path, 0.0, 0.5).index + maslov_clm(L, path, 0.5, 1.0).index == total);

  SymplecticPath squared;
  squared.psi = [&](double s) { return path.psi(s * s); };
  squared.with_derivative = [&](double s) {
    auto d = path.with_derivative(s * s);
    d.dpsi *= 2 * s;
    return d;
  };
  CHECK(maslov_clm(L, squared, 0.0, 1.0).index == total);

  std::mt19937_64 rng(31);
  const RMatrix phi = oracle::random_symplectic(rng, 1);
  const RMatrix phi_inv = phi.inverse();
  RMatrix big = RMatrix::Zero(4, 4);
  big.topLeftCorner(2, 2) = phi;
  big.bottomRightCorner(2, 2) = phi;
  SymplecticPath conj;
  conj.psi = [&](double t) { return RMatrix(phi * path.psi(t) * phi_inv); };
  conj.with_derivative = [&](double t) {
    auto d = path.with_derivative(t);
    return MonodromyDerivative{phi * d.psi * phi_inv, phi * d.dpsi * phi_inv};
  };
  CHECK(maslov_clm(RMatrix(big * L), conj, 0.0, 1.0).index == total);
}

TEST_CASE("Sp components") {
  CHECK(sp_component(RMatrix::Identity(2, 2)) == SpComponent::Zero);
  CHECK(sp_component(RMatrix(-RMatrix::Identity(2, 2))) == SpComponent::Plus);
  CHECK(sp_component(oracle::block_rotation({M_PI / 2})) == SpComponent::Plus);
  RMatrix hyp = RMatrix::Zero(2, 2);
  hyp << 2, 0, 0, 0.5;
  CHECK(sp_component(hyp) == SpComponent::Minus);
  RMatrix bad = RMatrix::Identity(2, 2);
  bad(0, 0) = 2;
  CHECK_THROWS_AS(sp_component(bad), Error);
  CHECK(to_string(SpComponent::Plus) == "Sp+");
}

TEST_CASE("linear stability") {
  CHECK(is_linearly_stable(oracle::block_rotation({0.3, 1.7})));
  RMatrix shear(2, 2);
  shear << 1, 1, 0, 1;
  CHECK_FALSE(is_linearly_stable(shear));
  CHECK_FALSE(analyze_stability(shear).semisimple);
  RMatrix hyp = RMatrix::Zero(2, 2);
  hyp << 2, 0, 0, 0.5;
  CHECK_FALSE(is_linearly_stable(hyp));
  CHECK(analyze_stability(hyp).modulus_defect == doctest::Approx(1.0));
  CHECK(is_linearly_stable(RMatrix::Identity(4, 4)));
}

TEST_CASE("rotating a stable matrix lands in Sp+") {
  const auto id = stable_perturbation_check(RMatrix::Identity(2, 2), {1e-2});
  CHECK(id[0].plus == SpComponent::Plus);
  CHECK(id[0].minus == SpComponent::Plus);
  CHECK(2 - 2 * std::cos(1e-2) > 0.0);

  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> angle(0.05, 2 * M_PI - 0.05);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3;
    std::vector<double> th(n);
    for (auto& a : th) a = angle(rng);
    const RMatrix phi = oracle::random_symplectic(rng, n);
    const RMatrix M = phi * oracle::block_rotation(th) * phi.inverse();
    REQUIRE(is_linearly_stable(M));
    const auto r = stable_perturbation_check(M);
    CHECK(r.back().plus == SpComponent::Plus);
    CHECK(r.back().minus == SpComponent::Plus);
  }
}

TEST_CASE("instability verdict parity") {
  CHECK(instability_verdict(-1, 1, Orientation::Preserving) == Verdict::Inconclusive);
  CHECK(instability_verdict(0, 1, Orientation::Preserving) == Verdict::LinearlyUnstable);
  CHECK(instability_verdict(0, 2, Orientation::NonPreserving) == Verdict::LinearlyUnstable);
  CHECK(instability_verdict(-3, 2, Orientation::NonPreserving) == Verdict::Inconclusive);
  CHECK(parse_orientation("preserving") == Orientation::Preserving);
  CHECK(parse_orientation("non-preserving") == Orientation::NonPreserving);
  CHECK_THROWS_AS(parse_orientation("sideways"), Error);
  CHECK(to_string(Verdict::LinearlyUnstable) == "linearly-unstable");
}

TEST_CASE("spectral flow formula on periodic problems") {
  const auto zero = spectral_flow_formula_check(validate_or_throw(support::scalar(0.0, 1.0, Preset::Periodic)));
  CHECK(zero.iota_clm == 0);
  CHECK(zero.iota_sp == 0);
  CHECK(zero.pass);

  MorseSturmProblem p = support::scalar(-60.0, 0.0, Preset::Periodic);
  p.G = CoefficientField::fourier(support::s1(1.0), {support::s1(0.0), support::s1(3.0)}, {});
  const auto a = spectral_flow_formula_check(validate_or_throw(p));
  CHECK(a.pass);
  CHECK(a.iota_clm == -oracle::scalar_sf(Preset::Periodic, 1.0, -60.0));

  const auto rev = spectral_flow_formula_check(validate_or_throw(reverse_path(p)));
  CHECK(rev.pass);
  CHECK(rev.iota_clm == -a.iota_clm);
  CHECK(rev.iota_sp == -a.iota_sp);

  MorseSturmProblem q = p;
  q.G = CoefficientField::fourier(support::s1(-30.0), {support::s1(0.0), support::s1(3.0)}, {});
  const auto flipped = spectral_flow_formula_check(validate_or_throw(negate_family(q)));
  CHECK(flipped.pass);
}

TEST_CASE("double crossing of a constant periodic problem") {
  // psi_t(1) = I at the double crossing, so R0 + R1 psi vanishes there
  const auto vp = validate_or_throw(support::scalar(-100.0, 2.0, Preset::Periodic));
  const auto r = maslov_clm(lagrangian_of_boundary(vp->bc), monodromy_path(vp), 0.0, 1.0);
  CHECK(r.index == 3);
  REQUIRE(r.crossings.size() == 2);
  CHECK(r.crossings[1].form.rows() == 2);
  CHECK(r.crossings[1].t == doctest::Approx((2.0 + 4 * M_PI * M_PI) / 100.0).epsilon(1e-8));
  CHECK(spectral_flow_formula_check(vp).pass);
}

TEST_CASE("parity of periodic crossings between Sp+ endpoints") {
  // -u'' + g + t c with periodic conditions: psi_t(1) - I has determinant sign = sign rho(t)
  for (double c : {-20.0, -60.0, -100.0, -200.0}) {
    const auto vp = validate_or_throw(support::scalar(c, 1.0, Preset::Periodic));
    const SymplecticPath path = monodromy_path(vp);
    const auto a = sp_component(path.psi(0.0)), b = sp_component(path.psi(1.0));
    const auto r = maslov_clm(lagrangian_of_boundary(vp->bc), path, 0.0, 1.0);
    int count = 0;
    for (const auto& x : r.crossings) count += static_cast<int>(x.form.rows());
    if (a == b) CHECK(count % 2 == 0);
    else CHECK(count % 2 == 1);
  }
}

}
