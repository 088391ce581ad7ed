#include <doctest.h>

#include "helpers.hpp"

using namespace msl;
using namespace msl::scaling;
using testing::rel;

namespace {

Vector eigs(const SymMatrix& a, const SymMatrix& b) { return testing::oracle_eigenvalues(a.dense(), b.dense()); }

Vector fine_eigs(const SymMatrix& a, const SymMatrix& b) {
  return testing::oracle_refined_eigenvalues(a.dense(), b.dense());
}

Vector eigs(const ScaledSystem& s) { return eigs(s.kbar, s.mbar_dense()); }

// Dense element scaling from an independent eigensolver: E = M U2 g(D2) U2^T M.
SymMatrix oracle_local_deflation(const fem::ElementBlock& b, Index r, bool s2, double alpha) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(b.stiffness.dense(), b.lumped_mass.dense());
  const Index m = b.size();
  const Vector l = es.eigenvalues();
  const Matrix v = b.lumped_mass.dense() * es.eigenvectors().rightCols(r);
  Vector g(r);
  for (Index i = 0; i < r; ++i) g(i) = s2 ? l(m - r + i) / l(m - r - 1) - 1.0 : alpha;
  return SymMatrix(v * g.asDiagonal() * v.transpose());
}

void check_kbar_untouched(const FeSystem& fe, const ScaledSystem& s) {
  CHECK(s.kbar.dense().cwiseEqual(fe.k.dense()).all());
}

}  // namespace

TEST_CASE("scaling spec") {
  CHECK(parse_kind("olovsson") == ScalingKind::Olovsson);
  CHECK(to_string(ScalingKind::LocalDeflationS2) == "local_deflation_s2");
  CHECK_THROWS_AS(parse_kind("magic"), Error);
  CHECK(ScalingSpec::olovsson(1.0).is_local());
  CHECK(!ScalingSpec::global_deflation(3).is_local());
  CHECK_THROWS_AS(ScalingSpec::olovsson(-1.0).validate(), Error);
  CHECK_THROWS_AS(ScalingSpec::cms(0.5).validate(), Error);
  CHECK_THROWS_AS(ScalingSpec::uniform_lft(0.0).validate(), Error);
  CHECK_NOTHROW(ScalingSpec::hoffmann(2.0).validate());
}

TEST_CASE("conventional mass scaling") {
  const FeSystem fe = testing::small_plate();
  SUBCASE("alpha = 1 is the identity") {
    const ScaledSystem s = cms(fe, std::nullopt, 1.0);
    CHECK(s.mbar_dense().dense().cwiseEqual(fe.m.dense()).all());
    check_kbar_untouched(fe, s);
  }
  SUBCASE("all entries, alpha = 4 halves every frequency") {
    const ScaledSystem s = cms(fe, std::nullopt, 4.0);
    CHECK(s.mbar_dense().is_diagonal());
    const Vector l = eigs(fe.k, fe.m), lb = eigs(s);
    const double top = l(l.size() - 1);
    for (Index k = 6; k < l.size(); ++k) CHECK(rel(std::sqrt(l(k) / lb(k)), 2.0) <= 1e-9);
    CHECK(std::abs(lb(0)) <= 1e-8 * top);
  }
  SUBCASE("selected entries: element mass pair spectrum {1, alpha}") {
    const auto block = testing::thin_element();
    const std::vector<Index> sel = {0, 3, 9, 17, 22};
    const SymMatrix e = cms_element_scaling(block.lumped_mass, sel, 3.0);
    const Vector v = eigs(block.lumped_mass + e, block.lumped_mass);
    for (Index i = 0; i < 19; ++i) CHECK(rel(v(i), 1.0) <= 1e-14);
    for (Index i = 19; i < 24; ++i) CHECK(rel(v(i), 3.0) <= 1e-14);
  }
  SUBCASE("errors") {
    const auto block = testing::thin_element();
    try {
      cms_element_scaling(block.lumped_mass, std::vector<Index>{}, 2.0);
      FAIL("expected EmptySelection");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptySelection);
    }
    try {
      cms_element_scaling(block.lumped_mass, std::vector<Index>{30}, 2.0);
      FAIL("expected IndexOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::IndexOutOfRange);
    }
    CHECK_THROWS_AS(cms_element_scaling(block.mass, std::nullopt, 2.0), Error);
  }
}

TEST_CASE("linear fractional transformations") {
  const FeSystem fe = testing::small_plate();
  const Index n = fe.n;
  const EigDecomposition base = generalized_eig(fe.pair());
  const Vector lam = rayleigh_quotients(fe.pair(), base.vectors);
  const double top = lam(n - 1);

  SUBCASE("W = I leaves the pair unchanged") {
    const ScaledSystem s = lft(fe.pair(), Eigen::Matrix2d::Identity());
    check_kbar_untouched(fe, s);
    CHECK(s.mbar_dense().dense().cwiseEqual(fe.m.dense()).all());
  }
  SUBCASE("uniform scaling divides eigenvalues by mu") {
    const double mu = 3.5;
    const ScaledSystem s = lft(fe.pair(), (Eigen::Matrix2d() << 1, 0, 0, mu).finished());
    CHECK(s.provenance.kind == ScalingKind::UniformLft);
    const Vector lb = rayleigh_quotients(s.pair(), base.vectors);
    for (Index k = 6; k < n; ++k) CHECK(rel(lb(k), lam(k) / mu) <= 1e-9);
  }
  SUBCASE("stiffness-proportional: lambda / (mu lambda + 1), eigenvectors preserved") {
    for (int p : {0, 1, 2}) {
      const double mu = std::pow(10.0, p) / top;
      const ScaledSystem s = lft(fe.pair(), (Eigen::Matrix2d() << 1, mu, 0, 1).finished());
      check_kbar_untouched(fe, s);
      CHECK(s.provenance.kind == ScalingKind::StiffnessProportionalLft);
      const MatrixPair sp = s.pair();
      const Vector lb = rayleigh_quotients(sp, generalized_eig(sp).vectors);
      for (Index k = 6; k < n; ++k) CHECK(rel(lb(k), lam(k) / (mu * lam(k) + 1.0)) <= 1e-9);
      CHECK(rel(lb(n - 1), top / (std::pow(10.0, p) + 1.0)) <= 1e-9);
      const double knorm = s.kbar.dense().operatorNorm();
      for (Index k = 0; k < n; ++k) {
        const Vector u = base.vectors.col(k);
        const double l = lam(k) / (mu * lam(k) + 1.0);
        CHECK((s.kbar * u - l * (sp.b * u)).norm() <= 1e-8 * knorm * u.norm());
      }
    }
  }
  SUBCASE("errors") {
    try {
      lft(fe.pair(), (Eigen::Matrix2d() << 1, 2, 2, 4).finished());
      FAIL("expected DegenerateLFT");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DegenerateLFT);
    }
    try {
      lft(fe.pair(), (Eigen::Matrix2d() << 1, -10.0 / top, 0, 1).finished());
      FAIL("expected LostDefiniteness");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::LostDefiniteness);
    }
  }
}

TEST_CASE("polynomial selective mass scaling") {
  SUBCASE("c = 0 is the identity") {
    const FeSystem fe = testing::small_plate();
    const ScaledSystem s = polynomial_sms(fe.k, fe.m, 0.0);
    CHECK((s.mbar_dense().dense() - fe.m.dense()).norm() == 0.0);
  }
  SUBCASE("single DOF: k = 4, m = 1, c = 1 gives 4/17") {
    const ScaledSystem s = polynomial_sms(SymMatrix(Matrix::Constant(1, 1, 4.0)), SymMatrix::identity(1), 1.0);
    CHECK(rel(s.kbar(0, 0) / s.mbar_dense()(0, 0), 4.0 / 17.0) <= 1e-15);
  }
  SUBCASE("small plate: lambda / (1 + c lambda^2)") {
    const FeSystem fe = testing::small_plate();
    const EigDecomposition base = generalized_eig(fe.pair());
    const Vector lam = rayleigh_quotients(fe.pair(), base.vectors);
    const double top = lam(fe.n - 1);
    const double c = 5.0 / (top * top);
    const ScaledSystem s = polynomial_sms(fe.k, fe.m, c);
    check_kbar_untouched(fe, s);
    const Vector lb = rayleigh_quotients(s.pair(), base.vectors);
    for (Index k = 6; k < fe.n; ++k) CHECK(rel(lb(k), lam(k) / (1.0 + c * lam(k) * lam(k))) <= 1e-9);
    const Vector direct = eigs(s);
    CHECK(rel(direct(fe.n - 1), lb.maxCoeff()) <= 1e-9);
  }
  SUBCASE("errors") {
    const FeSystem fe = testing::small_plate();
    try {
      polynomial_sms(fe.k, SymMatrix(fe.m.dense() + 1e-3 * Matrix::Ones(fe.n, fe.n) * fe.m(0, 0)), 1.0);
      FAIL("expected NonDiagonalMass");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NonDiagonalMass);
    }
  }
}

TEST_CASE("global deflation") {
  const FeSystem fe = testing::small_plate();
  const Index n = fe.n;
  const EigDecomposition base = generalized_eig(fe.pair());
  const Vector lam = rayleigh_quotients(fe.pair(), base.vectors);

  SUBCASE("r = 0 leaves the pair unchanged") {
    const ScaledSystem s = global_deflation(fe.pair(), 0, DeflationMode::Shave);
    REQUIRE(s.low_rank());
    CHECK((s.mbar_dense().dense() - fe.m.dense()).norm() == 0.0);
  }
  SUBCASE("shave: top r values flattened, eigenvectors kept") {
    const Index r = 10;
    const ScaledSystem s = global_deflation(fe.pair(), r, DeflationMode::Shave, 0.0, &base);
    check_kbar_untouched(fe, s);
    const MatrixPair sp = s.pair();
    const EigDecomposition se = generalized_eig(sp);
    const Vector lb = rayleigh_quotients(sp, se.vectors);
    for (Index k = 6; k < n - r; ++k) CHECK(rel(lb(k), lam(k)) <= 1e-8);
    for (Index k = n - r; k < n; ++k) CHECK(rel(lb(k), lam(n - r - 1)) <= 1e-8);
    // The invariant subspace of the flexible non-deflated modes is preserved.
    // Mode n - r - 1 joins the flattened cluster, so it is left out.
    const Matrix u = base.vectors.middleCols(6, n - r - 7);
    const Matrix w = se.vectors.middleCols(6, n - r - 7);
    const Eigen::JacobiSVD<Matrix> svd(u.transpose() * sp.b.dense() * w);
    CHECK(svd.singularValues().minCoeff() >= 1.0 - 1e-8);
  }
  SUBCASE("cutoff mode") {
    const Index r = 4;
    const double alpha = 2.0;
    const ScaledSystem s = global_deflation(fe.pair(), r, DeflationMode::Cutoff, alpha, &base);
    const Vector lb = rayleigh_quotients(s.pair(), base.vectors);
    for (Index k = n - r; k < n; ++k) CHECK(rel(lb(k), lam(k) / (1.0 + alpha)) <= 1e-8);
  }
  SUBCASE("rank too large") {
    try {
      global_deflation(fe.pair(), n, DeflationMode::Shave);
      FAIL("expected RankTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::RankTooLarge);
    }
  }
}

TEST_CASE("local deflation") {
  const auto block = testing::thin_element();
  SUBCASE("S1 with alpha = 0 is the identity") {
    const auto d = local_deflation_element(block, 7, ScalingKind::LocalDeflationS1, 0.0);
    CHECK(d.scaling.dense().norm() <= 1e-14 * block.lumped_mass.dense().norm());
  }
  SUBCASE("element matrices are independent of the eigenvector basis") {
    for (Index r : {1, 7, 12}) {
      const auto s1 = local_deflation_element(block, r, ScalingKind::LocalDeflationS1, 3.0);
      const auto s2 = local_deflation_element(block, r, ScalingKind::LocalDeflationS2, 0.0);
      REQUIRE(s1.effective_rank == r);
      const SymMatrix o1 = oracle_local_deflation(block, r, false, 3.0);
      const SymMatrix o2 = oracle_local_deflation(block, r, true, 0.0);
      CHECK((s1.scaling.dense() - o1.dense()).norm() <= 1e-9 * o1.dense().norm());
      CHECK((s2.scaling.dense() - o2.dense()).norm() <= 1e-9 * o2.dense().norm());
    }
  }
  SUBCASE("S2, r = 12: the top 12 element values clamp to lambda_{m-12}") {
    const auto d = local_deflation_element(block, 12, ScalingKind::LocalDeflationS2, 0.0);
    const Vector l = fine_eigs(block.stiffness, block.lumped_mass);
    const Vector lb = fine_eigs(block.stiffness, block.lumped_mass + d.scaling);
    const double scale = l(23);
    // Low modes are resolved only to eps * lambda_max (see the twisting mode).
    for (Index k = 0; k < 12; ++k) CHECK(std::abs(lb(k) - l(k)) <= 1e-11 * scale);
    for (Index k = 12; k < 24; ++k) CHECK(rel(lb(k), l(11)) <= 1e-9);
  }
  SUBCASE("S1 element spectrum and its largest value") {
    const Vector l = eigs(block.stiffness, block.lumped_mass);
    for (double alpha : {0.5, 10.0, 1e5}) {
      const auto d = local_deflation_element(block, 12, ScalingKind::LocalDeflationS1, alpha);
      const Vector lb = eigs(block.stiffness, block.lumped_mass + d.scaling);
      CHECK(rel(lb(23), std::max(l(11), l(23) / (1.0 + alpha))) <= 1e-9);
    }
  }
  SUBCASE("rank limits") {
    try {
      local_deflation_element(block, 24, ScalingKind::LocalDeflationS1, 1.0);
      FAIL("expected RankTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::RankTooLarge);
    }
    // S2 cannot flatten into the rigid-body modes.
    CHECK_THROWS_AS(local_deflation_element(block, 18, ScalingKind::LocalDeflationS2, 0.0), Error);
  }
  SUBCASE("assembled system") {
    const FeSystem fe = testing::small_plate();
    const ScaledSystem s = local_deflation(fe, 3, ScalingKind::LocalDeflationS2);
    check_kbar_untouched(fe, s);
    CHECK(s.element_blocks.size() == fe.blocks.size());
    const SymMatrix e(s.mbar_dense().dense() - fe.m.dense());
    CHECK(testing::oracle_eigenvalues(e.dense()).minCoeff() >= -1e-12 * e.max_abs());
  }
}

TEST_CASE("Olovsson scaling") {
  const auto block = testing::thin_element();
  const double me = block.element_mass;
  SUBCASE("beta = 0 is the identity") {
    CHECK(olovsson_element_scaling(me, 0.0).dense().isZero(0.0));
  }
  SUBCASE("beta = 1: per-block eigenvalues {1, 15/7 x 7}") {
    const SymMatrix e = olovsson_element_scaling(me, 1.0);
    const Vector v = eigs(block.lumped_mass + e, block.lumped_mass);
    for (Index i = 0; i < 3; ++i) CHECK(rel(v(i), 1.0) <= 1e-12);
    for (Index i = 3; i < 24; ++i) CHECK(rel(v(i), 15.0 / 7.0) <= 1e-12);
  }
  SUBCASE("momentum conservation and semidefiniteness") {
    for (double beta : {0.5, 3.0, 100.0}) {
      for (auto variant : {OlovssonVariant::Original, OlovssonVariant::Projector}) {
        const SymMatrix e = olovsson_element_scaling(me, beta, variant);
        for (int c = 0; c < 3; ++c) {
          Vector t = Vector::Zero(24);
          t.segment(8 * c, 8).setOnes();
          CHECK((e * t).norm() <= 1e-12 * e.dense().norm());
        }
        CHECK(testing::oracle_eigenvalues(e.dense()).minCoeff() >= -1e-12 * e.dense().norm());
      }
    }
  }
  SUBCASE("projector variant spectrum 1 + beta") {
    const SymMatrix e = olovsson_element_scaling(me, 2.0, OlovssonVariant::Projector);
    const Vector v = eigs(block.lumped_mass + e, block.lumped_mass);
    for (Index i = 3; i < 24; ++i) CHECK(rel(v(i), 3.0) <= 1e-12);
  }
  SUBCASE("every flexible element mode scales by 1 + 8 beta / 7") {
    for (double beta : {1.0, 10.0}) {
      const Vector l = fine_eigs(block.stiffness, block.lumped_mass);
      const Vector lb = fine_eigs(block.stiffness, block.lumped_mass + olovsson_element_scaling(me, beta));
      for (Index k = 6; k < 24; ++k) CHECK(std::abs(lb(k) * (1.0 + 8.0 * beta / 7.0) - l(k)) <= 1e-11 * l(23));
      for (Index k = 7; k < 24; ++k) CHECK(rel(std::sqrt(l(k) / lb(k)), std::sqrt(1.0 + 8.0 * beta / 7.0)) <= 1e-9);
    }
  }
  SUBCASE("monotonicity of the assembled spectrum") {
    const FeSystem fe = testing::small_plate();
    const ScaledSystem s = olovsson(fe, 10.0);
    check_kbar_untouched(fe, s);
    const Vector l = eigs(fe.k, fe.m), lb = eigs(s);
    for (Index k = 0; k < fe.n; ++k) CHECK(lb(k) <= l(k) + 1e-10 * std::abs(l(k)) + 1e-12 * l(fe.n - 1));
  }
}

TEST_CASE("Hoffmann scaling") {
  const auto block = testing::thin_element();
  SUBCASE("beta = 0 is the identity") {
    CHECK(hoffmann_element_scaling(block.element_mass, 0.0).dense().isZero(0.0));
  }
  SUBCASE("A (x) G has spectrum {0 x 4, 2, 6, 6, 18}") {
    // With m_e = 32 and beta = 1 the prefactor beta m_e / 32 is one.
    const Matrix ag = hoffmann_element_scaling(32.0, 1.0).dense().topLeftCorner(8, 8);
    const Vector v = testing::oracle_eigenvalues(ag);
    const double expected[] = {0, 0, 0, 0, 2, 6, 6, 18};
    for (int i = 0; i < 8; ++i) CHECK(std::abs(v(i) - expected[i]) <= 1e-13 * 18.0);
  }
  SUBCASE("beta = 1 block spectrum {1 x 4, 1.5, 2.5 x 2, 5.5}") {
    const SymMatrix e = hoffmann_element_scaling(block.element_mass, 1.0);
    const Vector v = eigs(block.lumped_mass + e, block.lumped_mass);
    const double per_block[] = {1, 1, 1, 1, 1.5, 2.5, 2.5, 5.5};
    std::vector<double> expected;
    for (double x : per_block)
      for (int c = 0; c < 3; ++c) expected.push_back(x);
    std::sort(expected.begin(), expected.end());
    for (Index i = 0; i < 24; ++i) CHECK(rel(v(i), expected[static_cast<std::size_t>(i)]) <= 1e-12);
  }
  SUBCASE("momentum conservation") {
    const SymMatrix e = hoffmann_element_scaling(block.element_mass, 5.0);
    for (int c = 0; c < 3; ++c) {
      Vector t = Vector::Zero(24);
      t.segment(8 * c, 8).setOnes();
      CHECK((e * t).norm() <= 1e-12 * e.dense().norm());
    }
  }
}

TEST_CASE("eigenvalue stabilization") {
  SUBCASE("diagonal mass gets a floor") {
    Vector d = Vector::Ones(6);
    d(0) = 1e-8;
    const SymMatrix m = SymMatrix::diagonal(d);
    const SymMatrix e = stabilization_element_scaling(m, 1, 1e-2);
    const Vector v = testing::oracle_eigenvalues((m + e).dense());
    CHECK(rel(v(0), 1e-2 + 1e-8) <= 1e-12);
    for (Index i = 1; i < 6; ++i) CHECK(rel(v(i), 1.0) <= 1e-12);
  }
  SUBCASE("epsilon to zero leaves the mass unchanged") {
    const auto block = testing::thin_element();
    const SymMatrix e = stabilization_element_scaling(block.lumped_mass, 3, 1e-300);
    CHECK(e.dense().norm() <= 1e-290);
  }
  SUBCASE("rank too large") {
    try {
      stabilization_element_scaling(SymMatrix::identity(4), 4, 1.0);
      FAIL("expected RankTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::RankTooLarge);
    }
  }
}

TEST_CASE("apply dispatches every kind and keeps M_bar - M semidefinite") {
  const FeSystem fe = testing::small_plate({4, 3, 2}, {0.03, 0.02, 0.005});
  const EigDecomposition base = generalized_eig(fe.pair());
  const double top = base.values(fe.n - 1);
  const std::vector<ScalingSpec> specs = {
      ScalingSpec::cms(2.0),
      ScalingSpec::uniform_lft(1.5),
      ScalingSpec::stiffness_proportional(10.0 / top),
      ScalingSpec::polynomial(3.0 / (top * top)),
      ScalingSpec::global_deflation(5),
      ScalingSpec::local_deflation_s1(4, 2.0),
      ScalingSpec::local_deflation_s2(4),
      ScalingSpec::olovsson(3.0),
      ScalingSpec::hoffmann(3.0),
      ScalingSpec::eig_stabilization(2, 1e-3),
  };
  const Vector l = eigs(fe.k, fe.m);
  for (const auto& spec : specs) {
    CAPTURE(spec.label());
    const ScaledSystem s = apply(fe, spec, spec.kind == ScalingKind::GlobalDeflation ? &base : nullptr);
    CHECK(s.provenance.kind == spec.kind);
    CHECK(s.kbar.dense().cwiseEqual(fe.k.dense()).all());
    const Matrix e = s.mbar_dense().dense() - fe.m.dense();
    CHECK(testing::oracle_eigenvalues(e).minCoeff() >= -1e-10 * std::max(e.norm(), 1e-300));
    const Vector lb = eigs(s);
    for (Index k = 0; k < fe.n; ++k) CHECK(lb(k) <= l(k) + 1e-10 * std::abs(l(k)) + 1e-12 * top);
  }
}
