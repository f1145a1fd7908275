#include <gtest/gtest.h>

#include <set>
#include <tuple>

#include "carnot/algebra.hpp"
#include "carnot/error.hpp"
#include "carnot/groups.hpp"

using namespace carnot;

namespace {

RationalVector vec(std::initializer_list<long> xs) {
  RationalVector v;
  for (long x : xs) v.emplace_back(x);
  return v;
}

}  // namespace

TEST(Algebra, BuiltinsValidate) {
  for (const auto& a : {heisenberg(1), heisenberg(2), engel4(), e5(), abelian(3)}) {
    const auto r = a.validate();
    EXPECT_TRUE(r.ok) << a.name() << ": " << r.message;
  }
}

TEST(Algebra, AbelianDeclaredWithStepTwoFailsGeneration) {
  const StratifiedAlgebra a({2, 1}, {});
  const auto r = a.validate();
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.axiom, "generation");
}

TEST(Algebra, JacobiViolationIsLocated) {
  // Graded and generating, but Jacobi fails on (X1, X2, X3).
  const StratifiedAlgebra a({3, 1, 1}, {{0, 1, 3, Rational(1)}, {0, 3, 4, Rational(1)}, {1, 3, 4, Rational(1)},
                                        {1, 2, 3, Rational(1)}});
  const auto r = a.validate();
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.axiom, "jacobi");
  EXPECT_EQ(r.message.rfind("Jacobi violated at (", 0), 0u) << r.message;
}

TEST(Algebra, DiagonalRuleIsAntisymmetryFailure) {
  const StratifiedAlgebra a({2, 1}, {{0, 1, 2, Rational(1)}, {0, 0, 2, Rational(1)}});
  const auto r = a.validate();
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.axiom, "antisymmetry");
}

TEST(Algebra, GradingViolation) {
  const StratifiedAlgebra a({2, 1}, {{0, 1, 2, Rational(1)}, {0, 1, 0, Rational(1)}});
  const auto r = a.validate();
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.axiom, "grading");
}

TEST(Algebra, EngelSingleConstantMutations) {
  // Incrementing one constant breaks the axioms except when it rescales an existing
  // bracket or adds [X2,X3] = X4, which is again a valid Engel-type table.
  const auto engel = engel4();
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> still_valid;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k) {
        const auto m = engel.with_constant(i, j, k, engel.structure_constant(i, j, k) + 1);
        if (m.validate().ok) still_valid.insert({i + 1, j + 1, k + 1});
      }
  const std::set<std::tuple<std::size_t, std::size_t, std::size_t>> expected{{1, 2, 3}, {1, 3, 4}, {2, 3, 4}};
  EXPECT_EQ(still_valid, expected);
}

TEST(Algebra, Brackets) {
  const auto a = engel4();
  EXPECT_EQ(a.bracket(a.basis_vector(0), a.basis_vector(1)), a.basis_vector(2));
  EXPECT_EQ(a.bracket(a.basis_vector(1), a.basis_vector(2)), vec({0, 0, 0, 0}));
  const auto u = vec({1, -2, 3, 5});
  EXPECT_EQ(a.bracket(u, u), vec({0, 0, 0, 0}));
  EXPECT_THROW(a.bracket(vec({1, 2}), u), DimensionError);
}

TEST(Algebra, BracketRespectsGrading) {
  for (const auto& a : {heisenberg(2), engel4(), e5()}) {
    for (std::size_t i = 0; i < a.dimension(); ++i)
      for (std::size_t j = 0; j < a.dimension(); ++j) {
        const auto w = a.bracket(a.basis_vector(i), a.basis_vector(j));
        for (std::size_t k = 0; k < a.dimension(); ++k)
          if (w[k] != 0) EXPECT_EQ(a.degree_of(k), a.degree_of(i) + a.degree_of(j));
      }
  }
}

TEST(Algebra, HomogeneousDimension) {
  EXPECT_EQ(heisenberg(1).homogeneous_dimension(), 4);
  EXPECT_EQ(engel4().homogeneous_dimension(), 7);
  EXPECT_EQ(e5().homogeneous_dimension(), 11);
  EXPECT_EQ(abelian(3).homogeneous_dimension(), 3);
}

TEST(Algebra, SubalgebraClosure) {
  const auto a = engel4();
  EXPECT_TRUE(a.subalgebra_closure_check({a.basis_vector(1), a.basis_vector(2)}).closed);
  const auto r = a.subalgebra_closure_check({a.basis_vector(0), a.basis_vector(1)});
  ASSERT_FALSE(r.closed);
  EXPECT_EQ(*r.offending_pair, std::make_pair(std::size_t{0}, std::size_t{1}));
  EXPECT_EQ(r.bracket, a.basis_vector(2));
  EXPECT_EQ(r.residual, a.basis_vector(2));
  EXPECT_TRUE(a.subalgebra_closure_check({vec({1, 1, 2, 3})}).closed);
  EXPECT_THROW(a.subalgebra_closure_check({a.basis_vector(1), vec({0, 2, 0, 0})}), PreconditionError);
}

TEST(Algebra, ChangeBasisKeepsValidity) {
  const auto a = engel4();
  // Y1 = X1 + X2, Y2 = X2, Y3 = 2 X3, Y4 = X4.
  const auto b = a.change_basis({vec({1, 1, 0, 0}), vec({0, 1, 0, 0}), vec({0, 0, 2, 0}), vec({0, 0, 0, 1})});
  EXPECT_TRUE(b.validate().ok);
  EXPECT_EQ(b.structure_constant(0, 1, 2), Rational(1, 2));
  EXPECT_EQ(b.structure_constant(0, 2, 3), Rational(2));
  EXPECT_THROW(a.change_basis({vec({1, 0, 1, 0}), vec({0, 1, 0, 0}), vec({0, 0, 1, 0}), vec({0, 0, 0, 1})}),
               PreconditionError);
}

TEST(Algebra, BuiltinByName) {
  EXPECT_EQ(builtin_algebra("heisenberg").dimension(), 3u);
  EXPECT_EQ(builtin_algebra("heisenberg2").dimension(), 5u);
  EXPECT_EQ(builtin_algebra("abelian4").step(), 1u);
  EXPECT_THROW(builtin_algebra("sl2"), PreconditionError);
}
