#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace funpls;
using namespace funpls::testing;

TEST(RelL2, ZeroForIdenticalCurves) {
    std::mt19937_64 rng(51);
    const Curve f = random_curve(unit_grid(16), rng);
    EXPECT_EQ(rel_l2(f, f), 0.0);
}

TEST(RelL2, RelativeToSecondArgument) {
    const auto g = unit_grid(11);
    const Curve one(g, Vector::Ones(11));
    const Curve two(g, Vector::Constant(11, 2.0));
    EXPECT_NEAR(rel_l2(one, two), 0.5, tol::exact);
    EXPECT_NEAR(rel_l2(two, one), 1.0, tol::exact);
}

TEST(RelL2, ZeroReferenceConvention) {
    const auto g = unit_grid(5);
    const Curve z = Curve::zero(g);
    EXPECT_EQ(rel_l2(z, z), 0.0);
    EXPECT_TRUE(std::isinf(rel_l2(Curve(g, Vector::Ones(5)), z)));
}

TEST(RelL2, KernelVersionUsesQuadratureNorm) {
    const auto g = unit_grid(9);
    const Kernel a(g, Matrix::Ones(9, 9));
    const Kernel b(g, 2.0 * Matrix::Ones(9, 9));
    EXPECT_NEAR(kernel_norm(a), 1.0, tol::exact);
    EXPECT_NEAR(rel_l2(a, b), 0.5, tol::exact);
    EXPECT_TRUE(std::isinf(rel_l2(a, Kernel(g, Matrix::Zero(9, 9)))));
}

TEST(GramDefect, OrthonormalFamily) {
    const auto basis = sine_basis(unit_grid(50), 5);
    EXPECT_LE(gram_defect<Curve>(basis, L2Product{}), tol::tight);
    EXPECT_LE(off_diagonal_defect<Curve>(basis, L2Product{}), tol::tight);
}

TEST(CondEstimate, IdentityAndSingular) {
    EXPECT_DOUBLE_EQ(cond_estimate(Matrix::Identity(4, 4)), 1.0);
    Matrix s = Matrix::Identity(3, 3);
    s(2, 2) = 0.0;
    EXPECT_TRUE(std::isinf(cond_estimate(s)));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = -0.5;
    EXPECT_DOUBLE_EQ(cond_estimate(d), 8.0);
}

TEST(Compare, PassIffWithinTolerance) {
    const auto ok = compare("x", 1.0 + 1e-9, 1.0, 1e-8);
    EXPECT_TRUE(ok.pass);
    EXPECT_NEAR(ok.relative_error, 1e-9, 1e-15);
    const auto bad = compare("x", 1.1, 1.0, 1e-8);
    EXPECT_FALSE(bad.pass);
    const auto inf = compare("zero", 1.0, 0.0, 1.0);
    EXPECT_FALSE(inf.pass);
    EXPECT_TRUE(std::isinf(inf.relative_error));
}
