#include "descobs/linalg.hpp"

#include "doctest.h"
#include "test_support.hpp"

#include <cmath>

using namespace descobs;
namespace ts = testing_support;

TEST_CASE("ranked_svd basic cases") {
    SUBCASE("identity") {
        auto f = ranked_svd(Matrix::Identity(3, 3), 1e-10);
        CHECK(f.numerical_rank == 3);
        for (int k = 0; k < 3; ++k) CHECK(f.singular_values(k) == doctest::Approx(1.0));
    }
    SUBCASE("zero matrix") {
        auto f = ranked_svd(Matrix::Zero(2, 2));
        CHECK(f.numerical_rank == 0);
    }
    SUBCASE("tiny second singular value falls below the relative threshold") {
        Matrix m(2, 2);
        m << 1.0, 0.0, 0.0, 1e-14;
        // sigma ratio 1e-14 < 1e-10 * 1, so only one direction counts
        auto f = ranked_svd(m, 1e-10);
        CHECK(f.numerical_rank == 1);
    }
    SUBCASE("non-finite input is rejected") {
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = std::nan("");
        CHECK_THROWS_AS(ranked_svd(m), InvalidInputError);
        CHECK_THROWS_AS(ranked_svd(Matrix::Identity(2, 2), 2.0), InvalidInputError);
    }
}

TEST_CASE("ranked_svd reconstruction residual on random matrices") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        Index rows = 1 + static_cast<Index>(rng() % 50);
        Index cols = 1 + static_cast<Index>(rng() % 50);
        Matrix m = ts::random_matrix(rng, rows, cols, 3.0);
        auto f = ranked_svd(m);
        Matrix sigma = Matrix::Zero(rows, cols);
        for (Index k = 0; k < f.singular_values.size(); ++k) sigma(k, k) = f.singular_values(k);
        double resid = (m - f.left * sigma * f.right.transpose()).norm();
        double gate = 10.0 * std::numeric_limits<double>::epsilon() * spectral_norm(m) *
                      static_cast<double>(std::max(rows, cols));
        CHECK(resid <= doctest::Approx(gate).epsilon(1.0));
        // orthogonality of the factors
        CHECK((f.left.transpose() * f.left - Matrix::Identity(rows, rows)).norm() < 1e-12 * rows);
        CHECK((f.right.transpose() * f.right - Matrix::Identity(cols, cols)).norm() < 1e-12 * cols);
    }
}

TEST_CASE("split_zero_cluster") {
    SUBCASE("diag(1, 0)") {
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = 1.0;
        auto s = split_zero_cluster(m);
        CHECK(s.block_invertible.rows() == 1);
        CHECK(s.block_nilpotent.rows() == 1);
        CHECK(s.block_invertible(0, 0) == doctest::Approx(1.0));
        CHECK(std::abs(s.block_nilpotent(0, 0)) < 1e-12);
    }
    SUBCASE("diag(2, 3): nilpotent block empty") {
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = 2.0;
        m(1, 1) = 3.0;
        auto s = split_zero_cluster(m);
        CHECK(s.block_invertible.rows() == 2);
        CHECK(s.block_nilpotent.rows() == 0);
    }
    SUBCASE("pure nilpotent: invertible block empty, index 2") {
        Matrix m = Matrix::Zero(2, 2);
        m(0, 1) = 1.0;
        auto s = split_zero_cluster(m);
        CHECK(s.block_invertible.rows() == 0);
        CHECK(s.block_nilpotent.rows() == 2);
        CHECK((s.block_nilpotent * s.block_nilpotent).norm() < 1e-12);
    }
    SUBCASE("ambiguous eigenvalue raises") {
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = 1.0;
        m(1, 1) = 3e-9;  // inside (tol, 10 tol) * ||M||
        CHECK_THROWS_AS(split_zero_cluster(m, 1e-9), IllConditionedSplitError);
    }
}

TEST_CASE("split_zero_cluster block-diagonalization residual on random clustered spectra") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        Index k = 1 + static_cast<Index>(rng() % 4);
        Index z = static_cast<Index>(rng() % 4);
        Index n = k + z;
        // invertible part with eigenvalues away from zero, plus a nilpotent part
        Matrix inv = ts::random_matrix(rng, k, k);
        inv += (std::abs(spectral_abscissa(inv)) + 1.0) * Matrix::Identity(k, k);
        Matrix blocks = Matrix::Zero(n, n);
        blocks.topLeftCorner(k, k) = inv;
        blocks.bottomRightCorner(z, z) = ts::random_nilpotent(rng, z);
        Matrix t = ts::random_invertible(rng, n);
        Matrix m = t * blocks * t.inverse();

        auto s = split_zero_cluster(m);
        CHECK(s.block_invertible.rows() == k);
        Matrix recombined = Matrix::Zero(n, n);
        recombined.topLeftCorner(k, k) = s.block_invertible;
        recombined.bottomRightCorner(z, z) = s.block_nilpotent;
        double resid = (s.transform.inverse() * m * s.transform - recombined).norm();
        CHECK(resid <= 1e-8 * std::max(1.0, spectral_norm(m)));
        auto nil = is_nilpotent(s.block_nilpotent, 1e-5);
        CHECK(nil.nilpotent);
    }
}

TEST_CASE("is_nilpotent") {
    CHECK(is_nilpotent(Matrix::Zero(3, 3)).nilpotent);
    CHECK(is_nilpotent(Matrix::Zero(3, 3)).index == 1);
    Matrix j = Matrix::Zero(2, 2);
    j(0, 1) = 1.0;
    auto r = is_nilpotent(j);
    CHECK(r.nilpotent);
    CHECK(r.index == 2);
    CHECK_FALSE(is_nilpotent(Matrix::Identity(2, 2)).nilpotent);
}

TEST_CASE("solve_sylvester") {
    SUBCASE("scalar") {
        Matrix a(1, 1), b(1, 1), q(1, 1);
        a << -1.0;
        b << -1.0;
        q << 2.0;
        CHECK(solve_sylvester(a, b, q)(0, 0) == doctest::Approx(-1.0));
    }
    SUBCASE("diagonal") {
        Matrix a = -2.0 * Matrix::Identity(2, 2);
        Matrix x = solve_sylvester(a, Matrix::Zero(2, 2), Matrix::Identity(2, 2));
        CHECK((x + 0.5 * Matrix::Identity(2, 2)).norm() < 1e-12);
    }
    SUBCASE("random stable A with B = A^T and Q = -I yields an SPD Gramian") {
        std::mt19937 rng(11);
        Matrix a = ts::random_hurwitz(rng, 3);
        Matrix x = solve_sylvester(a, a.transpose(), -Matrix::Identity(3, 3));
        double resid = (a * x + x * a.transpose() + Matrix::Identity(3, 3)).norm();
        CHECK(resid < 1e-8 * (1.0 + x.norm()) * (1.0 + 2.0 * spectral_norm(a)));
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + x.transpose()));
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
    SUBCASE("overlapping spectra raise") {
        Matrix a(1, 1), b(1, 1), q(1, 1);
        a << 1.0;
        b << -1.0;
        q << 1.0;
        CHECK_THROWS_AS(solve_sylvester(a, b, q), SingularEquationError);
    }
}

TEST_CASE("solve_lyapunov_standard") {
    SUBCASE("scalar with gamma = 1") {
        Matrix a(1, 1), q(1, 1);
        a << -1.0;
        q << 2.0;
        CHECK(solve_lyapunov_standard(a, q)(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("identity pair") {
        Matrix w = solve_lyapunov_standard(-Matrix::Identity(2, 2), 2.0 * Matrix::Identity(2, 2));
        CHECK((w - Matrix::Identity(2, 2)).norm() < 1e-12);
    }
    SUBCASE("upper triangular instance checked by direct multiplication") {
        Matrix a(2, 2);
        a << -1.0, 1.0, 0.0, -2.0;
        Matrix q = 2.0 * Matrix::Identity(2, 2);
        Matrix w = solve_lyapunov_standard(a, q);
        CHECK((w * a + a.transpose() * w + q).norm() < 1e-10);
        Eigen::SelfAdjointEigenSolver<Matrix> es(w);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
    SUBCASE("non-Hurwitz input raises") {
        CHECK_THROWS_AS(solve_lyapunov_standard(Matrix::Identity(2, 2), Matrix::Identity(2, 2)),
                        NoStabilizingSolutionError);
    }
}

TEST_CASE("solve_lyapunov_descriptor") {
    SUBCASE("reduces to the standard equation for E = I (scalar)") {
        Matrix e = Matrix::Identity(1, 1);
        Matrix a(1, 1), y(1, 1);
        a << -1.0;
        y << 2.0;
        CHECK(solve_lyapunov_descriptor(e, a, y)(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("identity pair") {
        Matrix x = solve_lyapunov_descriptor(Matrix::Identity(2, 2), -Matrix::Identity(2, 2),
                                             2.0 * Matrix::Identity(2, 2));
        CHECK((x - Matrix::Identity(2, 2)).norm() < 1e-10);
    }
    SUBCASE("singular E instance verified by substitution") {
        Matrix e = Matrix::Zero(2, 2);
        e(0, 0) = 1.0;
        Matrix a = Matrix::Zero(2, 2);
        a(0, 0) = -1.0;
        a(1, 1) = 1.0;
        Matrix y = 2.0 * Matrix::Identity(2, 2);
        Matrix x = solve_lyapunov_descriptor(e, a, y);
        double resid =
            (e.transpose() * x * a + a.transpose() * x * e + e.transpose() * y * e).norm();
        CHECK(resid < 1e-10);
        Eigen::SelfAdjointEigenSolver<Matrix> es(x);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
    SUBCASE("agrees with the standard solver for E = I on random Hurwitz instances") {
        std::mt19937 rng(99);
        for (int trial = 0; trial < 100; ++trial) {
            Index n = 1 + static_cast<Index>(rng() % 5);
            Matrix a = ts::random_hurwitz(rng, n);
            Matrix y = ts::random_matrix(rng, n, n);
            y = (y * y.transpose() + Matrix::Identity(n, n)).eval();
            Matrix w1 = solve_lyapunov_standard(a, y);
            Matrix w2 = solve_lyapunov_descriptor(Matrix::Identity(n, n), a, y);
            CHECK((w1 - w2).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, w1.norm()));
        }
    }
}

TEST_CASE("pencil_finite_eigenvalues") {
    SUBCASE("standard pencil") {
        Matrix a = Matrix::Zero(2, 2);
        a(0, 0) = -1.0;
        a(1, 1) = -2.0;
        auto eigs = pencil_finite_eigenvalues(Matrix::Identity(2, 2), a);
        CHECK(ts::spectra_match(eigs, {{-1.0, 0.0}, {-2.0, 0.0}}, 1e-10));
    }
    SUBCASE("singular E drops the infinite eigenvalue") {
        Matrix e = Matrix::Zero(2, 2);
        e(0, 0) = 1.0;
        Matrix a = Matrix::Zero(2, 2);
        a(0, 0) = -3.0;
        a(1, 1) = 1.0;
        auto eigs = pencil_finite_eigenvalues(e, a);
        REQUIRE(eigs.size() == 1);
        CHECK(eigs[0].real() == doctest::Approx(-3.0));
    }
    SUBCASE("E = 0 has no finite roots") {
        CHECK(pencil_finite_eigenvalues(Matrix::Zero(3, 3), Matrix::Identity(3, 3)).empty());
    }
    SUBCASE("matches dense eigenvalues for E = I on random instances") {
        std::mt19937 rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            Index n = 1 + static_cast<Index>(rng() % 8);
            Matrix a = ts::random_matrix(rng, n, n);
            auto pencil = pencil_finite_eigenvalues(Matrix::Identity(n, n), a);
            CHECK(ts::spectra_match(pencil, dense_eigenvalues(a), 1e-8));
        }
    }
}
