#include "descobs/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace descobs {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Eigen::JacobiSVD<Matrix> full_svd(const Matrix& m) {
    return Eigen::JacobiSVD<Matrix>(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

}  // namespace

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

double condition_number(const Matrix& m) {
    if (m.size() == 0) return 1.0;
    Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
    double smin = s(s.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

Matrix block_diag(const std::vector<Matrix>& blocks) {
    Index rows = 0, cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Matrix out = Matrix::Zero(rows, cols);
    Index r = 0, c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

RankedFactorization ranked_svd(const Matrix& m, double tol) {
    require_finite(m, "ranked_svd");
    if (tol <= 0.0 || tol >= 1.0) {
        throw InvalidInputError("ranked_svd: tol must lie in (0, 1)");
    }
    RankedFactorization out;
    if (m.rows() == 0 || m.cols() == 0) {
        out.left = Matrix::Identity(m.rows(), m.rows());
        out.right = Matrix::Identity(m.cols(), m.cols());
        out.singular_values = Vector(0);
        out.numerical_rank = 0;
        return out;
    }
    auto svd = full_svd(m);
    out.left = svd.matrixU();
    out.right = svd.matrixV();
    out.singular_values = svd.singularValues();
    const double smax = out.singular_values(0);
    out.numerical_rank = 0;
    if (smax > 0.0) {
        for (Index k = 0; k < out.singular_values.size(); ++k) {
            if (out.singular_values(k) > tol * smax) ++out.numerical_rank;
        }
    }
    return out;
}

namespace {

// Solves the small Sylvester system A X - X B = C densely via Kronecker
// expansion; used for Schur block swaps and block-diagonalization where the
// two spectra are guaranteed disjoint.
Matrix solve_sylvester_minus(const Matrix& a, const Matrix& b, const Matrix& c) {
    const Index n = a.rows();
    const Index m = b.rows();
    if (n == 0 || m == 0) return Matrix::Zero(n, m);
    Matrix k = kron(Matrix::Identity(m, m), a) - kron(b.transpose(), Matrix::Identity(n, n));
    Eigen::Map<const Vector> rhs(c.data(), c.size());
    Vector x = k.partialPivLu().solve(rhs);
    return Eigen::Map<const Matrix>(x.data(), n, m);
}

struct SchurBlock {
    Index start = 0;
    Index size = 1;    // 1 or 2
    double mag = 0.0;  // |eigenvalue| of the block
};

double block_eig_magnitude(const Matrix& t, Index start, Index size) {
    if (size == 1) return std::abs(t(start, start));
    // 2x2 block holding a complex pair: |lambda|^2 = det
    const double det = t(start, start) * t(start + 1, start + 1) -
                       t(start, start + 1) * t(start + 1, start);
    return std::sqrt(std::max(det, 0.0));
}

std::vector<SchurBlock> scan_blocks(const Matrix& t, double subdiag_tol) {
    std::vector<SchurBlock> blocks;
    const Index n = t.rows();
    Index i = 0;
    while (i < n) {
        SchurBlock b;
        b.start = i;
        b.size = (i + 1 < n && std::abs(t(i + 1, i)) > subdiag_tol) ? 2 : 1;
        b.mag = block_eig_magnitude(t, i, b.size);
        blocks.push_back(b);
        i += b.size;
    }
    return blocks;
}

// Swap two adjacent diagonal blocks of a real Schur form in place,
// accumulating the orthogonal similarity into u.
void swap_adjacent_blocks(Matrix& t, Matrix& u, Index i, Index p, Index q) {
    const Index w = p + q;
    Matrix a11 = t.block(i, i, p, p);
    Matrix a12 = t.block(i, i + p, p, q);
    Matrix a22 = t.block(i + p, i + p, q, q);
    // Columns of [X; I] span the invariant subspace of the trailing block.
    Matrix x = solve_sylvester_minus(a11, a22, -a12);
    Matrix z(w, q);
    z.topRows(p) = x;
    z.bottomRows(q) = Matrix::Identity(q, q);
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix qfull = qr.householderQ();
    t.middleRows(i, w) = (qfull.transpose() * t.middleRows(i, w)).eval();
    t.middleCols(i, w) = (t.middleCols(i, w) * qfull).eval();
    u.middleCols(i, w) = (u.middleCols(i, w) * qfull).eval();
    // The block that moved down is decoupled by construction; make it exact.
    t.block(i + q, i, p, q).setZero();
}

}  // namespace

SpectralSplit split_zero_cluster(const Matrix& m, double tol) {
    require_finite(m, "split_zero_cluster");
    if (m.rows() != m.cols()) {
        throw InvalidInputError("split_zero_cluster: matrix must be square");
    }
    const Index n = m.rows();
    SpectralSplit out;
    if (n == 0) {
        out.transform = Matrix::Identity(0, 0);
        out.block_invertible = Matrix(0, 0);
        out.block_nilpotent = Matrix(0, 0);
        return out;
    }
    const double nrm = spectral_norm(m);
    if (nrm <= tol) {
        out.transform = Matrix::Identity(n, n);
        out.block_invertible = Matrix(0, 0);
        out.block_nilpotent = m;
        return out;
    }

    // The dimension of the generalized zero eigenspace is n - rank(M^n);
    // defective zero eigenvalues scatter to radius ~ eps^(1/k) under
    // perturbation, so a literal magnitude threshold cannot see them. The
    // range of M^k is tracked through re-orthogonalized stages to keep the
    // rank decision scale-free.
    Index range_dim = n;
    {
        // stage ranks judged against the original ||M||, not the stage's own
        // largest singular value (which can itself be noise)
        auto orth_range = [&](const Matrix& x) {
            Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU);
            Index rank = 0;
            for (Index k = 0; k < svd.singularValues().size(); ++k) {
                if (svd.singularValues()(k) > tol * nrm) ++rank;
            }
            return Matrix(svd.matrixU().leftCols(rank));
        };
        Matrix basis = orth_range(m);
        for (Index k = 0; k < n && basis.cols() > 0; ++k) {
            Matrix next = orth_range(m * basis);
            if (next.cols() == basis.cols()) {
                basis = next;
                break;
            }
            basis = next;
        }
        range_dim = basis.cols();
    }
    const Index dim_nil = n - range_dim;

    Eigen::RealSchur<Matrix> schur(m);
    Matrix t = schur.matrixT();
    Matrix u = schur.matrixU();
    const double subdiag_tol = kEps * std::max(1.0, nrm);

    // Pick the dim_nil smallest-magnitude dimensions as the zero cluster.
    double cluster_gate = 0.0;
    {
        std::vector<double> mags;
        for (const auto& b : scan_blocks(t, subdiag_tol)) {
            for (Index k = 0; k < b.size; ++k) mags.push_back(b.mag);
        }
        std::sort(mags.begin(), mags.end());
        if (dim_nil > 0) {
            const double inside = mags[static_cast<size_t>(dim_nil - 1)];
            const double outside =
                dim_nil < n ? mags[static_cast<size_t>(dim_nil)] : std::numeric_limits<double>::max();
            if (outside < 10.0 * std::max(inside, tol * nrm)) {
                throw IllConditionedSplitError(
                    "split_zero_cluster: eigenvalue magnitude " + std::to_string(outside) +
                        " is too close to the zero cluster to classify",
                    outside);
            }
            cluster_gate = 0.5 * (inside + std::min(outside, 2.0 * inside + tol * nrm));
            cluster_gate = std::max(cluster_gate, tol * nrm);
        } else if (!mags.empty() && mags.front() < 10.0 * tol * nrm) {
            throw IllConditionedSplitError(
                "split_zero_cluster: eigenvalue magnitude " + std::to_string(mags.front()) +
                    " falls in the clustering ambiguity band",
                mags.front());
        }
    }

    // Bubble zero-cluster blocks to the bottom-right.
    bool moved = true;
    while (moved) {
        moved = false;
        auto blocks = scan_blocks(t, subdiag_tol);
        for (size_t k = 0; k + 1 < blocks.size(); ++k) {
            const bool left_zero = blocks[k].mag <= cluster_gate;
            const bool right_zero = blocks[k + 1].mag <= cluster_gate;
            if (left_zero && !right_zero) {
                swap_adjacent_blocks(t, u, blocks[k].start, blocks[k].size, blocks[k + 1].size);
                moved = true;
                break;
            }
        }
    }

    Index dim_inv = 0;
    for (const auto& b : scan_blocks(t, subdiag_tol)) {
        if (b.mag > cluster_gate) dim_inv += b.size;
    }
    if (n - dim_inv != dim_nil) {
        throw IllConditionedSplitError(
            "split_zero_cluster: a complex pair straddles the zero-cluster boundary",
            cluster_gate);
    }

    Matrix t11 = t.topLeftCorner(dim_inv, dim_inv);
    Matrix t12 = t.topRightCorner(dim_inv, dim_nil);
    Matrix t22 = t.bottomRightCorner(dim_nil, dim_nil);

    // Decouple the two clusters: T11 Y - Y T22 = -T12.
    Matrix y = solve_sylvester_minus(t11, t22, -t12);
    Matrix coupling = Matrix::Identity(n, n);
    coupling.topRightCorner(dim_inv, dim_nil) = y;

    out.transform = u * coupling;
    out.block_invertible = t11;
    out.block_nilpotent = t22;

    // a posteriori certification of the split
    Matrix recombined = Matrix::Zero(n, n);
    recombined.topLeftCorner(dim_inv, dim_inv) = t11;
    recombined.bottomRightCorner(dim_nil, dim_nil) = t22;
    Matrix inv_coupling = Matrix::Identity(n, n);
    inv_coupling.topRightCorner(dim_inv, dim_nil) = -y;
    const double resid = (inv_coupling * u.transpose() * m * out.transform - recombined).norm();
    if (resid > 1e-8 * std::max(1.0, nrm)) {
        throw NumericalError("split_zero_cluster: block-diagonalization residual too large");
    }
    return out;
}

NilpotencyTest is_nilpotent(const Matrix& m, double tol) {
    require_finite(m, "is_nilpotent");
    if (m.rows() != m.cols()) {
        throw InvalidInputError("is_nilpotent: matrix must be square");
    }
    const Index n = m.rows();
    NilpotencyTest out;
    if (n == 0) {
        out.nilpotent = true;
        out.index = 0;
        return out;
    }
    const double nrm = spectral_norm(m);
    const double lognrm = std::log(std::max(nrm, 1.0));
    Matrix p = m;
    for (Index k = 1; k <= n; ++k) {
        const double lognp = std::log(std::max(spectral_norm(p), kEps * kEps));
        if (lognp <= std::log(tol) + static_cast<double>(k) * lognrm) {
            out.nilpotent = true;
            out.index = k;
            return out;
        }
        if (k < n) p = (p * m).eval();
    }
    return out;
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& q) {
    require_finite(a, "solve_sylvester");
    require_finite(b, "solve_sylvester");
    require_finite(q, "solve_sylvester");
    if (a.rows() != a.cols() || b.rows() != b.cols() || q.rows() != a.rows() ||
        q.cols() != b.rows()) {
        throw InvalidInputError("solve_sylvester: incompatible dimensions");
    }
    const Index n = a.rows();
    const Index m = b.rows();
    if (n == 0 || m == 0) return Matrix::Zero(n, m);

    const double scale = std::max({spectral_norm(a), spectral_norm(b), 1.0});
    ComplexVector ea = dense_eigenvalues(a);
    ComplexVector eb = dense_eigenvalues(b);
    for (const auto& la : ea) {
        for (const auto& lb : eb) {
            if (std::abs(la + lb) <= 1e-12 * scale) {
                throw SingularEquationError(
                    "solve_sylvester: spectra of A and -B overlap; equation is singular");
            }
        }
    }

    Matrix k = kron(Matrix::Identity(m, m), a) + kron(b.transpose(), Matrix::Identity(n, n));
    Eigen::Map<const Vector> rhs(q.data(), q.size());
    Vector xv = k.partialPivLu().solve(rhs);
    Matrix x = Eigen::Map<const Matrix>(xv.data(), n, m);

    const double resid = (a * x + x * b - q).norm();
    const double gate = 1e-8 * (spectral_norm(a) + spectral_norm(b)) * x.norm() + 1e-12;
    if (resid > std::max(gate, 1e-12)) {
        throw NumericalError("solve_sylvester: residual " + std::to_string(resid) +
                             " exceeds contract");
    }
    return x;
}

Matrix solve_lyapunov_standard(const Matrix& a_cl, const Matrix& q_rhs) {
    require_finite(a_cl, "solve_lyapunov_standard");
    require_finite(q_rhs, "solve_lyapunov_standard");
    if (a_cl.rows() != a_cl.cols() || q_rhs.rows() != q_rhs.cols() ||
        a_cl.rows() != q_rhs.rows()) {
        throw InvalidInputError("solve_lyapunov_standard: incompatible dimensions");
    }
    const Index n = a_cl.rows();
    if (n == 0) return Matrix(0, 0);
    if (spectral_abscissa(a_cl) >= 0.0) {
        throw NoStabilizingSolutionError("solve_lyapunov_standard: A_cl is not Hurwitz");
    }
    if ((q_rhs - q_rhs.transpose()).norm() > 1e-9 * std::max(1.0, q_rhs.norm())) {
        throw InvalidInputError("solve_lyapunov_standard: Q_rhs must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> qe(0.5 * (q_rhs + q_rhs.transpose()));
    if (qe.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidInputError("solve_lyapunov_standard: Q_rhs must be positive definite");
    }

    // W A + A^T W = -Q is the Sylvester equation A^T W + W A = -Q.
    Matrix w = solve_sylvester(a_cl.transpose(), a_cl, -q_rhs);
    w = 0.5 * (w + w.transpose()).eval();

    const double resid = (w * a_cl + a_cl.transpose() * w + q_rhs).norm();
    const double gate = 1e-8 * std::max(1.0, spectral_norm(a_cl)) * std::max(1.0, w.norm());
    if (resid > gate) {
        throw NumericalError("solve_lyapunov_standard: residual exceeds contract");
    }
    return w;
}

Matrix solve_lyapunov_descriptor(const Matrix& e, const Matrix& a, const Matrix& y, double tol) {
    require_finite(e, "solve_lyapunov_descriptor");
    require_finite(a, "solve_lyapunov_descriptor");
    require_finite(y, "solve_lyapunov_descriptor");
    const Index n = e.rows();
    if (e.cols() != n || a.rows() != n || a.cols() != n || y.rows() != n || y.cols() != n) {
        throw InvalidInputError("solve_lyapunov_descriptor: incompatible dimensions");
    }
    if (n == 0) return Matrix(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> ye(0.5 * (y + y.transpose()));
    if (ye.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidInputError("solve_lyapunov_descriptor: Y must be positive definite");
    }

    // Rank-revealing reduction Q E P = diag(I_l, 0).
    auto f = ranked_svd(e, tol);
    const Index l = f.numerical_rank;
    Matrix scaling = Matrix::Identity(n, n);
    for (Index i = 0; i < l; ++i) scaling(i, i) = 1.0 / f.singular_values(i);
    Matrix q = scaling * f.left.transpose();
    Matrix p = f.right;

    Matrix ahat = q * a * p;
    Matrix a11 = ahat.topLeftCorner(l, l);
    Matrix a12 = ahat.topRightCorner(l, n - l);
    Matrix a21 = ahat.bottomLeftCorner(n - l, l);
    Matrix a22 = ahat.bottomRightCorner(n - l, n - l);

    Matrix qinv_t = q.inverse().transpose();
    Matrix yhat = qinv_t.transpose() * 0.5 * (y + y.transpose()) * qinv_t;  // Q^-T Y Q^-1
    Matrix y11 = yhat.topLeftCorner(l, l);

    Matrix x11, x12;
    if (l == 0) {
        // Purely algebraic pair: the equation is vacuous, any SPD X works.
        return Matrix::Identity(n, n);
    }
    if (n - l > 0) {
        if (!invertible_at_scale(a22, spectral_norm(ahat), tol)) {
            throw NoStabilizingSolutionError(
                "solve_lyapunov_descriptor: pair is not impulse-free (A22 singular)");
        }
        Matrix a22_inv_a21 = a22.partialPivLu().solve(a21);
        Matrix a_slow = a11 - a12 * a22_inv_a21;
        x11 = solve_lyapunov_standard(a_slow, 0.5 * (y11 + y11.transpose()));
        x12 = -x11 * a12 * a22.inverse();
    } else {
        x11 = solve_lyapunov_standard(a11, 0.5 * (y11 + y11.transpose()));
        x12 = Matrix(l, 0);
    }

    // Free (2,2) block chosen to make X positive definite via Schur complement.
    Matrix xhat = Matrix::Zero(n, n);
    xhat.topLeftCorner(l, l) = x11;
    if (n - l > 0) {
        xhat.topRightCorner(l, n - l) = x12;
        xhat.bottomLeftCorner(n - l, l) = x12.transpose();
        Matrix comp = x12.transpose() * x11.ldlt().solve(x12);
        xhat.bottomRightCorner(n - l, n - l) =
            comp + std::max(1.0, spectral_norm(x11)) * Matrix::Identity(n - l, n - l);
    }
    Matrix x = q.transpose() * xhat * q;
    x = 0.5 * (x + x.transpose()).eval();

    const double resid =
        (e.transpose() * x * a + a.transpose() * x * e + e.transpose() * y * e).norm();
    const double gate = 1e-8 * std::max(1.0, spectral_norm(e) * spectral_norm(e)) *
                        std::max(1.0, spectral_norm(a)) * std::max(1.0, x.norm());
    if (resid > gate) {
        throw NumericalError("solve_lyapunov_descriptor: residual exceeds contract");
    }
    return x;
}

ComplexVector dense_eigenvalues(const Matrix& m) {
    if (m.size() == 0) return {};
    Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
    ComplexVector out(static_cast<size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i) out[static_cast<size_t>(i)] = es.eigenvalues()(i);
    return out;
}

double spectral_abscissa(const Matrix& m) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& l : dense_eigenvalues(m)) worst = std::max(worst, l.real());
    return worst;
}

bool invertible_at_scale(const Matrix& m, double scale, double tol) {
    if (m.rows() != m.cols()) return false;
    if (m.rows() == 0) return true;
    Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
    return s(s.size() - 1) > tol * std::max({scale, s(0), 1.0});
}

namespace {

// Dimension of the generalized zero eigenspace of M, rank-iterated with
// thresholds pinned to ||M|| (robust against defective-eigenvalue halos).
Index generalized_zero_defect(const Matrix& m, double tol) {
    const Index n = m.rows();
    if (n == 0) return 0;
    const double nrm = spectral_norm(m);
    if (nrm <= tol) return n;
    auto orth_range = [&](const Matrix& x) {
        Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU);
        Index rank = 0;
        for (Index k = 0; k < svd.singularValues().size(); ++k) {
            if (svd.singularValues()(k) > tol * nrm) ++rank;
        }
        return Matrix(svd.matrixU().leftCols(rank));
    };
    Matrix basis = orth_range(m);
    for (Index k = 0; k < n && basis.cols() > 0; ++k) {
        Matrix next = orth_range(m * basis);
        const bool stable = next.cols() == basis.cols();
        basis = next;
        if (stable) break;
    }
    return n - basis.cols();
}

}  // namespace

ComplexVector pencil_finite_eigenvalues(const Matrix& e, const Matrix& a, double tol) {
    require_finite(e, "pencil_finite_eigenvalues");
    require_finite(a, "pencil_finite_eigenvalues");
    const Index n = e.rows();
    if (e.cols() != n || a.rows() != n || a.cols() != n) {
        throw InvalidInputError("pencil_finite_eigenvalues: incompatible dimensions");
    }
    if (n == 0) return {};
    if (spectral_norm(e) == 0.0) {
        // det(lambda*0 - A) is constant; a regular pencil has no finite roots.
        if (condition_number(a) == std::numeric_limits<double>::infinity()) {
            throw DegeneratePencilError("pencil_finite_eigenvalues: pencil (0, A) is singular");
        }
        return {};
    }

    // Count the finite eigenvalues first: infinite eigenvalues of (E, A) are
    // the generalized zero eigenvalues of (cE - A)^-1 E for any regular shift.
    Index n_finite = -1;
    {
        const double scale = std::max(spectral_norm(e), spectral_norm(a));
        for (double c : {0.0, 1.0, -1.0, 2.0, -2.0, 10.0, -10.0, 100.0, -100.0, 3.7, -4.3}) {
            Matrix shifted = c * e - a;
            Eigen::JacobiSVD<Matrix> svd(shifted);
            const Vector& sv = svd.singularValues();
            if (sv(sv.size() - 1) <= 1e-7 * std::max(sv(0), scale)) continue;
            Matrix ehat = shifted.partialPivLu().solve(e);
            n_finite = n - generalized_zero_defect(ehat, tol);
            break;
        }
        if (n_finite < 0) {
            throw DegeneratePencilError(
                "pencil_finite_eigenvalues: no shift renders the pencil invertible");
        }
    }

    Eigen::RealQZ<Matrix> qz(a, e);
    if (qz.info() != Eigen::Success) {
        throw NumericalError("pencil_finite_eigenvalues: QZ iteration failed");
    }
    const Matrix& s = qz.matrixS();
    const Matrix& t = qz.matrixT();
    const double sscale = std::max(spectral_norm(s), kEps);

    // Rank the generalized eigenvalues by how "finite" they look and keep the
    // n_finite best; the count, not a beta threshold, decides.
    struct Entry {
        Complex lambda;
        double score;
    };
    std::vector<Entry> entries;
    Index i = 0;
    while (i < n) {
        const bool pair = (i + 1 < n) && std::abs(s(i + 1, i)) > kEps * sscale;
        if (!pair) {
            const double alpha = s(i, i);
            const double beta = t(i, i);
            const double denom = std::abs(alpha) + std::abs(beta);
            if (denom <= 1e3 * kEps * sscale) {
                throw DegeneratePencilError(
                    "pencil_finite_eigenvalues: alpha and beta both vanish (singular pencil)");
            }
            Entry entry;
            entry.score = std::abs(beta) / denom;
            entry.lambda = entry.score > 0.0 ? Complex(alpha / beta, 0.0)
                                             : Complex(std::numeric_limits<double>::infinity(), 0.0);
            entries.push_back(entry);
            i += 1;
        } else {
            // det(S2 - lambda T2) = qa lambda^2 + qb lambda + qc
            const Matrix s2 = s.block(i, i, 2, 2);
            const Matrix t2 = t.block(i, i, 2, 2);
            const double qa = t2(0, 0) * t2(1, 1) - t2(0, 1) * t2(1, 0);
            const double qc = s2(0, 0) * s2(1, 1) - s2(0, 1) * s2(1, 0);
            const double qb = -(s2(0, 0) * t2(1, 1) + s2(1, 1) * t2(0, 0) -
                                s2(0, 1) * t2(1, 0) - s2(1, 0) * t2(0, 1));
            const Complex disc = std::sqrt(Complex(qb * qb - 4.0 * qa * qc, 0.0));
            const double score =
                std::sqrt(std::abs(qa)) / (std::sqrt(std::abs(qa)) + std::sqrt(std::abs(qc)) + kEps);
            for (double sign : {1.0, -1.0}) {
                Entry entry;
                entry.score = score;
                if (std::abs(qa) > 0.0) {
                    entry.lambda = (-qb + sign * disc) / (2.0 * qa);
                } else {
                    entry.lambda = Complex(std::numeric_limits<double>::infinity(), 0.0);
                }
                entries.push_back(entry);
            }
            i += 2;
        }
    }

    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& x, const Entry& y) { return x.score > y.score; });
    ComplexVector out;
    for (Index k = 0; k < n_finite; ++k) {
        const Complex lambda = entries[static_cast<size_t>(k)].lambda;
        if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) {
            throw NumericalError(
                "pencil_finite_eigenvalues: finite-count selection hit a non-finite eigenvalue");
        }
        out.push_back(lambda);
    }
    return out;
}

}  // namespace descobs
