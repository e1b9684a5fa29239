#include "descobs/observability.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>

namespace descobs {

Index obsv_index(const Matrix& c, const Matrix& a, double tol) {
    require_finite(c, "obsv_index");
    require_finite(a, "obsv_index");
    if (a.rows() != a.cols() || c.cols() != a.rows()) {
        throw InvalidInputError("obsv_index: incompatible dimensions");
    }
    const Index n = a.rows();
    const Index p = c.rows();
    if (n == 0) return 0;
    if (p == 0) return 0;

    // Rescaling each block by ||A||^-k preserves the row space but keeps the
    // stacked matrix away from overflow for large powers.
    const double s = std::max(1.0, spectral_norm(a));
    Matrix scaled_a = a / s;
    Matrix stacked(p * n, n);
    Matrix block = c;
    for (Index k = 0; k < n; ++k) {
        stacked.middleRows(k * p, p) = block;
        if (k + 1 < n) block = (block * scaled_a).eval();
    }
    return ranked_svd(stacked, tol).numerical_rank;
}

ObsvDecomposition obsv_decompose(const Matrix& c, const Matrix& a, double tol) {
    require_finite(c, "obsv_decompose");
    require_finite(a, "obsv_decompose");
    if (a.rows() != a.cols() || c.cols() != a.rows()) {
        throw InvalidInputError("obsv_decompose: incompatible dimensions");
    }
    const Index n = a.rows();
    ObsvDecomposition out;
    if (n == 0) {
        out.t = Matrix(0, 0);
        out.a_o = out.a_r = out.a_u = Matrix(0, 0);
        out.c_o = Matrix(c.rows(), 0);
        out.v = 0;
        return out;
    }

    const double scale = std::max({1.0, spectral_norm(a), spectral_norm(c)});

    // Grow an orthonormal basis of the smallest A^T-invariant subspace that
    // contains rowspace(C).
    Matrix basis(n, 0);
    auto absorb = [&](const Matrix& cand) {
        Matrix res = cand;
        if (basis.cols() > 0) {
            res -= basis * (basis.transpose() * res);
            res -= basis * (basis.transpose() * res);  // second pass re-orthogonalization
        }
        if (res.size() == 0) return false;
        auto svd = Eigen::JacobiSVD<Matrix>(res, Eigen::ComputeThinU);
        Index added = 0;
        for (Index k = 0; k < svd.singularValues().size(); ++k) {
            if (svd.singularValues()(k) > tol * scale) ++added;
        }
        if (added == 0) return false;
        Matrix grown(n, basis.cols() + added);
        grown.leftCols(basis.cols()) = basis;
        grown.rightCols(added) = svd.matrixU().leftCols(added);
        basis = grown;
        return true;
    };

    Matrix fresh = c.transpose();
    while (fresh.cols() > 0 && basis.cols() < n) {
        Index before = basis.cols();
        if (!absorb(fresh)) break;
        fresh = a.transpose() * basis.rightCols(basis.cols() - before);
    }

    const Index v = basis.cols();
    Matrix t(n, n);
    if (v == 0) {
        t = Matrix::Identity(n, n);
    } else if (v == n) {
        t = basis;
    } else {
        // Complete to an orthonormal basis via the null space of basis^T.
        t.leftCols(v) = basis;
        Eigen::JacobiSVD<Matrix> svd(basis.transpose(),
                                     Eigen::ComputeFullU | Eigen::ComputeFullV);
        t.rightCols(n - v) = svd.matrixV().rightCols(n - v);
    }

    Matrix tat = t.transpose() * a * t;
    out.t = t;
    out.v = v;
    out.a_o = tat.topLeftCorner(v, v);
    out.a_r = tat.bottomLeftCorner(n - v, v);
    out.a_u = tat.bottomRightCorner(n - v, n - v);
    out.c_o = c * t.leftCols(v);
    return out;
}

bool check_R_observable(const SdfForm& sdf, double tol) {
    return obsv_index(sdf.c1, sdf.a1, tol) == sdf.n1();
}

bool check_I_observable(const SdfForm& sdf, double tol) {
    const Index n2 = sdf.n2_dim();
    if (n2 == 0) return true;
    auto f = ranked_svd(sdf.n2, tol);
    const Index r = f.numerical_rank;
    if (r == 0) return true;  // image N2 = {0}

    // Orthonormal bases: ker N2 = trailing right singular vectors, image N2 =
    // leading left singular vectors, ker C2 via SVD of C2.
    Matrix ker_n2 = f.right.rightCols(n2 - r);
    Matrix img_n2 = f.left.leftCols(r);
    auto fc = ranked_svd(sdf.c2, tol);
    Matrix ker_c2 = fc.right.rightCols(n2 - fc.numerical_rank);

    // x in all three subspaces iff the stacked complement system annihilates
    // x; the intersection is trivial iff that stack has full column rank.
    auto complement = [&](const Matrix& basis) {
        Eigen::JacobiSVD<Matrix> svd(basis.transpose(),
                                     Eigen::ComputeFullU | Eigen::ComputeFullV);
        return Matrix(svd.matrixV().rightCols(n2 - basis.cols()));
    };
    Matrix comp1 = complement(ker_n2);
    Matrix comp2 = complement(img_n2);
    Matrix comp3 = complement(ker_c2);
    Matrix stack(comp1.cols() + comp2.cols() + comp3.cols(), n2);
    stack.topRows(comp1.cols()) = comp1.transpose();
    stack.middleRows(comp1.cols(), comp2.cols()) = comp2.transpose();
    stack.bottomRows(comp3.cols()) = comp3.transpose();
    if (stack.rows() == 0) return n2 == 0;
    return ranked_svd(stack, tol).numerical_rank == n2;
}

bool check_C_observable(const SdfForm& sdf, double tol) {
    return obsv_index(sdf.c1, sdf.a1, tol) == sdf.n1() &&
           obsv_index(sdf.c2, sdf.n2, tol) == sdf.n2_dim();
}

AgentObservability analyze_agents_sdf(const DescriptorSystem& sys, const SdfForm& sdf,
                                      double tol) {
    AgentObservability out;
    for (int i = 0; i < sys.agents(); ++i) {
        out.slow.push_back(obsv_decompose(sdf.agent_c1(sys, i), sdf.a1, tol));
        out.fast.push_back(obsv_decompose(sdf.agent_c2(sys, i), sdf.n2, tol));
    }
    return out;
}

AgentObservability analyze_agents_ddf(const DescriptorSystem& sys, const DdfForm& ddf,
                                      double tol) {
    AgentObservability out;
    for (int i = 0; i < sys.agents(); ++i) {
        out.slow.push_back(obsv_decompose(ddf.agent_c1(sys, i), ddf.a11, tol));
        out.fast.push_back(obsv_decompose(ddf.agent_c2(sys, i), ddf.a22, tol));
    }
    return out;
}

Matrix g_pattern(Index dim, Index v, double g) {
    Matrix out = Matrix::Zero(dim, dim);
    for (Index k = 0; k < v; ++k) out(k, k) = g;
    return out;
}

std::vector<Matrix> joint_margin_inputs(const AgentObservability& agents,
                                        const std::vector<double>& g, bool slow_block,
                                        bool fast_block) {
    if (agents.slow.size() != g.size()) {
        throw InvalidInputError("joint_margin_inputs: one g_i per agent required");
    }
    for (double gi : g) {
        if (!(gi > 0.0)) throw InvalidInputError("joint_margin_inputs: g_i must be positive");
    }
    std::vector<Matrix> out;
    for (size_t i = 0; i < g.size(); ++i) {
        std::vector<Matrix> blocks;
        if (slow_block) {
            blocks.push_back(g_pattern(agents.slow[i].dim(), agents.slow[i].v, g[i]));
        }
        if (fast_block) {
            blocks.push_back(g_pattern(agents.fast[i].dim(), agents.fast[i].v, g[i]));
        }
        out.push_back(block_diag(blocks));
    }
    return out;
}

}  // namespace descobs
