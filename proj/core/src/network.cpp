#include "descobs/network.hpp"

#include "descobs/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <vector>

namespace descobs {

CommGraph::CommGraph(Matrix adjacency_) : adjacency(std::move(adjacency_)) {
    if (adjacency.rows() != adjacency.cols()) {
        throw InvalidInputError("CommGraph: adjacency must be square");
    }
    for (Index i = 0; i < adjacency.rows(); ++i) {
        if (adjacency(i, i) != 0.0) {
            throw InvalidInputError("CommGraph: self-loops are not allowed");
        }
        for (Index j = 0; j < adjacency.cols(); ++j) {
            if (adjacency(i, j) != 0.0 && adjacency(i, j) != 1.0) {
                throw InvalidInputError("CommGraph: adjacency entries must be 0 or 1");
            }
        }
    }
}

Matrix CommGraph::laplacian() const {
    Matrix l = -adjacency;
    for (Index i = 0; i < adjacency.rows(); ++i) l(i, i) = adjacency.row(i).sum();
    return l;
}

namespace {

// alpha_ij = 1 is an arc j -> i; reach() follows arcs forward from `start`.
std::vector<bool> reach(const Matrix& adj, Index start, bool transpose) {
    const Index n = adj.rows();
    std::vector<bool> seen(static_cast<size_t>(n), false);
    std::vector<Index> stack = {start};
    seen[static_cast<size_t>(start)] = true;
    while (!stack.empty()) {
        Index u = stack.back();
        stack.pop_back();
        for (Index v = 0; v < n; ++v) {
            const double arc = transpose ? adj(u, v) : adj(v, u);
            if (arc != 0.0 && !seen[static_cast<size_t>(v)]) {
                seen[static_cast<size_t>(v)] = true;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

}  // namespace

bool is_strongly_connected(const CommGraph& g) {
    const Index n = g.size();
    if (n == 0) return false;
    if (n == 1) return true;
    for (bool t : {false, true}) {
        for (bool ok : reach(g.adjacency, 0, t)) {
            if (!ok) return false;
        }
    }
    return true;
}

PerronWeights perron_weights(const CommGraph& g) {
    if (!is_strongly_connected(g)) {
        throw NotConnectedError("perron_weights: the graph is not strongly connected");
    }
    const Index n = g.size();
    Matrix l = g.laplacian();

    // r^T L = 0 means r spans the left null space of L, i.e. the smallest
    // singular direction of L on the U side.
    auto f = ranked_svd(l, kDefaultTol);
    Vector r = f.left.col(n - 1);
    if (r.sum() < 0.0) r = -r;
    PerronWeights out;
    if (r.minCoeff() <= 0.0) {
        throw NumericalError("perron_weights: left null vector is not strictly positive");
    }
    r *= static_cast<double>(n) / r.sum();
    out.r = r;
    out.big_r = r.asDiagonal();
    out.lhat = out.big_r * l + l.transpose() * out.big_r;
    return out;
}

JointMargin joint_margin_mu(const CommGraph& g, const std::vector<Matrix>& t_blocks,
                            const std::vector<Matrix>& g_blocks, Index block_dim, double tol) {
    const Index n_agents = g.size();
    if (static_cast<Index>(t_blocks.size()) != n_agents ||
        static_cast<Index>(g_blocks.size()) != n_agents) {
        throw InvalidInputError("joint_margin_mu: one T and G block per agent required");
    }
    if (!is_strongly_connected(g)) {
        throw NotConnectedError("joint_margin_mu: the graph is not strongly connected");
    }
    for (const auto& b : t_blocks) {
        if (b.rows() != block_dim || b.cols() != block_dim) {
            throw InvalidInputError("joint_margin_mu: T block dimension mismatch");
        }
    }

    PerronWeights pw = perron_weights(g);
    Matrix t = block_diag(t_blocks);
    Matrix gm = block_diag(g_blocks);
    Matrix op = t.transpose() * kron(pw.lhat, Matrix::Identity(block_dim, block_dim)) * t + gm;
    op = 0.5 * (op + op.transpose()).eval();

    JointMargin out;
    if (op.rows() == 0) {
        out.mu = 0.0;
        out.spectrum = Vector(0);
        throw JointObservabilityError("joint_margin_mu: empty margin operator", 0.0);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(op);
    out.spectrum = es.eigenvalues();
    out.mu = out.spectrum(0);
    if (out.mu <= tol) {
        throw JointObservabilityError(
            "joint_margin_mu: the union of agent observations is insufficient (mu = " +
                std::to_string(out.mu) + ")",
            out.mu);
    }
    return out;
}

}  // namespace descobs
