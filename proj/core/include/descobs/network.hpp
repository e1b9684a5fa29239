#pragma once

#include "descobs/types.hpp"

namespace descobs {

// Directed communication graph on 0/1 adjacency; alpha_ij = 1 means an arc
// from node j to node i.
struct CommGraph {
    Matrix adjacency;

    explicit CommGraph(Matrix adjacency_);

    Index size() const { return adjacency.rows(); }
    Matrix laplacian() const;  // D - adjacency with D = row-sum diagonal
    double in_degree(Index i) const { return adjacency.row(i).sum(); }
};

// Reachability in both arc directions via two graph searches.
bool is_strongly_connected(const CommGraph& g);

struct PerronWeights {
    Vector r;      // positive, r^T L = 0, r^T 1 = N
    Matrix big_r;  // diag(r)
    Matrix lhat;   // R L + L^T R, symmetric positive semidefinite
};

PerronWeights perron_weights(const CommGraph& g);

struct JointMargin {
    double mu = 0.0;
    Vector spectrum;  // full eigenvalue list of the margin operator
};

// mu = lambda_min( T^T (Lhat kron I_b) T + G ) with T = blkdiag(t_blocks) and
// G = blkdiag(g_blocks). Raises JointObservabilityError when mu <= tol.
JointMargin joint_margin_mu(const CommGraph& g, const std::vector<Matrix>& t_blocks,
                            const std::vector<Matrix>& g_blocks, Index block_dim,
                            double tol = kDefaultTol);

}  // namespace descobs
