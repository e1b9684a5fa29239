#pragma once

#include "descobs/descriptor.hpp"
#include "descobs/types.hpp"

namespace descobs {

// ---------------------------------------------------------------------------
// Orthogonal observability decomposition
//   T^T A T = [A_o  0 ; A_r  A_u],  C T = [C_o  0]
// with the observable block first and v = dim of the observable subspace.
// ---------------------------------------------------------------------------

struct ObsvDecomposition {
    Matrix t;    // orthogonal n x n
    Matrix a_o;  // v x v
    Matrix a_r;  // (n-v) x v
    Matrix a_u;  // (n-v) x (n-v)
    Matrix c_o;  // p x v
    Index v = 0;
    Index dim() const { return t.rows(); }
};

// Rank of the stacked observability matrix [C; CA; ...; CA^{n-1}] at the
// global rank tolerance (blocks are rescaled per power for conditioning).
Index obsv_index(const Matrix& c, const Matrix& a, double tol = kDefaultTol);

// Orthogonal staircase iteration on the observability subspace; avoids the
// conditioning of explicit CA^k powers.
ObsvDecomposition obsv_decompose(const Matrix& c, const Matrix& a, double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// R / I / C observability of a descriptor system in SDF coordinates
// ---------------------------------------------------------------------------

bool check_R_observable(const SdfForm& sdf, double tol = kDefaultTol);
bool check_I_observable(const SdfForm& sdf, double tol = kDefaultTol);
bool check_C_observable(const SdfForm& sdf, double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// Per-agent decompositions feeding the synthesis margins
// ---------------------------------------------------------------------------

struct AgentObservability {
    std::vector<ObsvDecomposition> slow;  // one per agent
    std::vector<ObsvDecomposition> fast;  // one per agent
};

// SDF path: per-agent decompositions of (C*_{i1}, A1) and (C*_{i2}, N2).
AgentObservability analyze_agents_sdf(const DescriptorSystem& sys, const SdfForm& sdf,
                                      double tol = kDefaultTol);

// DDF path: per-agent decompositions of (C<>_{i1}, A11) and (C<>_{i2}, A22).
AgentObservability analyze_agents_ddf(const DescriptorSystem& sys, const DdfForm& ddf,
                                      double tol = kDefaultTol);

// diag(g_i I_{v_i}, 0) pattern for one agent and one block.
Matrix g_pattern(Index dim, Index v, double g);

// Per-agent joint-margin inputs G_i = diag(g_i I_{v_i1}, 0, g_i I_{v_i2}, 0)
// over the two blocks of each agent's decomposition (SDF uses block dims
// (n1, n2); DDF calls it once per block family).
std::vector<Matrix> joint_margin_inputs(const AgentObservability& agents,
                                        const std::vector<double>& g, bool slow_block,
                                        bool fast_block);

}  // namespace descobs
