#pragma once

#include "descobs/linalg.hpp"
#include "descobs/types.hpp"

namespace descobs {

// ---------------------------------------------------------------------------
// Descriptor system E x' = A x, y = C x with output rows partitioned over N
// agents.
// ---------------------------------------------------------------------------

struct DescriptorSystem {
    Matrix e;
    Matrix a;
    Matrix c;
    std::vector<Index> partition;  // p_i per agent, sums to c.rows()

    DescriptorSystem(Matrix e_, Matrix a_, Matrix c_, std::vector<Index> partition_);

    Index n() const { return e.rows(); }
    Index p() const { return c.rows(); }
    int agents() const { return static_cast<int>(partition.size()); }
    Index agent_offset(int i) const;
    Matrix agent_c(int i) const;  // the p_i x n block C_i
};

// ---------------------------------------------------------------------------
// Regularity
// ---------------------------------------------------------------------------

struct RegularityCheck {
    bool regular = false;
    double witness_c = 0.0;    // valid when regular
    double sigma_ratio = 0.0;  // sigma_min/sigma_max of (cE - A) at the witness
};

// Scans a deterministic candidate list (then seeded random fallbacks) for a
// shift c with cE - A full rank. A degree-<=n polynomial that vanishes at n+1
// distinct points vanishes identically, so enough failures refute regularity.
RegularityCheck check_regular(const Matrix& e, const Matrix& a, double tol = kDefaultTol,
                              unsigned seed = 0);

// ---------------------------------------------------------------------------
// Standard decomposition form: Q E P = diag(I_n1, N2), Q A P = diag(A1, I_n2)
// ---------------------------------------------------------------------------

struct SdfForm {
    Matrix q;   // Q*
    Matrix p;   // P*
    Matrix a1;  // n1 x n1 slow dynamics
    Matrix n2;  // n2 x n2 nilpotent
    Matrix c1;  // p x n1
    Matrix c2;  // p x n2
    Index n1() const { return a1.rows(); }
    Index n2_dim() const { return n2.rows(); }
    Matrix agent_c1(const DescriptorSystem& sys, int i) const;
    Matrix agent_c2(const DescriptorSystem& sys, int i) const;
};

SdfForm to_sdf(const DescriptorSystem& sys, double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// Dynamic decomposition form: Q E P = diag(I_l, 0)
// ---------------------------------------------------------------------------

struct DdfForm {
    Matrix q;  // Q<>
    Matrix p;  // P<>
    Index l = 0;
    Matrix a11, a12, a21, a22;
    Matrix c1, c2;  // p x l and p x (n-l)
    Matrix agent_c1(const DescriptorSystem& sys, int i) const;
    Matrix agent_c2(const DescriptorSystem& sys, int i) const;
};

DdfForm to_ddf(const DescriptorSystem& sys, double tol = kDefaultTol);
DdfForm to_ddf_pair(const Matrix& e, const Matrix& a, const Matrix& c, double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

// True iff N2 = 0 in SDF, equivalently A22 invertible in DDF; both routes are
// computed and cross-checked. Requires a regular pencil.
bool is_impulse_free(const DescriptorSystem& sys, double tol = kDefaultTol);
bool is_impulse_free_pair(const Matrix& e, const Matrix& a, double tol = kDefaultTol);

// Spectral admissibility test: regular + impulse-free + every finite pencil
// eigenvalue with Re < -tol.
bool is_admissible(const Matrix& e, const Matrix& a, double tol = kDefaultTol);

// Secondary verifier over the generalized Lyapunov certificate: attempts to
// solve E^T X A + A^T X E = -E^T E with X > 0.
bool admissible_certificate(const Matrix& e, const Matrix& a, double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// Index-1 reduction
// ---------------------------------------------------------------------------

struct ReducedOde {
    Matrix slow;           // l x l: A11 - A12 A22^-1 A21
    Matrix algebraic_map;  // (n-l) x l: x2 = map * x1 on the consistent manifold
};

ReducedOde reduce_to_ode(const DdfForm& ddf, double tol = kDefaultTol);

}  // namespace descobs
