#pragma once

#include "descobs/descriptor.hpp"
#include "descobs/network.hpp"
#include "descobs/observability.hpp"
#include "descobs/types.hpp"

#include <optional>

namespace descobs {

struct SynthesisOptions {
    double tol = kDefaultTol;
    double safety_factor = 1.1;  // multiplies the coupling-gain lower bound
    double gamma_floor = 1.0;
    // Placement targets are {-1, -2, ...} * pole_scale; 0 selects the default
    // 2 * max |finite plant eigenvalue| with floor 1.
    double pole_scale = 0.0;
    std::vector<double> g_weights;  // per-agent margin weights, default all 1
    double y_scale = 1.0;           // Y = y_scale * I in the descriptor Lyapunov solve
    unsigned seed = 1u;
    int max_gamma_iters = 50;
};

// ---------------------------------------------------------------------------
// Pole placement
// ---------------------------------------------------------------------------

// Output-injection gain H with spec(A - H C) matching target_spectrum to 1e-6
// relative. Requires (C, A) observable.
Matrix place_hurwitz(const Matrix& a, const Matrix& c, const std::vector<double>& targets,
                     unsigned seed = 1u, double tol = kDefaultTol);

// Output-injection gain H making the pencil (E_o, A_o - H C_o) admissible with
// the finite spectrum at target_spectrum where assignable. Strategy ladder:
// exact slow placement through the index-1 reduction, then randomized repair.
Matrix place_admissible(const Matrix& e_o, const Matrix& a_o, const Matrix& c_o,
                        const std::vector<double>& targets, unsigned seed = 1u,
                        double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// Designs
// ---------------------------------------------------------------------------

struct SdfAgentBlocks {
    Matrix h1o, h2o;      // observable-block injection gains
    Matrix w_tilde_o;     // SPD solution of the descriptor Lyapunov equation
    Matrix w_ti;          // T_i W~_i T_i^T in SDF coordinates
    Index v1 = 0, v2 = 0;
};

struct ObserverDesignSdf {
    std::vector<Matrix> h;  // per-agent n x p_i
    std::vector<Matrix> w;  // per-agent n x n, invertible
    double gamma = 0.0;
    // provenance
    std::vector<SdfAgentBlocks> blocks;
    Matrix y_tilde_u;
    double sigma_bar_yu = 0.0;
    double mu = 0.0;
    Vector perron_r;
    SdfForm sdf;
    std::vector<double> targets;
};

struct DdfAgentBlocks {
    Matrix h1o, h2o;
    Matrix w_t1, w_t2;              // padded SPD weights in decomposed coordinates
    Matrix w_tilde_t1, w_tilde_t2;  // observable-block cores
    Index v1 = 0, v2 = 0;
};

struct ObserverDesignDdf {
    std::vector<Matrix> h;
    std::vector<Matrix> w;
    double gamma = 0.0;
    std::vector<DdfAgentBlocks> blocks;
    double lambda1 = 0.0, lambda2 = 0.0;
    double mu = 0.0;
    Vector perron_r;
    DdfForm ddf;
    std::vector<double> targets_slow, targets_fast;
};

ObserverDesignSdf design_sdf(const DescriptorSystem& sys, const SdfForm& sdf,
                             const AgentObservability& agents, const CommGraph& graph,
                             const SynthesisOptions& options = {});

ObserverDesignDdf design_ddf(const DescriptorSystem& sys, const DdfForm& ddf,
                             const AgentObservability& agents, const CommGraph& graph,
                             const SynthesisOptions& options = {});

// ---------------------------------------------------------------------------
// Certification of the assembled error dynamics
// ---------------------------------------------------------------------------

struct VerifyReport {
    bool regular = false;
    bool impulse_free = false;
    bool stable = false;
    bool admissible = false;
    double witness_c = 0.0;
    double max_real_part = 0.0;
    ComplexVector finite_spectrum;
    Index global_dim = 0;
};

VerifyReport verify_design(const DescriptorSystem& sys, const CommGraph& graph,
                           const ObserverDesignSdf& design, double tol = kDefaultTol);
VerifyReport verify_design(const DescriptorSystem& sys, const CommGraph& graph,
                           const ObserverDesignDdf& design, double tol = kDefaultTol);

// Global error pencils in decomposed coordinates (exposed for the realization
// equivalence suite).
std::pair<Matrix, Matrix> error_pencil_sdf(const DescriptorSystem& sys, const CommGraph& graph,
                                           const ObserverDesignSdf& design);
std::pair<Matrix, Matrix> error_pencil_ddf(const DescriptorSystem& sys, const CommGraph& graph,
                                           const ObserverDesignDdf& design);

// Default placement targets {-1,...,-k} * scale.
std::vector<double> default_targets(Index count, double scale);
double default_pole_scale(const Matrix& e, const Matrix& a, double tol);

}  // namespace descobs
