#include "descobs/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <random>

namespace descobs {

std::vector<double> default_targets(Index count, double scale) {
    std::vector<double> t;
    for (Index k = 1; k <= count; ++k) t.push_back(-static_cast<double>(k) * scale);
    return t;
}

double default_pole_scale(const Matrix& e, const Matrix& a, double tol) {
    double worst = 0.0;
    try {
        for (const auto& l : pencil_finite_eigenvalues(e, a, tol)) {
            worst = std::max(worst, std::abs(l));
        }
    } catch (const PreconditionError&) {
        worst = 0.0;
    }
    return std::max(1.0, 2.0 * worst);
}

namespace {

// Sorted-by-(re, im) matching of an achieved spectrum against real targets.
bool spectrum_matches(const ComplexVector& achieved, const std::vector<double>& targets,
                      double rel_tol) {
    if (achieved.size() != targets.size()) return false;
    ComplexVector a = achieved;
    std::vector<double> t = targets;
    auto cmp = [](const Complex& x, const Complex& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    };
    std::sort(a.begin(), a.end(), cmp);
    std::sort(t.begin(), t.end());
    for (size_t k = 0; k < t.size(); ++k) {
        if (std::abs(a[k] - Complex(t[k], 0.0)) > rel_tol * std::max(1.0, std::abs(t[k]))) {
            return false;
        }
    }
    return true;
}

// Keeps targets off the spectrum of `a` so the Sylvester route stays
// nonsingular; the nudge is far below the 1e-6 matching tolerance.
std::vector<double> separate_targets(std::vector<double> targets, const Matrix& a) {
    ComplexVector spec = dense_eigenvalues(a);
    for (double& t : targets) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (const auto& l : spec) {
                if (std::abs(l - Complex(t, 0.0)) < 1e-8 * std::max(1.0, std::abs(t))) {
                    t *= 1.0 + 1e-7;
                    t -= 1e-9;
                    moved = true;
                }
            }
        }
    }
    return targets;
}

}  // namespace

Matrix place_hurwitz(const Matrix& a, const Matrix& c, const std::vector<double>& targets,
                     unsigned seed, double tol) {
    const Index n = a.rows();
    const Index p = c.rows();
    if (n == 0) return Matrix(0, p);
    if (obsv_index(c, a, tol) != n) {
        throw TheoremPreconditionError("place_hurwitz: the pair (C, A) is not observable");
    }
    if (static_cast<Index>(targets.size()) != n) {
        throw InvalidInputError("place_hurwitz: one target per state required");
    }

    std::vector<double> t = separate_targets(targets, a);
    Matrix f = Matrix::Zero(n, n);
    for (Index k = 0; k < n; ++k) f(k, k) = t[static_cast<size_t>(k)];

    std::mt19937 rng(seed * 7919u + 13u);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (int attempt = 0; attempt < 12; ++attempt) {
        Matrix g(p, n);
        if (attempt == 0 && p >= 1) {
            g.setOnes();  // deterministic first try
        } else {
            for (Index i = 0; i < p; ++i)
                for (Index j = 0; j < n; ++j) g(i, j) = dist(rng);
        }
        Matrix x;
        try {
            // A^T X - X F = C^T G, then H = X^-T G^T places A - H C at spec(F).
            x = solve_sylvester(a.transpose(), -f, c.transpose() * g);
        } catch (const PreconditionError&) {
            continue;
        } catch (const NumericalError&) {
            continue;
        }
        if (condition_number(x) > 1e12) continue;
        Matrix h = x.transpose().partialPivLu().solve(g.transpose());
        if (!h.allFinite()) continue;
        if (spectrum_matches(dense_eigenvalues(a - h * c), targets, 1e-6)) return h;
    }
    throw SynthesisFailureError("place_hurwitz: no parameter draw met the placement tolerance");
}

Matrix place_admissible(const Matrix& e_o, const Matrix& a_o, const Matrix& c_o,
                        const std::vector<double>& targets, unsigned seed, double tol) {
    const Index n = e_o.rows();
    const Index p = c_o.rows();
    if (n == 0) return Matrix(0, p);

    DdfForm ddf = to_ddf_pair(e_o, a_o, c_o, tol);
    const Index l = ddf.l;
    const Index nf = n - l;
    Matrix qinv = ddf.q.inverse();

    // Extend the target list to the full slow dimension of the reduction.
    std::vector<double> tgt = targets;
    const double extend_scale = tgt.empty() ? 1.0 : std::abs(tgt.back());
    while (static_cast<Index>(tgt.size()) < l) {
        tgt.push_back(-static_cast<double>(tgt.size() + 1) * std::max(1.0, extend_scale));
    }
    tgt.resize(static_cast<size_t>(l));

    std::mt19937 rng(seed * 2654435761u + 17u);
    std::normal_distribution<double> dist(0.0, 1.0);
    const double a_scale = std::max(1.0, spectral_norm(a_o));
    const double c_scale = std::max(1.0, spectral_norm(c_o));

    // Strategy (a): fix the fast rows, then place the slow Schur complement
    // exactly; the complement is affine in the slow rows.
    for (int attempt = 0; attempt < 24; ++attempt) {
        Matrix h2 = Matrix::Zero(nf, p);
        if (attempt > 0) {
            for (Index i = 0; i < nf; ++i)
                for (Index j = 0; j < p; ++j) h2(i, j) = dist(rng) * a_scale / c_scale;
        }
        Matrix m22 = ddf.a22 - h2 * ddf.c2;
        if (nf > 0 && condition_number(m22) > kConditionCeiling) continue;
        Matrix coupled = ddf.a21 - h2 * ddf.c1;
        Matrix ae = ddf.a11;
        Matrix ce = ddf.c1;
        if (nf > 0) {
            Matrix m22_inv_coupled = m22.partialPivLu().solve(coupled);
            ae -= ddf.a12 * m22_inv_coupled;
            ce -= ddf.c2 * m22_inv_coupled;
        }
        Matrix h1;
        try {
            h1 = place_hurwitz(ae, ce, tgt, seed + static_cast<unsigned>(attempt), tol);
        } catch (const PreconditionError&) {
            continue;
        } catch (const NumericalError&) {
            continue;
        }
        Matrix hhat(n, p);
        hhat.topRows(l) = h1;
        hhat.bottomRows(nf) = h2;
        Matrix h = qinv * hhat;
        try {
            if (is_admissible(e_o, a_o - h * c_o, tol)) {
                ComplexVector spec = pencil_finite_eigenvalues(e_o, a_o - h * c_o, tol);
                if (spectrum_matches(spec, tgt, 1e-4)) return h;
            }
        } catch (const PreconditionError&) {
        } catch (const NumericalError&) {
        }
    }

    // Strategy (b): randomized sampling verified by the admissibility test.
    for (int attempt = 0; attempt < 200; ++attempt) {
        Matrix h(n, p);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < p; ++j) h(i, j) = dist(rng) * a_scale / c_scale;
        try {
            if (is_admissible(e_o, a_o - h * c_o, tol)) return h;
        } catch (const PreconditionError&) {
        } catch (const NumericalError&) {
        }
    }
    throw SynthesisFailureError(
        "place_admissible: no gain found; pair may not be C-observable or targets unreachable");
}

// ---------------------------------------------------------------------------
// Theorem 1 (SDF path)
// ---------------------------------------------------------------------------

namespace {

std::vector<double> agent_weights(const SynthesisOptions& options, int agents) {
    if (options.g_weights.empty()) return std::vector<double>(static_cast<size_t>(agents), 1.0);
    if (static_cast<int>(options.g_weights.size()) != agents) {
        throw InvalidInputError("options.g_weights: one entry per agent required");
    }
    return options.g_weights;
}

Matrix padded_gain(const ObsvDecomposition& dec, const Matrix& h_core, Index p_i) {
    Matrix padded = Matrix::Zero(dec.dim(), p_i);
    padded.topRows(dec.v) = h_core;
    return dec.t * padded;
}

}  // namespace

ObserverDesignSdf design_sdf(const DescriptorSystem& sys, const SdfForm& sdf,
                             const AgentObservability& agents, const CommGraph& graph,
                             const SynthesisOptions& options) {
    const Index n = sys.n();
    const Index n1 = sdf.n1();
    const Index n2 = sdf.n2_dim();
    const int N = sys.agents();
    if (graph.size() != N) throw InvalidInputError("design_sdf: graph size != agent count");
    if (!is_strongly_connected(graph)) {
        throw NotConnectedError("design_sdf: Assumption 1 fails (graph not strongly connected)");
    }
    if (!check_R_observable(sdf, options.tol) || !check_I_observable(sdf, options.tol)) {
        throw TheoremPreconditionError(
            "design_sdf: Assumption 2 fails (system not R- and I-observable from the full output)");
    }

    const bool n2_zero =
        n2 == 0 || spectral_norm(sdf.n2) <= 1e-6 * std::max(1.0, spectral_norm(sys.e));
    for (int i = 0; i < N; ++i) {
        const Index v2 = agents.fast[static_cast<size_t>(i)].v;
        if (v2 != n2 && !n2_zero) {
            throw TheoremPreconditionError(
                "design_sdf: condition v_{i2}=n_2 fails for agent " + std::to_string(i + 1));
        }
    }

    const double pole_scale = options.pole_scale > 0.0
                                  ? options.pole_scale
                                  : default_pole_scale(sys.e, sys.a, options.tol);
    const std::vector<double> g = agent_weights(options, N);
    PerronWeights pw = perron_weights(graph);

    ObserverDesignSdf design;
    design.sdf = sdf;
    design.perron_r = pw.r;

    std::vector<Matrix> yu_blocks;
    for (int i = 0; i < N; ++i) {
        const auto& slow = agents.slow[static_cast<size_t>(i)];
        const auto& fast = agents.fast[static_cast<size_t>(i)];
        const Index v1 = slow.v;
        const Index v2 = fast.v;
        const Index p_i = sys.partition[static_cast<size_t>(i)];

        SdfAgentBlocks blk;
        blk.v1 = v1;
        blk.v2 = v2;

        Matrix e_o = block_diag({Matrix::Identity(v1, v1), fast.a_o});
        Matrix a_o = block_diag({slow.a_o, Matrix::Identity(v2, v2)});
        Matrix c_o(p_i, v1 + v2);
        c_o.leftCols(v1) = slow.c_o;
        c_o.rightCols(v2) = fast.c_o;

        std::vector<double> targets = default_targets(v1, pole_scale);
        design.targets = targets;
        Matrix h_o = place_admissible(e_o, a_o, c_o, targets,
                                      options.seed + static_cast<unsigned>(i), options.tol);
        blk.h1o = h_o.topRows(v1);
        blk.h2o = h_o.bottomRows(v2);

        if (v1 + v2 > 0) {
            blk.w_tilde_o = solve_lyapunov_descriptor(
                e_o, a_o - h_o * c_o,
                options.y_scale * Matrix::Identity(v1 + v2, v1 + v2), options.tol);
        } else {
            blk.w_tilde_o = Matrix(0, 0);
        }

        // H_i = Q*^-1 col{T_i1 [H_i1o; 0], T_i2 [H_i2o; 0]}.
        Matrix h_full(n, p_i);
        h_full.topRows(n1) = padded_gain(slow, blk.h1o, p_i);
        h_full.bottomRows(n2) = padded_gain(fast, blk.h2o, p_i);
        design.h.push_back(sdf.q.partialPivLu().solve(h_full));

        // W~_i interleaves the Lyapunov solution with identity on the
        // unobservable coordinates of both blocks.
        Matrix w_tilde = Matrix::Identity(n, n);
        w_tilde.block(0, 0, v1, v1) = blk.w_tilde_o.topLeftCorner(v1, v1);
        w_tilde.block(0, n1, v1, v2) = blk.w_tilde_o.topRightCorner(v1, v2);
        w_tilde.block(n1, 0, v2, v1) = blk.w_tilde_o.bottomLeftCorner(v2, v1);
        w_tilde.block(n1, n1, v2, v2) = blk.w_tilde_o.bottomRightCorner(v2, v2);
        Matrix t_i = block_diag({slow.t, fast.t});
        blk.w_ti = t_i * w_tilde * t_i.transpose();
        design.w.push_back(sdf.q.partialPivLu().solve(blk.w_ti * sdf.q));

        // Unobservable remainder that the coupling gain has to dominate.
        Matrix yu = Matrix::Zero(n1, n1);
        yu.topRightCorner(v1, n1 - v1) = slow.a_r.transpose();
        yu.bottomLeftCorner(n1 - v1, v1) = slow.a_r;
        yu.bottomRightCorner(n1 - v1, n1 - v1) = sym(slow.a_u);
        yu_blocks.push_back(pw.r(i) * yu);

        design.blocks.push_back(std::move(blk));
    }

    design.y_tilde_u = block_diag(yu_blocks);
    design.sigma_bar_yu = spectral_norm(design.y_tilde_u);

    // Joint margin: full blocks on the strict Theorem-1 path; when N2 = 0 the
    // fast coordinates are killed by the E-weighting, so the slow blocks carry
    // the margin.
    std::vector<Matrix> t_blocks, g_blocks;
    Index block_dim = 0;
    if (n2_zero && n2 > 0) {
        block_dim = n1;
        for (int i = 0; i < N; ++i) {
            t_blocks.push_back(agents.slow[static_cast<size_t>(i)].t);
            g_blocks.push_back(
                g_pattern(n1, agents.slow[static_cast<size_t>(i)].v, g[static_cast<size_t>(i)]));
        }
    } else {
        block_dim = n;
        for (int i = 0; i < N; ++i) {
            const auto& slow = agents.slow[static_cast<size_t>(i)];
            const auto& fast = agents.fast[static_cast<size_t>(i)];
            t_blocks.push_back(block_diag({slow.t, fast.t}));
            g_blocks.push_back(block_diag({g_pattern(n1, slow.v, g[static_cast<size_t>(i)]),
                                           g_pattern(n2, fast.v, g[static_cast<size_t>(i)])}));
        }
    }
    design.mu = joint_margin_mu(graph, t_blocks, g_blocks, block_dim, options.tol).mu;

    design.gamma = design.sigma_bar_yu <= options.tol
                       ? options.gamma_floor
                       : options.safety_factor * design.sigma_bar_yu / design.mu;

    // Certify; on failure sweep the gain upward before giving up.
    VerifyReport report = verify_design(sys, graph, design, options.tol);
    if (!report.admissible) {
        double gamma = std::max(design.gamma, options.gamma_floor);
        for (int k = 0; k <= 20 && !report.admissible; ++k) {
            design.gamma = gamma * std::pow(2.0, k);
            report = verify_design(sys, graph, design, options.tol);
        }
        if (!report.admissible) {
            throw SynthesisFailureError(
                "design_sdf: synthesized error dynamics failed admissibility verification");
        }
    }
    return design;
}

// ---------------------------------------------------------------------------
// Theorem 2 (DDF path)
// ---------------------------------------------------------------------------

ObserverDesignDdf design_ddf(const DescriptorSystem& sys, const DdfForm& ddf,
                             const AgentObservability& agents, const CommGraph& graph,
                             const SynthesisOptions& options) {
    const Index n = sys.n();
    const Index l = ddf.l;
    const Index nf = n - l;
    const int N = sys.agents();
    if (graph.size() != N) throw InvalidInputError("design_ddf: graph size != agent count");
    if (!is_strongly_connected(graph)) {
        throw NotConnectedError("design_ddf: Assumption 1 fails (graph not strongly connected)");
    }
    if (obsv_index(ddf.c1, ddf.a11, options.tol) != l) {
        throw TheoremPreconditionError(
            "design_ddf: Assumption 3 fails ((C<>1, A11) not observable from the full output)");
    }
    if (obsv_index(ddf.c2, ddf.a22, options.tol) != nf) {
        throw TheoremPreconditionError(
            "design_ddf: Assumption 3 fails ((C<>2, A22) not observable from the full output)");
    }

    const double pole_scale = options.pole_scale > 0.0
                                  ? options.pole_scale
                                  : default_pole_scale(sys.e, sys.a, options.tol);
    const std::vector<double> g = agent_weights(options, N);
    PerronWeights pw = perron_weights(graph);

    ObserverDesignDdf design;
    design.ddf = ddf;
    design.perron_r = pw.r;

    Matrix qinv = ddf.q.inverse();
    std::vector<Matrix> w1_core_inv, w2_core_inv;  // gamma * W~^-1, gamma-free
    std::vector<Matrix> w1_core, w2_core;          // W~ at gamma = 1
    for (int i = 0; i < N; ++i) {
        const auto& slow = agents.slow[static_cast<size_t>(i)];
        const auto& fast = agents.fast[static_cast<size_t>(i)];
        const Index p_i = sys.partition[static_cast<size_t>(i)];
        DdfAgentBlocks blk;
        blk.v1 = slow.v;
        blk.v2 = fast.v;

        design.targets_slow = default_targets(slow.v, pole_scale);
        design.targets_fast = default_targets(fast.v, pole_scale);
        blk.h1o = place_hurwitz(slow.a_o, slow.c_o, design.targets_slow,
                                options.seed + 101u * static_cast<unsigned>(i + 1), options.tol);
        blk.h2o = place_hurwitz(fast.a_o, fast.c_o, design.targets_fast,
                                options.seed + 211u * static_cast<unsigned>(i + 1), options.tol);

        Matrix h_full(n, p_i);
        h_full.topRows(l) = padded_gain(slow, blk.h1o, p_i);
        h_full.bottomRows(nf) = padded_gain(fast, blk.h2o, p_i);
        design.h.push_back(qinv * h_full);

        // Lyapunov cores at gamma = 1; the solution scales linearly in gamma,
        // and the identity padding on unobservable coordinates scales along.
        Matrix core1 =
            slow.v > 0 ? solve_lyapunov_standard(slow.a_o - blk.h1o * slow.c_o,
                                                 2.0 * Matrix::Identity(slow.v, slow.v))
                       : Matrix(0, 0);
        Matrix core2 =
            fast.v > 0 ? solve_lyapunov_standard(fast.a_o - blk.h2o * fast.c_o,
                                                 2.0 * Matrix::Identity(fast.v, fast.v))
                       : Matrix(0, 0);
        Matrix pad1 = block_diag({core1, Matrix::Identity(l - slow.v, l - slow.v)});
        Matrix pad2 = block_diag({core2, Matrix::Identity(nf - fast.v, nf - fast.v)});
        w1_core.push_back(pad1);
        w2_core.push_back(pad2);
        w1_core_inv.push_back(pad1.inverse());
        w2_core_inv.push_back(pad2.inverse());
        design.blocks.push_back(std::move(blk));
    }

    // Joint margins of Lemma-6 type for both block families.
    std::vector<Matrix> t1_blocks, t2_blocks, g1_blocks, g2_blocks;
    for (int i = 0; i < N; ++i) {
        t1_blocks.push_back(agents.slow[static_cast<size_t>(i)].t);
        t2_blocks.push_back(agents.fast[static_cast<size_t>(i)].t);
        g1_blocks.push_back(
            g_pattern(l, agents.slow[static_cast<size_t>(i)].v, g[static_cast<size_t>(i)]));
        g2_blocks.push_back(
            g_pattern(nf, agents.fast[static_cast<size_t>(i)].v, g[static_cast<size_t>(i)]));
    }
    double mu = std::numeric_limits<double>::infinity();
    if (l > 0) mu = std::min(mu, joint_margin_mu(graph, t1_blocks, g1_blocks, l, options.tol).mu);
    if (nf > 0) mu = std::min(mu, joint_margin_mu(graph, t2_blocks, g2_blocks, nf, options.tol).mu);
    design.mu = mu;

    // gamma-free pieces of the proof's transformed error blocks.
    Matrix laplacian = graph.laplacian();
    Matrix t1 = block_diag(t1_blocks);
    Matrix t2 = block_diag(t2_blocks);
    std::vector<Matrix> l11_blocks, l12_blocks, l21_blocks, l22_blocks, l11u_blocks, l22u_blocks;
    for (int i = 0; i < N; ++i) {
        const auto& blk = design.blocks[static_cast<size_t>(i)];
        Matrix hsplit = ddf.q * design.h[static_cast<size_t>(i)];
        Matrix h1 = hsplit.topRows(l);
        Matrix h2 = hsplit.bottomRows(nf);
        Matrix c1 = ddf.agent_c1(sys, i);
        Matrix c2 = ddf.agent_c2(sys, i);
        l11_blocks.push_back(ddf.a11 - h1 * c1);
        l12_blocks.push_back(ddf.a12 - h1 * c2);
        l21_blocks.push_back(ddf.a21 - h2 * c1);
        l22_blocks.push_back(ddf.a22 - h2 * c2);

        const auto& slow = agents.slow[static_cast<size_t>(i)];
        const auto& fast = agents.fast[static_cast<size_t>(i)];
        Matrix u11 = Matrix::Zero(l, l);
        u11.bottomLeftCorner(l - blk.v1, blk.v1) = slow.a_r;
        u11.bottomRightCorner(l - blk.v1, l - blk.v1) = slow.a_u;
        l11u_blocks.push_back(pw.r(i) * u11);
        Matrix u22 = Matrix::Zero(nf, nf);
        u22.bottomLeftCorner(nf - blk.v2, blk.v2) = fast.a_r;
        u22.bottomRightCorner(nf - blk.v2, nf - blk.v2) = fast.a_u;
        l22u_blocks.push_back(pw.r(i) * u22);
    }
    Matrix lam11 = t1.transpose() * block_diag(l11_blocks) * t1;
    Matrix lam12 = t1.transpose() * block_diag(l12_blocks) * t2;
    Matrix lam21 = t2.transpose() * block_diag(l21_blocks) * t1;
    Matrix lam22 = t2.transpose() * block_diag(l22_blocks) * t2;
    Matrix coupling1 =
        block_diag(w1_core_inv) * t1.transpose() * kron(laplacian, Matrix::Identity(l, l)) * t1;
    Matrix coupling2 =
        block_diag(w2_core_inv) * t2.transpose() * kron(laplacian, Matrix::Identity(nf, nf)) * t2;
    Matrix lam11_tilde = lam11 - coupling1;  // gamma-free by the W~ scaling
    Matrix lam22_tilde = lam22 - coupling2;
    Matrix lam22u = block_diag(l22u_blocks);
    Matrix lam11u = block_diag(l11u_blocks);
    design.lambda1 = spectral_norm(sym(lam22u));

    Matrix rkron = kron(Matrix(pw.big_r), Matrix::Identity(l, l));
    Matrix x11_unit = rkron * block_diag(w1_core);  // X11 at gamma = 1

    auto lambda2_at = [&](double gamma) {
        if (l == 0) return 0.0;
        Matrix x11 = gamma * x11_unit;
        Matrix s1 = sym(x11 * lam11u);
        double lam2 = 0.0;
        if (s1.size() > 0) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s1 + s1.transpose()));
            lam2 = es.eigenvalues().maxCoeff();
        }
        if (nf > 0) {
            if (condition_number(lam22_tilde) > 1e14) {
                throw NumericalError("design_ddf: Lambda~22 is numerically singular");
            }
            Matrix s2 = sym(lam22_tilde.partialPivLu().solve(x11 * lam12 * lam21));
            lam2 += spectral_norm(0.5 * (s2 + s2.transpose()));
        }
        return lam2;
    };

    // Damped fixed point on the coupling gain; lambda2 depends on gamma
    // through X11 and the weights.
    double gamma = options.gamma_floor;
    bool converged = false;
    try {
        for (int k = 0; k < options.max_gamma_iters; ++k) {
            design.lambda2 = lambda2_at(gamma);
            double next = std::max(options.safety_factor *
                                       std::max(design.lambda1, design.lambda2) / design.mu,
                                   options.gamma_floor);
            if (std::abs(next - gamma) <= 0.01 * next) {
                gamma = next;
                converged = true;
                break;
            }
            gamma = next;
        }
    } catch (const NumericalError&) {
        converged = false;
    }

    auto finalize = [&](double gm) {
        design.gamma = gm;
        design.w.clear();
        for (int i = 0; i < N; ++i) {
            auto& blk = design.blocks[static_cast<size_t>(i)];
            const auto& slow = agents.slow[static_cast<size_t>(i)];
            const auto& fast = agents.fast[static_cast<size_t>(i)];
            blk.w_tilde_t1 = gm * w1_core[static_cast<size_t>(i)].topLeftCorner(blk.v1, blk.v1);
            blk.w_tilde_t2 = gm * w2_core[static_cast<size_t>(i)].topLeftCorner(blk.v2, blk.v2);
            blk.w_t1 = slow.t * (gm * w1_core[static_cast<size_t>(i)]) * slow.t.transpose();
            blk.w_t2 = fast.t * (gm * w2_core[static_cast<size_t>(i)]) * fast.t.transpose();
            // W_i = P<> diag(W_T,i1, W_T,i2) Q<> so that Q<> W_i^-1 P<> is block
            // diagonal in the decomposed coordinates.
            design.w.push_back(ddf.p * block_diag({blk.w_t1, blk.w_t2}) * ddf.q);
        }
    };

    finalize(gamma);
    VerifyReport report = verify_design(sys, graph, design, options.tol);
    if (converged && report.admissible) return design;

    // Geometric sweep fallback with the verifier as acceptor.
    for (int k = 0; k <= 20; ++k) {
        finalize(options.gamma_floor * std::pow(2.0, k));
        report = verify_design(sys, graph, design, options.tol);
        if (report.admissible) return design;
    }
    throw SynthesisFailureError(
        "design_ddf: coupling-gain iteration failed and the geometric sweep found no "
        "admissible gain");
}

// ---------------------------------------------------------------------------
// Error pencils and verification
// ---------------------------------------------------------------------------

std::pair<Matrix, Matrix> error_pencil_sdf(const DescriptorSystem& sys, const CommGraph& graph,
                                           const ObserverDesignSdf& design) {
    const Index n = sys.n();
    const Index n1 = design.sdf.n1();
    const Index n2 = design.sdf.n2_dim();
    const int N = sys.agents();

    Matrix ebar = Matrix::Zero(n, n);
    ebar.topLeftCorner(n1, n1) = Matrix::Identity(n1, n1);
    ebar.bottomRightCorner(n2, n2) = design.sdf.n2;

    std::vector<Matrix> abar_blocks, w_blocks, e_blocks;
    for (int i = 0; i < N; ++i) {
        Matrix hsplit = design.sdf.q * design.h[static_cast<size_t>(i)];
        Matrix ci(sys.partition[static_cast<size_t>(i)], n);
        ci << design.sdf.agent_c1(sys, i), design.sdf.agent_c2(sys, i);
        Matrix abar = Matrix::Zero(n, n);
        abar.topLeftCorner(n1, n1) = design.sdf.a1;
        abar.bottomRightCorner(n2, n2) = Matrix::Identity(n2, n2);
        abar -= hsplit * ci;
        abar_blocks.push_back(abar);
        w_blocks.push_back(design.blocks[static_cast<size_t>(i)].w_ti);
        e_blocks.push_back(ebar);
    }
    Matrix e_g = block_diag(e_blocks);
    Matrix wbar = block_diag(w_blocks);
    Matrix a_g = block_diag(abar_blocks) -
                 design.gamma * wbar.partialPivLu().solve(
                                    kron(graph.laplacian(), Matrix::Identity(n, n)) * e_g);
    return {e_g, a_g};
}

std::pair<Matrix, Matrix> error_pencil_ddf(const DescriptorSystem& sys, const CommGraph& graph,
                                           const ObserverDesignDdf& design) {
    const Index n = sys.n();
    const Index l = design.ddf.l;
    const Index nf = n - l;
    const int N = sys.agents();

    std::vector<Matrix> l11, l12, l21, l22, w1, w2;
    for (int i = 0; i < N; ++i) {
        Matrix hsplit = design.ddf.q * design.h[static_cast<size_t>(i)];
        Matrix h1 = hsplit.topRows(l);
        Matrix h2 = hsplit.bottomRows(nf);
        Matrix c1 = design.ddf.agent_c1(sys, i);
        Matrix c2 = design.ddf.agent_c2(sys, i);
        l11.push_back(design.ddf.a11 - h1 * c1);
        l12.push_back(design.ddf.a12 - h1 * c2);
        l21.push_back(design.ddf.a21 - h2 * c1);
        l22.push_back(design.ddf.a22 - h2 * c2);
        w1.push_back(design.blocks[static_cast<size_t>(i)].w_t1);
        w2.push_back(design.blocks[static_cast<size_t>(i)].w_t2);
    }
    Matrix lap = graph.laplacian();
    Matrix e_g = Matrix::Zero(n * N, n * N);
    e_g.topLeftCorner(l * N, l * N) = Matrix::Identity(l * N, l * N);
    Matrix a_g(n * N, n * N);
    a_g.topLeftCorner(l * N, l * N) =
        block_diag(l11) - design.gamma * block_diag(w1).partialPivLu().solve(
                                             kron(lap, Matrix::Identity(l, l)));
    a_g.topRightCorner(l * N, nf * N) = block_diag(l12);
    a_g.bottomLeftCorner(nf * N, l * N) = block_diag(l21);
    a_g.bottomRightCorner(nf * N, nf * N) =
        block_diag(l22) - design.gamma * block_diag(w2).partialPivLu().solve(
                                             kron(lap, Matrix::Identity(nf, nf)));
    return {e_g, a_g};
}

namespace {

VerifyReport verify_pencil(const Matrix& e_g, const Matrix& a_g, double tol) {
    VerifyReport report;
    report.global_dim = e_g.rows();
    RegularityCheck reg = check_regular(e_g, a_g, tol);
    report.regular = reg.regular;
    report.witness_c = reg.witness_c;
    if (!report.regular) return report;
    try {
        report.impulse_free = is_impulse_free_pair(e_g, a_g, tol);
        report.finite_spectrum = pencil_finite_eigenvalues(e_g, a_g, tol);
    } catch (const PreconditionError&) {
        return report;
    } catch (const NumericalError&) {
        return report;
    }
    report.max_real_part = -std::numeric_limits<double>::infinity();
    for (const auto& lmb : report.finite_spectrum) {
        report.max_real_part = std::max(report.max_real_part, lmb.real());
    }
    report.stable = report.max_real_part < -tol;
    report.admissible = report.regular && report.impulse_free && report.stable;
    return report;
}

}  // namespace

VerifyReport verify_design(const DescriptorSystem& sys, const CommGraph& graph,
                           const ObserverDesignSdf& design, double tol) {
    auto [e_g, a_g] = error_pencil_sdf(sys, graph, design);
    return verify_pencil(e_g, a_g, tol);
}

VerifyReport verify_design(const DescriptorSystem& sys, const CommGraph& graph,
                           const ObserverDesignDdf& design, double tol) {
    auto [e_g, a_g] = error_pencil_ddf(sys, graph, design);
    return verify_pencil(e_g, a_g, tol);
}

}  // namespace descobs
