#include "descobs/synthesis.hpp"

#include "doctest.h"
#include "test_support.hpp"

using namespace descobs;
namespace ts = testing_support;

namespace {

// Three agents each measuring one state of a diagonal plant: no agent is
// individually observable, the union is.
DescriptorSystem diagonal_three_agent(const Vector& modes) {
    const Index n = modes.size();
    Matrix a = modes.asDiagonal();
    return DescriptorSystem(Matrix::Identity(n, n), a, Matrix::Identity(n, n),
                            std::vector<Index>(3, 1));
}

}  // namespace

TEST_CASE("place_hurwitz") {
    SUBCASE("scalar textbook case") {
        Matrix a(1, 1), c(1, 1);
        a << 1.0;
        c << 1.0;
        Matrix h = place_hurwitz(a, c, {-1.0});
        CHECK(h(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
    }
    SUBCASE("double integrator: unique SISO gain col(3, 2)") {
        Matrix a(2, 2);
        a << 0.0, 1.0, 0.0, 0.0;
        Matrix c(1, 2);
        c << 1.0, 0.0;
        Matrix h = place_hurwitz(a, c, {-1.0, -2.0});
        CHECK(h(0, 0) == doctest::Approx(3.0).epsilon(1e-5));
        CHECK(h(1, 0) == doctest::Approx(2.0).epsilon(1e-5));
    }
    SUBCASE("already-placed spectrum") {
        Matrix a = -Matrix::Identity(2, 2);
        Matrix h = place_hurwitz(a, Matrix::Identity(2, 2), {-1.0, -1.0});
        auto eigs = dense_eigenvalues(a - h * Matrix::Identity(2, 2));
        CHECK(ts::spectra_match(eigs, {{-1.0, 0.0}, {-1.0, 0.0}}, 1e-6));
    }
    SUBCASE("unobservable pair raises") {
        Matrix a = Matrix::Zero(2, 2);
        a(0, 0) = 1.0;
        a(1, 1) = 2.0;
        Matrix c(1, 2);
        c << 1.0, 0.0;
        CHECK_THROWS_AS(place_hurwitz(a, c, {-1.0, -2.0}), TheoremPreconditionError);
    }
    SUBCASE("random observable pairs hit their targets") {
        std::mt19937 rng(17);
        for (int trial = 0; trial < 25; ++trial) {
            Index n = 1 + static_cast<Index>(rng() % 5);
            Index p = 1 + static_cast<Index>(rng() % 2);
            Matrix a = ts::random_matrix(rng, n, n);
            Matrix c = ts::random_matrix(rng, p, n);
            if (obsv_index(c, a) != n) continue;
            auto targets = default_targets(n, 1.5);
            Matrix h = place_hurwitz(a, c, targets, 3 + trial);
            ComplexVector expect;
            for (double t : targets) expect.emplace_back(t, 0.0);
            CHECK(ts::spectra_match(dense_eigenvalues(a - h * c), expect, 1e-6));
        }
    }
}

TEST_CASE("place_admissible") {
    SUBCASE("normal case reduces to classical placement") {
        std::mt19937 rng(19);
        Matrix a = ts::random_matrix(rng, 3, 3);
        Matrix c = ts::random_matrix(rng, 1, 3);
        if (obsv_index(c, a) == 3) {
            Matrix h = place_admissible(Matrix::Identity(3, 3), a, c, {-1.0, -2.0, -3.0});
            ComplexVector expect = {{-1.0, 0.0}, {-2.0, 0.0}, {-3.0, 0.0}};
            CHECK(ts::spectra_match(pencil_finite_eigenvalues(Matrix::Identity(3, 3), a - h * c),
                                    expect, 1e-4));
        }
    }
    SUBCASE("singular E pair becomes admissible with the target finite mode") {
        Matrix e = Matrix::Zero(2, 2);
        e(0, 0) = 1.0;
        Matrix a = Matrix::Zero(2, 2);
        a(0, 0) = -0.5;
        a(1, 1) = 1.0;
        Matrix h = place_admissible(e, a, Matrix::Identity(2, 2), {-2.0});
        CHECK(is_admissible(e, a - h * Matrix::Identity(2, 2)));
        auto spec = pencil_finite_eigenvalues(e, a - h * Matrix::Identity(2, 2));
        REQUIRE(spec.size() == 1);
        CHECK(spec[0].real() == doctest::Approx(-2.0).epsilon(1e-4));
    }
    SUBCASE("scalar purely-fast block just needs an invertible closed loop") {
        Matrix e = Matrix::Zero(1, 1);
        Matrix a = Matrix::Ones(1, 1);
        Matrix c = Matrix::Ones(1, 1);
        Matrix h = place_admissible(e, a, c, {});
        CHECK(std::abs(1.0 - h(0, 0)) > 1e-9);  // 1 - h must stay invertible
        CHECK(is_admissible(e, a - h * c));
    }
}

TEST_CASE("design_sdf on a jointly observable normal system") {
    Vector modes(3);
    modes << 0.5, -2.0, -3.0;
    auto sys = diagonal_three_agent(modes);
    auto graph = ts::three_cycle();
    auto sdf = to_sdf(sys);
    auto agents = analyze_agents_sdf(sys, sdf);

    // no agent alone is R-observable, the union is
    for (int i = 0; i < 3; ++i) CHECK(agents.slow[static_cast<size_t>(i)].v == 1);
    CHECK(check_R_observable(sdf));

    SynthesisOptions opt;
    opt.pole_scale = 2.0;
    auto design = design_sdf(sys, sdf, agents, graph, opt);
    CHECK(design.gamma > 0.0);
    CHECK(design.mu > 0.0);
    CHECK(design.sigma_bar_yu > 0.0);  // unobservable remainders exist per agent

    auto report = verify_design(sys, graph, design);
    CHECK(report.admissible);

    SUBCASE("gain padding pattern in decomposed coordinates") {
        for (int i = 0; i < 3; ++i) {
            Matrix hsplit = design.sdf.q * design.h[static_cast<size_t>(i)];
            const auto& slow = agents.slow[static_cast<size_t>(i)];
            Matrix in_t = slow.t.transpose() * hsplit.topRows(sdf.n1());
            CHECK(in_t.bottomRows(sdf.n1() - slow.v).norm() < 1e-9);
        }
    }

    SUBCASE("raising gamma never breaks admissibility") {
        auto scaled = design;
        for (double f : {2.0, 10.0}) {
            scaled.gamma = f * design.gamma;
            CHECK(verify_design(sys, graph, scaled).admissible);
        }
    }

    SUBCASE("zero coupling is not admissible for jointly-only observability") {
        auto crippled = design;
        crippled.gamma = 0.0;
        CHECK_FALSE(verify_design(sys, graph, crippled).admissible);
    }
}

TEST_CASE("design_sdf enforces the fast observability index condition") {
    std::mt19937 rng(23);
    // plant with a genuine nilpotent block (index 2) that no scalar output
    // can fully observe: v_{i2} < n2 and N2 != 0
    auto inst = ts::random_regular_system(rng, 2, 2, 0, /*impulse_free=*/false);
    while (is_nilpotent(inst.nil, 1e-9).index < 2) {
        inst = ts::random_regular_system(rng, 2, 2, 0, false);
    }
    Matrix c = ts::random_matrix(rng, 1, 4);
    DescriptorSystem sys(inst.e, inst.a, c, {1});
    CommGraph solo(Matrix::Zero(1, 1));
    auto sdf = to_sdf(sys);
    auto agents = analyze_agents_sdf(sys, sdf);
    if (agents.fast[0].v < sdf.n2_dim()) {
        CHECK_THROWS_WITH_AS(design_sdf(sys, sdf, agents, solo, {}),
                             doctest::Contains("v_{i2}=n_2"), TheoremPreconditionError);
    }
}

TEST_CASE("design_ddf on a jointly observable normal system") {
    Vector modes(3);
    modes << -0.5, -1.5, -2.5;
    auto sys = diagonal_three_agent(modes);
    auto graph = ts::three_cycle();
    auto ddf = to_ddf(sys);
    auto agents = analyze_agents_ddf(sys, ddf);

    SynthesisOptions opt;
    opt.pole_scale = 2.0;
    auto design = design_ddf(sys, ddf, agents, graph, opt);
    CHECK(design.gamma >= opt.gamma_floor);
    CHECK(design.lambda1 == doctest::Approx(0.0));  // no fast block at all
    auto report = verify_design(sys, graph, design);
    CHECK(report.admissible);

    SUBCASE("weights are SPD with healthy Lyapunov residuals") {
        for (int i = 0; i < 3; ++i) {
            const auto& blk = design.blocks[static_cast<size_t>(i)];
            const auto& slow = agents.slow[static_cast<size_t>(i)];
            if (blk.v1 == 0) continue;
            Matrix acl = slow.a_o - blk.h1o * slow.c_o;
            Matrix resid = blk.w_tilde_t1 * acl + acl.transpose() * blk.w_tilde_t1 +
                           2.0 * design.gamma * Matrix::Identity(blk.v1, blk.v1);
            CHECK(resid.norm() <= 1e-8 * std::max(1.0, blk.w_tilde_t1.norm()) *
                                      std::max(1.0, spectral_norm(acl)));
            Eigen::SelfAdjointEigenSolver<Matrix> es(blk.w_tilde_t1);
            CHECK(es.eigenvalues().minCoeff() > 0.0);
        }
    }
}

TEST_CASE("design_ddf on a singular-E plant with an algebraic block") {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 5; ++trial) {
        // index-1 plant: E = Q diag(I2, 0) P with invertible A22
        Index l = 2, nf = 1, n = 3;
        Matrix q = ts::random_invertible(rng, n);
        Matrix p = ts::random_invertible(rng, n);
        Matrix e_blk = Matrix::Zero(n, n);
        e_blk.topLeftCorner(l, l).setIdentity();
        Matrix a_blk = ts::random_matrix(rng, n, n);
        a_blk(2, 2) += 3.0;  // keep A22 invertible
        Matrix e = q * e_blk * p;
        Matrix a = q * a_blk * p;
        Matrix c = ts::random_matrix(rng, 3, n);
        DescriptorSystem sys(e, a, c, {1, 1, 1});
        auto graph = ts::three_cycle();
        auto ddf = to_ddf(sys);
        if (obsv_index(ddf.c1, ddf.a11) != l || obsv_index(ddf.c2, ddf.a22) != nf) continue;
        auto agents = analyze_agents_ddf(sys, ddf);
        SynthesisOptions opt;
        opt.seed = 100 + static_cast<unsigned>(trial);
        auto design = design_ddf(sys, ddf, agents, graph, opt);
        auto report = verify_design(sys, graph, design);
        CHECK(report.admissible);
    }
}
