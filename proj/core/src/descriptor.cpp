#include "descobs/descriptor.hpp"

#include <Eigen/LU>

#include <cmath>
#include <random>

namespace descobs {

DescriptorSystem::DescriptorSystem(Matrix e_, Matrix a_, Matrix c_, std::vector<Index> partition_)
    : e(std::move(e_)), a(std::move(a_)), c(std::move(c_)), partition(std::move(partition_)) {
    if (e.rows() != e.cols() || a.rows() != a.cols() || e.rows() != a.rows()) {
        throw InvalidInputError("DescriptorSystem: E and A must be square and equally sized");
    }
    if (c.cols() != e.rows()) {
        throw InvalidInputError("DescriptorSystem: C must have n columns");
    }
    require_finite(e, "DescriptorSystem.E");
    require_finite(a, "DescriptorSystem.A");
    require_finite(c, "DescriptorSystem.C");
    Index total = 0;
    for (Index pi : partition) {
        if (pi < 0) throw InvalidInputError("DescriptorSystem: negative partition entry");
        total += pi;
    }
    if (total != c.rows()) {
        throw InvalidInputError("DescriptorSystem: output partition must sum to p");
    }
}

Index DescriptorSystem::agent_offset(int i) const {
    Index off = 0;
    for (int k = 0; k < i; ++k) off += partition[static_cast<size_t>(k)];
    return off;
}

Matrix DescriptorSystem::agent_c(int i) const {
    return c.middleRows(agent_offset(i), partition[static_cast<size_t>(i)]);
}

namespace {

// Deterministic shift candidates for regularity probing; random fallbacks are
// appended until at least n+6 distinct values are available.
std::vector<double> shift_candidates(Index n, unsigned seed) {
    std::vector<double> cs = {0.0, 1.0, -1.0, 2.0, -2.0, 10.0, -10.0, 100.0, -100.0};
    std::mt19937 rng(seed ^ 0x9e3779b9u);
    std::uniform_real_distribution<double> dist(-1000.0, 1000.0);
    const size_t want = std::max<size_t>(static_cast<size_t>(n) + 6, 29);
    while (cs.size() < want) {
        double c = dist(rng);
        bool dup = false;
        for (double v : cs) {
            if (std::abs(v - c) < 1e-9) {
                dup = true;
                break;
            }
        }
        if (!dup) cs.push_back(c);
    }
    return cs;
}

double shift_sigma_ratio(const Matrix& e, const Matrix& a, double c) {
    Matrix m = c * e - a;
    Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
    if (s.size() == 0) return 1.0;
    if (s(0) == 0.0) return 0.0;
    return s(s.size() - 1) / s(0);
}

}  // namespace

RegularityCheck check_regular(const Matrix& e, const Matrix& a, double tol, unsigned seed) {
    require_finite(e, "check_regular");
    require_finite(a, "check_regular");
    if (e.rows() != e.cols() || a.rows() != a.cols() || e.rows() != a.rows()) {
        throw InvalidInputError("check_regular: E and A must be square and equally sized");
    }
    const Index n = e.rows();
    RegularityCheck out;
    if (n == 0) {
        out.regular = true;
        out.witness_c = 0.0;
        out.sigma_ratio = 1.0;
        return out;
    }
    Index failures = 0;
    for (double c : shift_candidates(n, seed)) {
        const double ratio = shift_sigma_ratio(e, a, c);
        if (ratio > tol) {
            out.regular = true;
            out.witness_c = c;
            out.sigma_ratio = ratio;
            return out;
        }
        ++failures;
        if (failures > n) break;  // n+1 distinct near-roots of a degree-<=n polynomial
    }
    out.regular = false;
    return out;
}

SdfForm to_sdf(const DescriptorSystem& sys, double tol) {
    const Index n = sys.n();
    auto build = [&](double c) {
        Matrix shifted = c * sys.e - sys.a;
        Eigen::PartialPivLU<Matrix> lu(shifted);
        Matrix ehat = lu.solve(sys.e);
        SpectralSplit split = split_zero_cluster(ehat, tol);
        const Index n1 = split.block_invertible.rows();
        const Index n2 = n - n1;

        // Q* = diag(E1^-1, (c E2 - I)^-1) U (cE - A)^-1 with U = transform^-1.
        Matrix left = Matrix::Zero(n, n);
        if (n1 > 0) left.topLeftCorner(n1, n1) = split.block_invertible.inverse();
        if (n2 > 0) {
            Matrix fast = c * split.block_nilpotent - Matrix::Identity(n2, n2);
            left.bottomRightCorner(n2, n2) = fast.inverse();
        }
        Matrix u = split.transform.inverse();
        SdfForm sdf;
        sdf.q = left * u * lu.inverse();
        sdf.p = split.transform;

        Matrix qep = sdf.q * sys.e * sdf.p;
        Matrix qap = sdf.q * sys.a * sdf.p;
        sdf.n2 = qep.bottomRightCorner(n2, n2);
        sdf.a1 = qap.topLeftCorner(n1, n1);
        Matrix cp = sys.c * sdf.p;
        sdf.c1 = cp.leftCols(n1);
        sdf.c2 = cp.rightCols(n2);

        // Round-trip residuals against the exact block pattern.
        Matrix e_pattern = Matrix::Zero(n, n);
        e_pattern.topLeftCorner(n1, n1) = Matrix::Identity(n1, n1);
        e_pattern.bottomRightCorner(n2, n2) = sdf.n2;
        Matrix a_pattern = Matrix::Zero(n, n);
        a_pattern.topLeftCorner(n1, n1) = sdf.a1;
        a_pattern.bottomRightCorner(n2, n2) = Matrix::Identity(n2, n2);
        const double scale_e = std::max(1.0, spectral_norm(sys.e));
        const double scale_a = std::max(1.0, spectral_norm(sys.a));
        const double resid =
            (qep - e_pattern).norm() / scale_e + (qap - a_pattern).norm() / scale_a;
        return std::pair<SdfForm, double>(std::move(sdf), resid);
    };

    Index tried = 0;
    bool any_regular = false;
    SdfForm best;
    double best_cond = std::numeric_limits<double>::infinity();
    bool have_best = false;
    for (double c : shift_candidates(n, 0)) {
        if (shift_sigma_ratio(sys.e, sys.a, c) <= tol) {
            if (++tried > n) break;
            continue;
        }
        any_regular = true;
        auto [sdf, resid] = build(c);
        if (resid > 1e-8) continue;
        const double cond = condition_number(sdf.q);
        if (cond <= 1e8) return sdf;
        if (cond < best_cond) {
            best_cond = cond;
            best = sdf;
            have_best = true;
        }
    }
    if (!any_regular) {
        throw NotRegularError("to_sdf: the pencil (E, A) is not regular");
    }
    if (have_best) return best;  // every candidate exceeded the conditioning gate
    throw NumericalError("to_sdf: no shift produced an accurate decomposition");
}

namespace {

Matrix agent_rows(const DescriptorSystem& sys, const Matrix& full, int i) {
    return full.middleRows(sys.agent_offset(i), sys.partition[static_cast<size_t>(i)]);
}

}  // namespace

Matrix SdfForm::agent_c1(const DescriptorSystem& sys, int i) const { return agent_rows(sys, c1, i); }
Matrix SdfForm::agent_c2(const DescriptorSystem& sys, int i) const { return agent_rows(sys, c2, i); }
Matrix DdfForm::agent_c1(const DescriptorSystem& sys, int i) const { return agent_rows(sys, c1, i); }
Matrix DdfForm::agent_c2(const DescriptorSystem& sys, int i) const { return agent_rows(sys, c2, i); }

DdfForm to_ddf_pair(const Matrix& e, const Matrix& a, const Matrix& c, double tol) {
    const Index n = e.rows();
    auto f = ranked_svd(e, tol);
    const Index l = f.numerical_rank;

    Matrix scaling = Matrix::Identity(n, n);
    for (Index i = 0; i < l; ++i) scaling(i, i) = 1.0 / f.singular_values(i);
    DdfForm ddf;
    ddf.l = l;
    ddf.q = scaling * f.left.transpose();
    ddf.p = f.right;

    Matrix qap = ddf.q * a * ddf.p;
    ddf.a11 = qap.topLeftCorner(l, l);
    ddf.a12 = qap.topRightCorner(l, n - l);
    ddf.a21 = qap.bottomLeftCorner(n - l, l);
    ddf.a22 = qap.bottomRightCorner(n - l, n - l);
    Matrix cp = c * ddf.p;
    ddf.c1 = cp.leftCols(l);
    ddf.c2 = cp.rightCols(n - l);

    Matrix qep = ddf.q * e * ddf.p;
    Matrix pattern = Matrix::Zero(n, n);
    pattern.topLeftCorner(l, l) = Matrix::Identity(l, l);
    if ((qep - pattern).norm() > 1e-8 * std::max(1.0, spectral_norm(e))) {
        throw NumericalError("to_ddf: Q E P deviates from diag(I_l, 0)");
    }
    return ddf;
}

DdfForm to_ddf(const DescriptorSystem& sys, double tol) {
    return to_ddf_pair(sys.e, sys.a, sys.c, tol);
}

bool is_impulse_free_pair(const Matrix& e, const Matrix& a, double tol) {
    auto reg = check_regular(e, a, tol);
    if (!reg.regular) {
        throw NotRegularError("is_impulse_free: the pencil (E, A) is not regular");
    }
    DescriptorSystem sys(e, a, Matrix::Zero(0, e.rows()), {});

    SdfForm sdf = to_sdf(sys, tol);
    const bool via_sdf =
        sdf.n2_dim() == 0 || spectral_norm(sdf.n2) <= 1e-6 * std::max(1.0, spectral_norm(e));

    DdfForm ddf = to_ddf(sys, tol);
    const double a_scale = spectral_norm(ddf.q * a * ddf.p);
    const bool via_ddf = invertible_at_scale(ddf.a22, a_scale, tol);

    if (via_sdf != via_ddf) {
        throw NumericalError("is_impulse_free: SDF and DDF routes disagree");
    }
    return via_sdf;
}

bool is_impulse_free(const DescriptorSystem& sys, double tol) {
    return is_impulse_free_pair(sys.e, sys.a, tol);
}

bool is_admissible(const Matrix& e, const Matrix& a, double tol) {
    if (!is_impulse_free_pair(e, a, tol)) return false;
    for (const auto& lambda : pencil_finite_eigenvalues(e, a, tol)) {
        if (lambda.real() >= -tol) return false;
    }
    return true;
}

bool admissible_certificate(const Matrix& e, const Matrix& a, double tol) {
    const Index n = e.rows();
    try {
        Matrix x = solve_lyapunov_descriptor(e, a, Matrix::Identity(n, n), tol);
        Eigen::SelfAdjointEigenSolver<Matrix> es(x);
        return es.eigenvalues().minCoeff() > 0.0;
    } catch (const PreconditionError&) {
        return false;
    } catch (const NumericalError&) {
        return false;
    }
}

ReducedOde reduce_to_ode(const DdfForm& ddf, double tol) {
    const Index nl = ddf.a22.rows();
    ReducedOde out;
    if (nl == 0) {
        out.slow = ddf.a11;
        out.algebraic_map = Matrix(0, ddf.l);
        return out;
    }
    const double a_scale = std::max({spectral_norm(ddf.a11), spectral_norm(ddf.a12),
                                     spectral_norm(ddf.a21), spectral_norm(ddf.a22)});
    if (!invertible_at_scale(ddf.a22, a_scale, tol)) {
        throw ImpulsivePlantError(
            "reduce_to_ode: A22 is singular; the plant is impulsive in these coordinates");
    }
    Eigen::PartialPivLU<Matrix> lu(ddf.a22);
    out.algebraic_map = -lu.solve(ddf.a21);
    out.slow = ddf.a11 + ddf.a12 * out.algebraic_map;
    return out;
}

}  // namespace descobs
