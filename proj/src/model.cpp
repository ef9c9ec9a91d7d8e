#include "affgebroid/model.hpp"

#include <algorithm>
#include <cmath>

namespace affgebroid {

AffgebroidModel::AffgebroidModel(std::vector<std::string> base_names, std::vector<std::string> fiber_names)
    : base_names_(std::move(base_names)), fiber_names_(std::move(fiber_names)) {
    if (base_names_.empty()) throw InputError("model needs at least one base coordinate");
    if (fiber_names_.empty()) throw InputError("model needs at least one fiber coordinate (n = 0 is vacuous)");
    const std::size_t mm = m(), nn = n();
    ScalarField zero = ScalarField::constant(mm, 0.0);
    rho0_.assign(mm, zero);
    rho_.assign(mm * nn, zero);
    c0_.assign(nn * nn, zero);
    c_.assign(nn * nn * nn, zero);
}

void AffgebroidModel::check_field(const ScalarField& f) const {
    if (f.arity() != m())
        throw InputError("component field has arity " + std::to_string(f.arity()) + ", expected " +
                         std::to_string(m()));
}

void AffgebroidModel::set_rho0(std::size_t i, ScalarField f) {
    if (i >= m()) throw InputError("rho0 index out of range");
    check_field(f);
    rho0_[i] = std::move(f);
}

void AffgebroidModel::set_rho(std::size_t i, std::size_t a, ScalarField f) {
    if (i >= m() || a >= n()) throw InputError("rho index out of range");
    check_field(f);
    rho_[i * n() + a] = std::move(f);
}

void AffgebroidModel::set_c0(std::size_t g, std::size_t a, ScalarField f) {
    if (g >= n() || a >= n()) throw InputError("c0 index out of range");
    check_field(f);
    c0_[g * n() + a] = std::move(f);
}

void AffgebroidModel::set_c(std::size_t g, std::size_t a, std::size_t b, ScalarField f) {
    if (g >= n() || a >= n() || b >= n()) throw InputError("c index out of range");
    if (a == b) throw InputError("C^g_{aa} vanishes by antisymmetry and cannot be set");
    check_field(f);
    if (a > b) {
        if (const Expr* e = f.expr())
            f = ScalarField::expression(m(), -*e);
        else if (f.is_constant())
            f = ScalarField::constant(m(), -f.value(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m()))));
        else
            f = ScalarField::callback(
                m(), [f](const Eigen::VectorXd& x) { return -f.value(x); },
                [f](const Eigen::VectorXd& x) { return Eigen::VectorXd(-f.gradient(x)); });
        std::swap(a, b);
    }
    c_[(g * n() + a) * n() + b] = std::move(f);
}

bool AffgebroidModel::constant_structure() const {
    auto c = [](const ScalarField& f) { return f.is_constant(); };
    return std::all_of(rho0_.begin(), rho0_.end(), c) && std::all_of(rho_.begin(), rho_.end(), c) &&
           std::all_of(c0_.begin(), c0_.end(), c) && std::all_of(c_.begin(), c_.end(), c);
}

bool AffgebroidModel::trivial_affine_part() const {
    const Eigen::VectorXd probe = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m()));
    auto zero = [&](const ScalarField& f) { return f.is_constant() && f.value(probe) == 0.0; };
    return std::all_of(rho0_.begin(), rho0_.end(), zero) && std::all_of(c0_.begin(), c0_.end(), zero);
}

void AffgebroidModel::check_point(const BasePoint& x) const {
    if (static_cast<std::size_t>(x.size()) != m())
        throw InputError("base point has " + std::to_string(x.size()) + " coordinates, model has m = " +
                         std::to_string(m()));
}

void AffgebroidModel::check_point(const PhasePoint& p) const {
    check_point(p.x);
    if (static_cast<std::size_t>(p.y.size()) != n())
        throw InputError("fiber point has " + std::to_string(p.y.size()) + " coordinates, model has n = " +
                         std::to_string(n()));
}

Anchor eval_anchor(const AffgebroidModel& model, const BasePoint& x) {
    model.check_point(x);
    const auto m = static_cast<Eigen::Index>(model.m());
    const auto n = static_cast<Eigen::Index>(model.n());
    Anchor a{Eigen::VectorXd(m), Eigen::MatrixXd(m, n)};
    for (Eigen::Index i = 0; i < m; ++i) {
        a.rho0[i] = model.rho0_field(i).value(x);
        for (Eigen::Index k = 0; k < n; ++k) a.rho(i, k) = model.rho_field(i, k).value(x);
    }
    return a;
}

Structure eval_structure(const AffgebroidModel& model, const BasePoint& x) {
    model.check_point(x);
    const auto n = static_cast<Eigen::Index>(model.n());
    Structure s{Eigen::MatrixXd(n, n), std::vector<Eigen::MatrixXd>(model.n(), Eigen::MatrixXd::Zero(n, n))};
    for (Eigen::Index g = 0; g < n; ++g) {
        for (Eigen::Index a = 0; a < n; ++a) s.c0(g, a) = model.c0_field(g, a).value(x);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = a + 1; b < n; ++b) {
                double v = model.c_field(g, a, b).value(x);
                s.c[g](a, b) = v;
                s.c[g](b, a) = -v;
            }
    }
    return s;
}

namespace {

// Components over the extended index set {0, 1..n}: index 0 is e_0 and k >= 1
// is e_{k-1}.
struct Extended {
    std::vector<Eigen::VectorXd> rho;           // rho[A] in R^m
    std::vector<Eigen::MatrixXd> drho;          // drho[A](i, j) = d_j rho^i_A
    std::vector<Eigen::MatrixXd> c;             // c[nu](A, B) = C^nu_{AB}
    std::vector<std::vector<Eigen::VectorXd>> dc;  // dc[nu][A*(n+1)+B] = grad C^nu_{AB}
};

Extended extend(const AffgebroidModel& model, const BasePoint& x) {
    const std::size_t m = model.m(), n = model.n(), N = n + 1;
    const auto mi = static_cast<Eigen::Index>(m);
    Extended e;
    e.rho.assign(N, Eigen::VectorXd::Zero(mi));
    e.drho.assign(N, Eigen::MatrixXd::Zero(mi, mi));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t A = 0; A < N; ++A) {
            const ScalarField& f = A == 0 ? model.rho0_field(i) : model.rho_field(i, A - 1);
            e.rho[A][i] = f.value(x);
            if (!f.is_constant()) e.drho[A].row(i) = f.gradient(x).transpose();
        }
    }
    e.c.assign(n, Eigen::MatrixXd::Zero(N, N));
    e.dc.assign(n, std::vector<Eigen::VectorXd>(N * N, Eigen::VectorXd::Zero(mi)));
    auto put = [&](std::size_t nu, std::size_t A, std::size_t B, const ScalarField& f) {
        double v = f.value(x);
        e.c[nu](A, B) = v;
        e.c[nu](B, A) = -v;
        if (!f.is_constant()) {
            Eigen::VectorXd g = f.gradient(x);
            e.dc[nu][A * N + B] = g;
            e.dc[nu][B * N + A] = -g;
        }
    };
    for (std::size_t nu = 0; nu < n; ++nu) {
        for (std::size_t a = 0; a < n; ++a) put(nu, 0, a + 1, model.c0_field(nu, a));
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) put(nu, a + 1, b + 1, model.c_field(nu, a, b));
    }
    return e;
}

}  // namespace

StructureIdentityReport check_structure_identities(const AffgebroidModel& model,
                                                   const std::vector<BasePoint>& points, double tol) {
    if (points.empty()) throw InputError("check_structure_identities needs at least one point");
    const std::size_t n = model.n(), N = n + 1;
    StructureIdentityReport rep;
    rep.tol = tol;
    for (const BasePoint& x : points) {
        model.check_point(x);
        const Extended e = extend(model, x);
        double anchor = 0.0, cyclic = 0.0;

        for (std::size_t A = 0; A < N; ++A)
            for (std::size_t B = A + 1; B < N; ++B) {
                Eigen::VectorXd r = e.drho[B] * e.rho[A] - e.drho[A] * e.rho[B];
                for (std::size_t g = 0; g < n; ++g) r -= e.c[g](A, B) * e.rho[g + 1];
                anchor = std::max(anchor, r.lpNorm<Eigen::Infinity>());
            }

        auto term = [&](std::size_t nu, std::size_t A, std::size_t B, std::size_t G) {
            double t = e.rho[A].dot(e.dc[nu][B * N + G]);
            for (std::size_t mu = 0; mu < n; ++mu) t += e.c[mu](B, G) * e.c[nu](A, mu + 1);
            return t;
        };
        for (std::size_t nu = 0; nu < n; ++nu)
            for (std::size_t A = 0; A < N; ++A)
                for (std::size_t B = A + 1; B < N; ++B)
                    for (std::size_t G = B + 1; G < N; ++G) {
                        double s = term(nu, A, B, G) + term(nu, B, G, A) + term(nu, G, A, B);
                        cyclic = std::max(cyclic, std::abs(s));
                    }

        if (!std::isfinite(anchor) || !std::isfinite(cyclic))
            throw EvaluationError("structure identity residual is not finite");
        rep.anchor_residual = std::max(rep.anchor_residual, anchor);
        rep.cyclic_residual = std::max(rep.cyclic_residual, cyclic);
        rep.per_point.push_back(std::max(anchor, cyclic));
    }
    rep.max_residual = std::max(rep.anchor_residual, rep.cyclic_residual);
    rep.pass = rep.max_residual <= tol;
    return rep;
}

std::vector<Eigen::VectorXd> admissibility_residual(const AffgebroidModel& model,
                                                    const std::vector<std::pair<double, PhasePoint>>& samples,
                                                    const std::vector<Eigen::VectorXd>& xdot) {
    if (samples.size() != xdot.size()) throw InputError("samples and xdot differ in length");
    std::vector<Eigen::VectorXd> out;
    out.reserve(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const PhasePoint& p = samples[k].second;
        model.check_point(p);
        if (xdot[k].size() != p.x.size()) throw InputError("xdot sample has wrong length");
        Anchor a = eval_anchor(model, p.x);
        out.push_back(xdot[k] - a.rho0 - a.rho * p.y);
    }
    return out;
}

}  // namespace affgebroid
