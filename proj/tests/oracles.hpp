#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the projector, compatibility or bracket code of the library.

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "affgebroid/catalog.hpp"
#include "affgebroid/hamiltonian.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h = 1e-6) {
    VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        VectorXd a = x, b = x;
        a[i] += h;
        b[i] -= h;
        g[i] = (f(a) - f(b)) / (2 * h);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Rolling ball on a rotating table, fiber order (xdot, ydot, wx, wy, wz).

struct Ball {
    double m = 1.0, r = 1.0, k2 = 0.4;
    std::function<double(double)> Omega = [](double t) { return 1.0 + 0.5 * std::sin(t); };
    std::function<double(double)> dOmega = [](double t) { return 0.5 * std::cos(t); };
};

/// Random state with xdot, ydot chosen so that both constraints hold.
inline affgebroid::PhasePoint ball_state(const Ball& b, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorXd x(3), y(5);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const double W = b.Omega(x[0]);
    y[0] = b.r * y[3] - W * x[2];
    y[1] = -b.r * y[2] + W * x[1];
    return {x, y};
}

/// Equations of motion of the ball in closed form: (xddot, yddot, wx', wy', wz').
inline VectorXd ball_accelerations(const Ball& b, const affgebroid::PhasePoint& p) {
    const double t = p.x[0], x = p.x[1], y = p.x[2];
    const double xd = p.y[0], yd = p.y[1];
    const double W = b.Omega(t), dW = b.dOmega(t);
    const double den = b.k2 + b.m * b.r * b.r;
    VectorXd a(5);
    a[0] = -b.k2 / den * (dW * y + W * yd);
    a[1] = b.k2 / den * (dW * x + W * xd);
    a[2] = b.m * b.r / den * (dW * x + W * xd);
    a[3] = b.m * b.r / den * (dW * y + W * yd);
    a[4] = 0.0;
    return a;
}

/// Momentum-side data of the ball, coordinates (t, x, y; px, py, ux, uy, uz).
struct BallMomentum {
    VectorXd psi;    // 2
    MatrixXd psi_x;  // 2 x 3
    MatrixXd psi_p;  // 2 x 5
};

inline BallMomentum ball_psi(const Ball& b, const affgebroid::MomentumPoint& q) {
    const double t = q.x[0], x = q.x[1], y = q.x[2];
    const double W = b.Omega(t), dW = b.dOmega(t);
    BallMomentum o;
    o.psi.resize(2);
    o.psi[0] = W * y + q.p[0] / b.m - b.r / b.k2 * q.p[3];
    o.psi[1] = -W * x + q.p[1] / b.m + b.r / b.k2 * q.p[2];
    o.psi_x.setZero(2, 3);
    o.psi_x(0, 0) = dW * y;
    o.psi_x(0, 2) = W;
    o.psi_x(1, 0) = -dW * x;
    o.psi_x(1, 1) = -W;
    o.psi_p.setZero(2, 5);
    o.psi_p(0, 0) = 1.0 / b.m;
    o.psi_p(0, 3) = -b.r / b.k2;
    o.psi_p(1, 1) = 1.0 / b.m;
    o.psi_p(1, 2) = b.r / b.k2;
    return o;
}

inline VectorXd ball_Hp(const Ball& b, const VectorXd& p) {
    VectorXd h(5);
    h << p[0] / b.m, p[1] / b.m, p[2] / b.k2, p[3] / b.k2, p[4] / b.k2;
    return h;
}

/// Derivatives of an extension H' in the ball's momentum coordinates:
/// d/dt, d/dx, d/dy, then d/dpx .. d/duz.
struct Ext {
    double t, x, y;
    VectorXd p;  // 5
};

inline Ext ext_of(const affgebroid::MomentumFunctionEval& e) { return {e.fx[0], e.fx[1], e.fx[2], e.fp}; }

/// Closed-form ball bracket term by term: the terms
/// linear in the extensions and the two mixed terms, without the term that
/// is quadratic in the compatibility inverse.
inline double ball_display_bracket(const Ball& b, const affgebroid::MomentumPoint& q, const Ext& h1, const Ext& h2) {
    const double t = q.x[0], x = q.x[1], y = q.x[2];
    const double ux = q.p[2], uy = q.p[3], uz = q.p[4];
    const double W = b.Omega(t), dW = b.dOmega(t);
    const double c = b.k2 * b.m / (b.k2 + b.r * b.r * b.m);
    const double rk = b.r / b.k2;
    const VectorXd Hp = ball_Hp(b, q.p);
    const VectorXd d1 = h1.p - Hp, d2 = h2.p - Hp;
    // p components: 0 px, 1 py, 2 ux, 3 uy, 4 uz
    double v = (h1.t - h2.t) + (h1.x * h2.p[0] - h1.p[0] * h2.x) + (h1.y * h2.p[1] - h1.p[1] * h2.y);
    v += -ux * (h1.p[4] * h2.p[3] - h1.p[3] * h2.p[4]) - uy * (h1.p[2] * h2.p[4] - h1.p[4] * h2.p[2]) -
         uz * (h1.p[3] * h2.p[2] - h1.p[2] * h2.p[3]);
    auto A1 = [&](const Ext& h) { return dW * y - h.x / b.m + W * h.p[1] + rk * (uz * h.p[2] - ux * h.p[4]); };
    auto A2 = [&](const Ext& h) { return -dW * x - W * h.p[0] - h.y / b.m - rk * (uy * h.p[4] - uz * h.p[3]); };
    v += -c * A1(h2) * (d1[0] - b.r * d1[3]);
    v += -c * A2(h2) * (d1[1] + b.r * d1[2]);
    v += c * A1(h1) * (d2[0] - b.r * d2[3]);
    v += c * A2(h1) * (d2[1] + b.r * d2[2]);
    return v;
}

/// Term quadratic in the inverse compatibility matrix, built from the ball's
/// constraint functions and the canonical bracket of the Atiyah sector.
inline double ball_quadratic_term(const Ball& b, const affgebroid::MomentumPoint& q, const Ext& h1, const Ext& h2) {
    BallMomentum o = ball_psi(b, q);
    const VectorXd Hp = ball_Hp(b, q.p);
    VectorXd Hinv(5);
    Hinv << b.m, b.m, b.k2, b.k2, b.k2;
    const VectorXd mu1 = o.psi_p * Hinv.cwiseProduct(h1.p - Hp);
    const VectorXd mu2 = o.psi_p * Hinv.cwiseProduct(h2.p - Hp);
    // {psi^1, psi^2} on V*: x,y sector is canonical, the angular sector is
    // the Lie-Poisson bracket u . (a x b), the sign used by the display.
    auto br = [&](int i, int j) {
        const double tr = o.psi_x(i, 1) * o.psi_p(j, 0) - o.psi_p(i, 0) * o.psi_x(j, 1) +
                          o.psi_x(i, 2) * o.psi_p(j, 1) - o.psi_p(i, 1) * o.psi_x(j, 2);
        Eigen::Vector3d a = o.psi_p.row(i).segment(2, 3).transpose();
        Eigen::Vector3d c = o.psi_p.row(j).segment(2, 3).transpose();
        Eigen::Vector3d u = q.p.segment(2, 3);
        return tr + u.dot(a.cross(c));
    };
    MatrixXd B(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) B(i, j) = br(i, j);
    const double ci = -b.k2 * b.m / (b.k2 + b.r * b.r * b.m);
    return ci * ci * mu1.dot(B * mu2);
}

// ---------------------------------------------------------------------------
// Time-dependent systems on the jet bundle: base (t, q), momenta p.

struct JetPsi {
    VectorXd psi;    // r
    MatrixXd psi_t;  // r x 1
    MatrixXd psi_q;  // r x k
    MatrixXd psi_p;  // r x k
};

/// The jet bundle bracket display, including the doubly contracted term.
/// `Hinv` is the inverse of the fiber Hessian of H; `hk` are (t, q, p)
/// derivatives of the two extensions and of H.
inline double jet_display_bracket(const JetPsi& s, const MatrixXd& Hinv, const VectorXd& H1t, const VectorXd& H1q,
                                  const VectorXd& H1p, const VectorXd& H2t, const VectorXd& H2q,
                                  const VectorXd& H2p, const VectorXd& Hp) {
    const MatrixXd Cbar = -s.psi_p * Hinv * s.psi_p.transpose();
    const MatrixXd Ci = Cbar.inverse();
    const Eigen::Index r = s.psi.size();
    double v = H1t[0] - H2t[0] + H1q.dot(H2p) - H1p.dot(H2q);
    const VectorXd mu1 = s.psi_p * Hinv * (H1p - Hp);
    const VectorXd mu2 = s.psi_p * Hinv * (H2p - Hp);
    for (Eigen::Index a = 0; a < r; ++a)
        for (Eigen::Index b = 0; b < r; ++b)
            for (Eigen::Index c = 0; c < r; ++c)
                for (Eigen::Index d = 0; d < r; ++d) {
                    const double br = s.psi_q.row(b).dot(s.psi_p.row(d)) - s.psi_p.row(b).dot(s.psi_q.row(d));
                    v += Ci(a, b) * Ci(c, d) * br * mu2[c] * mu1[a];
                }
    for (Eigen::Index a = 0; a < r; ++a)
        for (Eigen::Index b = 0; b < r; ++b) {
            const double lie2 = s.psi_t(b, 0) + s.psi_q.row(b).dot(H2p) - s.psi_p.row(b).dot(H2q);
            const double lie1 = s.psi_t(a, 0) + s.psi_q.row(a).dot(H1p) - s.psi_p.row(a).dot(H1q);
            v += Ci(a, b) * lie2 * mu1[a];
            v -= Ci(a, b) * lie1 * mu2[b];
        }
    return v;
}

// ---------------------------------------------------------------------------

/// Lagrange-d'Alembert equations solved as one saddle-point system
/// [W mu^T; mu 0] [xi; lambda] = [f; g] with exact derivatives of L and the
/// constraints. Returns (xi, lambda).
inline std::pair<VectorXd, VectorXd> kkt(const affgebroid::ConstrainedSystem& sys, const affgebroid::PhasePoint& p) {
    using namespace affgebroid;
    const AffgebroidModel& model = sys.model();
    const Eigen::Index m = p.x.size(), n = p.y.size();
    const Eigen::Index r = static_cast<Eigen::Index>(sys.constraints().r());
    Eigen::VectorXd z(m + n);
    z << p.x, p.y;
    const ScalarField& Lf = sys.lagrangian().field();
    const VectorXd g = Lf.gradient(z);
    const MatrixXd h = Lf.hessian(z);
    const VectorXd Lx = g.head(m), Ly = g.tail(n);
    const MatrixXd W = h.bottomRightCorner(n, n), Lxy = h.topRightCorner(m, n);

    VectorXd rho0(m);
    MatrixXd rho(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        rho0[i] = model.rho0_field(i).value(p.x);
        for (Eigen::Index a = 0; a < n; ++a) rho(i, a) = model.rho_field(i, a).value(p.x);
    }
    auto C = [&](Eigen::Index gg, Eigen::Index a, Eigen::Index b) {
        if (a == b) return 0.0;
        return a < b ? model.c_field(gg, a, b).value(p.x) : -model.c_field(gg, b, a).value(p.x);
    };
    const VectorXd xdot = rho0 + rho * p.y;
    // free force: rho^T Lx - Lxy^T xdot + (C^g_{0a} + C^g_{ba} y^b) Ly_g
    VectorXd f = rho.transpose() * Lx - Lxy.transpose() * xdot;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index gg = 0; gg < n; ++gg) {
            double cy = model.c0_field(gg, a).value(p.x);
            for (Eigen::Index b = 0; b < n; ++b) cy += C(gg, b, a) * p.y[b];
            f[a] += cy * Ly[gg];
        }
    MatrixXd mu(r, n);
    VectorXd gcon(r);
    for (Eigen::Index a = 0; a < r; ++a) {
        VectorXd dpsi = sys.constraints().mu0_field(a).gradient(p.x);
        for (Eigen::Index b = 0; b < n; ++b) {
            mu(a, b) = sys.constraints().mu_field(a, b).value(p.x);
            dpsi += p.y[b] * sys.constraints().mu_field(a, b).gradient(p.x);
        }
        gcon[a] = -dpsi.dot(xdot);
    }
    MatrixXd K = MatrixXd::Zero(n + r, n + r);
    K.topLeftCorner(n, n) = W;
    K.topRightCorner(n, r) = mu.transpose();
    K.bottomLeftCorner(r, n) = mu;
    VectorXd rhs(n + r);
    rhs << f, gcon;
    VectorXd sol = K.fullPivLu().solve(rhs);
    return {sol.head(n), sol.tail(r)};
}

/// Sum over cyclic (a, b, c) of C^d_{ab} C^e_{dc} for constant structure
/// functions with zero anchor, as a max-abs residual.
inline double jacobiator(const std::vector<MatrixXd>& c) {
    const Eigen::Index n = static_cast<Eigen::Index>(c.size());
    double worst = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            for (Eigen::Index cc = 0; cc < n; ++cc)
                for (Eigen::Index e = 0; e < n; ++e) {
                    double s = 0.0;
                    for (Eigen::Index d = 0; d < n; ++d)
                        s += c[d](a, b) * c[e](d, cc) + c[d](b, cc) * c[e](d, a) + c[d](cc, a) * c[e](d, b);
                    worst = std::max(worst, std::abs(s));
                }
    return worst;
}

}  // namespace oracle
