#include "feederopt/conic_solver.hpp"

#include "feederopt/common.hpp"
#include "feederopt/cone_math.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace feederopt {

const char* solve_status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::PrimalInfeasible: return "primal infeasible";
        case SolveStatus::DualInfeasible: return "dual infeasible";
        case SolveStatus::IterLimit: return "iteration limit";
        case SolveStatus::NumericalTrouble: return "numerical trouble";
    }
    return "?";
}

namespace {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

constexpr double kInfty = std::numeric_limits<double>::infinity();

// min c'x s.t. Ax = b, Gx + s = h, s in the cone.
struct StdForm {
    int n = 0;
    SpMat A, G;
    VectorXd c, b, h;
    ConeLayout cone;
};

StdForm lower(const ConicProgram& prog) {
    prog.check();
    StdForm f;
    f.n = prog.size();
    f.c = Eigen::Map<const VectorXd>(prog.objective.data(), f.n);

    std::vector<Trip> ta;
    std::vector<double> bv;
    int ar = 0;
    for (const LinearRow& r : prog.eq_rows) {
        for (auto [j, cj] : r.terms)
            ta.emplace_back(ar, j, cj);
        bv.push_back(r.rhs);
        ++ar;
    }
    // A variable pinned by coincident bounds becomes an equality row; the
    // cone then never sees it.
    for (int i = 0; i < f.n; ++i)
        if (prog.lb[i] == prog.ub[i]) {
            if (!std::isfinite(prog.lb[i]))
                throw InputError("variable " + prog.vars[i].name() + " pinned at infinity");
            ta.emplace_back(ar, i, 1.0);
            bv.push_back(prog.lb[i]);
            ++ar;
        }
    f.A.resize(ar, f.n);
    f.A.setFromTriplets(ta.begin(), ta.end());
    f.b.resize(ar);
    for (int i = 0; i < ar; ++i)
        f.b[i] = bv[i];

    std::vector<Trip> tg;
    std::vector<double> hv;
    int gr = 0;
    for (int i = 0; i < f.n; ++i) {
        if (prog.lb[i] == prog.ub[i])
            continue;
        if (std::isfinite(prog.lb[i])) {
            tg.emplace_back(gr, i, -1.0);
            hv.push_back(-prog.lb[i]);
            ++gr;
        }
        if (std::isfinite(prog.ub[i])) {
            tg.emplace_back(gr, i, 1.0);
            hv.push_back(prog.ub[i]);
            ++gr;
        }
    }
    for (const LinearRow& r : prog.ineq_rows) {
        for (auto [j, cj] : r.terms)
            tg.emplace_back(gr, j, cj);
        hv.push_back(r.rhs);
        ++gr;
    }
    f.cone.l = gr;
    if (gr == 0 && prog.soc_cones.empty() && prog.soc_thermal.empty()) {
        // The embedding needs a nonempty cone; add one vacuous slack.
        hv.push_back(1.0);
        ++gr;
        f.cone.l = 1;
    }
    for (const SocCone4& k : prog.soc_cones) {
        tg.emplace_back(gr, k.cii, -1.0);
        tg.emplace_back(gr, k.cjj, -1.0);
        hv.push_back(0.0);
        ++gr;
        tg.emplace_back(gr, k.cij, -2.0);
        hv.push_back(0.0);
        ++gr;
        tg.emplace_back(gr, k.sij, -2.0);
        hv.push_back(0.0);
        ++gr;
        tg.emplace_back(gr, k.cii, -1.0);
        tg.emplace_back(gr, k.cjj, 1.0);
        hv.push_back(0.0);
        ++gr;
        f.cone.q.push_back(4);
    }
    for (const SocCone3& k : prog.soc_thermal) {
        hv.push_back(k.s_max);
        ++gr;
        tg.emplace_back(gr, k.p, -1.0);
        hv.push_back(0.0);
        ++gr;
        tg.emplace_back(gr, k.q, -1.0);
        hv.push_back(0.0);
        ++gr;
        f.cone.q.push_back(3);
    }
    f.G.resize(gr, f.n);
    f.G.setFromTriplets(tg.begin(), tg.end());
    f.h = Eigen::Map<const VectorXd>(hv.data(), gr);
    return f;
}

// Quasi-definite KKT system [0 A' G'; A 0 0; G 0 -W'W], factored once per
// scaling with static +/-delta regularization and solved with iterative
// refinement against the unregularized matrix.
class KktSolver {
public:
    KktSolver(const StdForm& f) : f_(f), n_(f.n), p_(f.A.rows()), m_(f.G.rows()) {
        base_.reserve(16 + f.A.nonZeros() * 2 + f.G.nonZeros() * 2 + size_t(n_ + p_ + m_));
        for (int i = 0; i < n_ + p_ + m_; ++i)
            base_.emplace_back(i, i, 0.0);
        for (int k = 0; k < f.A.outerSize(); ++k)
            for (SpMat::InnerIterator it(f.A, k); it; ++it) {
                base_.emplace_back(n_ + it.row(), it.col(), it.value());
                base_.emplace_back(it.col(), n_ + it.row(), it.value());
            }
        for (int k = 0; k < f.G.outerSize(); ++k)
            for (SpMat::InnerIterator it(f.G, k); it; ++it) {
                base_.emplace_back(n_ + p_ + it.row(), it.col(), it.value());
                base_.emplace_back(it.col(), n_ + p_ + it.row(), it.value());
            }
        K_.resize(n_ + p_ + m_, n_ + p_ + m_);
        Kreg_.resize(n_ + p_ + m_, n_ + p_ + m_);
    }

    // sc == nullptr factors with the identity scaling.
    void factorize(const NtScaling* sc) {
        std::vector<Trip> t = base_;
        const auto off = f_.cone.offsets();
        if (sc) {
            for (int i = 0; i < f_.cone.l; ++i)
                t.emplace_back(n_ + p_ + i, n_ + p_ + i, -sc->w[i] * sc->w[i]);
            for (size_t b = 0; b < f_.cone.q.size(); ++b) {
                const int o = off[b], mq = f_.cone.q[b];
                // W^2 = eta^2 (2 wbar wbar' - J).
                Eigen::MatrixXd J = -Eigen::MatrixXd::Identity(mq, mq);
                J(0, 0) = 1.0;
                Eigen::MatrixXd W2 = sc->eta[b] * sc->eta[b] *
                                     (2.0 * sc->wbar[b] * sc->wbar[b].transpose() - J);
                for (int r = 0; r < mq; ++r)
                    for (int cix = 0; cix < mq; ++cix)
                        t.emplace_back(n_ + p_ + o + r, n_ + p_ + o + cix, -W2(r, cix));
            }
        } else {
            for (int i = 0; i < m_; ++i)
                t.emplace_back(n_ + p_ + i, n_ + p_ + i, -1.0);
        }
        K_.setFromTriplets(t.begin(), t.end());
        for (int i = 0; i < n_; ++i)
            t.emplace_back(i, i, kDelta);
        for (int i = n_; i < n_ + p_ + m_; ++i)
            t.emplace_back(i, i, -kDelta);
        Kreg_.setFromTriplets(t.begin(), t.end());
        if (!analyzed_) {
            ldlt_.analyzePattern(Kreg_);
            analyzed_ = true;
        }
        ldlt_.factorize(Kreg_);
        if (ldlt_.info() != Eigen::Success)
            throw NumericalError("KKT factorization failed");
    }

    VectorXd solve(const VectorXd& rhs) const {
        VectorXd u = ldlt_.solve(rhs);
        for (int round = 0; round < 3; ++round) {
            VectorXd r = rhs - K_ * u;
            if (r.norm() <= 1e-13 * std::max(1.0, rhs.norm()))
                break;
            u += ldlt_.solve(r);
        }
        return u;
    }

    int n() const { return n_; }
    int p() const { return p_; }
    int m() const { return m_; }

private:
    static constexpr double kDelta = 1e-8;
    const StdForm& f_;
    int n_, p_, m_;
    std::vector<Trip> base_;
    SpMat K_, Kreg_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt_;
    bool analyzed_ = false;
};

struct Iterate {
    VectorXd x, y, z, s;
    double tau = 1.0, kappa = 1.0;
};

struct Direction {
    VectorXd dx, dy, dz, ds;
    double dtau = 0.0, dkappa = 0.0;
};

struct Residuals {
    VectorXd r1;  // A'y + G'z + c tau
    VectorXd r2;  // -Ax + b tau
    VectorXd r3;  // -Gx + h tau - s
    double r4 = 0.0;  // -c'x - b'y - h'z - kappa
};

Residuals compute_residuals(const StdForm& f, const Iterate& it) {
    Residuals r;
    r.r1 = f.A.transpose() * it.y + f.G.transpose() * it.z + f.c * it.tau;
    r.r2 = -(f.A * it.x) + f.b * it.tau;
    r.r3 = -(f.G * it.x) + f.h * it.tau - it.s;
    r.r4 = -f.c.dot(it.x) - f.b.dot(it.y) - f.h.dot(it.z) - it.kappa;
    return r;
}

// One Newton solve for the given complementarity targets. v1 is the cached
// solution of K [x;y;z] = [-c; b; h] under the current scaling.
Direction newton_direction(const StdForm& f, const KktSolver& kkt, const NtScaling& sc,
                           const Iterate& it, const Residuals& res, double eta,
                           const VectorXd& d_s, double d_kappa, const VectorXd& v1) {
    const int n = kkt.n(), p = kkt.p(), m = kkt.m();
    VectorXd dstilde = jordan_div(f.cone, sc.lambda, d_s);
    VectorXd wds = apply_w(f.cone, sc, dstilde);

    VectorXd rhs(n + p + m);
    rhs.head(n) = -eta * res.r1;
    rhs.segment(n, p) = eta * res.r2;
    rhs.tail(m) = eta * res.r3 - wds;
    VectorXd v2 = kkt.solve(rhs);

    const auto x1 = v1.head(n), y1 = v1.segment(n, p), z1 = v1.tail(m);
    const auto x2 = v2.head(n), y2 = v2.segment(n, p), z2 = v2.tail(m);
    const double num =
        -eta * res.r4 + d_kappa / it.tau + f.c.dot(x2) + f.b.dot(y2) + f.h.dot(z2);
    const double den =
        -(f.c.dot(x1) + f.b.dot(y1) + f.h.dot(z1)) + it.kappa / it.tau;
    Direction d;
    d.dtau = num / den;
    d.dx = x2 + d.dtau * x1;
    d.dy = y2 + d.dtau * y1;
    d.dz = z2 + d.dtau * z1;
    d.ds = apply_w(f.cone, sc, VectorXd(dstilde - apply_w(f.cone, sc, d.dz)));
    d.dkappa = (d_kappa - it.kappa * d.dtau) / it.tau;
    return d;
}

double boundary_step(const StdForm& f, const NtScaling& sc, const Iterate& it,
                     const Direction& d, VectorXd* ds_scaled, VectorXd* dz_scaled) {
    VectorXd dsl = apply_w_inv(f.cone, sc, d.ds);
    VectorXd dzl = apply_w(f.cone, sc, d.dz);
    double a = std::min(max_cone_step(f.cone, sc.lambda, dsl),
                        max_cone_step(f.cone, sc.lambda, dzl));
    if (d.dtau < 0.0)
        a = std::min(a, it.tau / -d.dtau);
    if (d.dkappa < 0.0)
        a = std::min(a, it.kappa / -d.dkappa);
    if (ds_scaled)
        *ds_scaled = std::move(dsl);
    if (dz_scaled)
        *dz_scaled = std::move(dzl);
    return a;
}

}  // namespace

ConicSolution solve_conic(const ConicProgram& prog, const SolveOptions& opt) {
    const StdForm f = lower(prog);
    const int n = f.n, p = static_cast<int>(f.A.rows()), m = static_cast<int>(f.G.rows());
    KktSolver kkt(f);
    const VectorXd e = cone_identity(f.cone);
    const double nb = std::max(1.0, f.b.norm());
    const double nh = std::max(1.0, f.h.norm());
    const double nc = std::max(1.0, f.c.norm());

    // Start from the least-norm primal/dual points pushed into the cone.
    Iterate it;
    kkt.factorize(nullptr);
    {
        VectorXd rhs = VectorXd::Zero(n + p + m);
        rhs.segment(n, p) = f.b;
        rhs.tail(m) = f.h;
        VectorXd u = kkt.solve(rhs);
        it.x = u.head(n);
        it.s = -u.tail(m);
        const double ts = distance_to_cone(f.cone, it.s);
        if (ts >= 0.0)
            it.s += (1.0 + ts) * e;

        rhs.setZero();
        rhs.head(n) = -f.c;
        u = kkt.solve(rhs);
        it.y = u.segment(n, p);
        it.z = u.tail(m);
        const double tz = distance_to_cone(f.cone, it.z);
        if (tz >= 0.0)
            it.z += (1.0 + tz) * e;
    }

    ConicSolution sol;
    const int degree = f.cone.degree() + 1;
    for (int iter = 0; iter <= opt.max_iter; ++iter) {
        // Convergence bookkeeping on the tau-rescaled iterate.
        const VectorXd xs = it.x / it.tau, ys = it.y / it.tau, zs = it.z / it.tau,
                       ss = it.s / it.tau;
        const double pcost = f.c.dot(xs);
        const double dcost = -f.b.dot(ys) - f.h.dot(zs);
        const double gap = ss.dot(zs);
        const double relgap = gap / std::max(1.0, std::abs(pcost));
        const double pres = std::max((f.A * xs - f.b).norm() / nb,
                                     (f.G * xs + ss - f.h).norm() / nh);
        const double dres = (f.A.transpose() * ys + f.G.transpose() * zs + f.c).norm() / nc;
        if (opt.verbose)
            std::fprintf(stderr, "%3d  pcost %+.6e  dcost %+.6e  pres %.1e  dres %.1e  gap %.1e\n",
                         iter, pcost, dcost, pres, dres, relgap);
        sol.info = {iter, pres, dres, relgap, pcost, dcost};
        if (pres <= opt.tol && dres <= opt.tol && relgap <= opt.tol) {
            sol.status = SolveStatus::Optimal;
            sol.x.assign(xs.data(), xs.data() + n);
            sol.objective = pcost;
            return sol;
        }
        // Certificates of infeasibility from the unscaled iterate.
        const double byhz = f.b.dot(it.y) + f.h.dot(it.z);
        if (byhz < 0.0) {
            const double q =
                (f.A.transpose() * it.y + f.G.transpose() * it.z).norm() / (-byhz) / nc;
            if (q <= opt.tol) {
                sol.status = SolveStatus::PrimalInfeasible;
                sol.x.assign(n, std::numeric_limits<double>::quiet_NaN());
                return sol;
            }
        }
        const double cx = f.c.dot(it.x);
        if (cx < 0.0) {
            const double q = std::max((f.A * it.x).norm() / nb,
                                      (f.G * it.x + it.s).norm() / nh) /
                             (-cx);
            if (q <= opt.tol) {
                sol.status = SolveStatus::DualInfeasible;
                sol.x.assign(n, std::numeric_limits<double>::quiet_NaN());
                return sol;
            }
        }
        if (iter == opt.max_iter)
            break;
        if (it.tau <= 1e-10 * std::max(1.0, it.kappa)) {
            sol.status = SolveStatus::NumericalTrouble;
            sol.x.assign(n, std::numeric_limits<double>::quiet_NaN());
            return sol;
        }

        const Residuals res = compute_residuals(f, it);
        const NtScaling sc = nt_scaling(f.cone, it.s, it.z);
        const double mu = (it.s.dot(it.z) + it.tau * it.kappa) / degree;
        kkt.factorize(&sc);
        VectorXd rhs1(n + p + m);
        rhs1.head(n) = -f.c;
        rhs1.segment(n, p) = f.b;
        rhs1.tail(m) = f.h;
        const VectorXd v1 = kkt.solve(rhs1);

        // Predictor.
        const VectorXd lam2 = jordan_prod(f.cone, sc.lambda, sc.lambda);
        Direction aff = newton_direction(f, kkt, sc, it, res, 1.0, VectorXd(-lam2),
                                         -it.tau * it.kappa, v1);
        VectorXd dsl, dzl;
        const double a_aff = std::min(1.0, boundary_step(f, sc, it, aff, &dsl, &dzl));

        // Corrector with Mehrotra centering.
        const double sigma = std::pow(1.0 - a_aff, 3);
        const VectorXd d_s = -lam2 + sigma * mu * e - jordan_prod(f.cone, dsl, dzl);
        const double d_kappa = -it.tau * it.kappa + sigma * mu - aff.dtau * aff.dkappa;
        Direction dir =
            newton_direction(f, kkt, sc, it, res, 1.0 - sigma, d_s, d_kappa, v1);
        const double alpha =
            std::min(1.0, 0.98 * boundary_step(f, sc, it, dir, nullptr, nullptr));

        it.x += alpha * dir.dx;
        it.y += alpha * dir.dy;
        it.z += alpha * dir.dz;
        it.s += alpha * dir.ds;
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;
    }
    sol.status = SolveStatus::IterLimit;
    sol.x.assign(it.x.data(), it.x.data() + n);
    for (double& v : sol.x)
        v /= it.tau;
    sol.objective = sol.info.pcost;
    return sol;
}

}  // namespace feederopt
