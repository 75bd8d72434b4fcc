#include "feederopt/acpf.hpp"

#include "feederopt/common.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace feederopt {

namespace {

// Calculated injections P_i = v_i sum_j v_j (G_ij cos t_ij + B_ij sin t_ij),
// Q_i = v_i sum_j v_j (G_ij sin t_ij - B_ij cos t_ij).
void calc_injections(const Network& net, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& theta, Eigen::VectorXd& p,
                     Eigen::VectorXd& q) {
    const int n = net.bus_count();
    const auto& G = net.G();
    const auto& B = net.B();
    p.setZero(n);
    q.setZero(n);
    for (int i = 0; i < n; ++i) {
        double pi = v[i] * v[i] * G(i, i);
        double qi = -v[i] * v[i] * B(i, i);
        for (size_t k = 0; k < net.neighbors(i).size(); ++k) {
            int j = net.neighbors(i)[k];
            double tij = theta[i] - theta[j];
            double c = std::cos(tij), s = std::sin(tij);
            pi += v[i] * v[j] * (G(i, j) * c + B(i, j) * s);
            qi += v[i] * v[j] * (G(i, j) * s - B(i, j) * c);
        }
        p[i] = pi;
        q[i] = qi;
    }
}

}  // namespace

Eigen::VectorXd pf_mismatch(const Network& net, int slack, const Eigen::VectorXd& v,
                            const Eigen::VectorXd& theta, const Eigen::VectorXd& p_inj,
                            const Eigen::VectorXd& q_inj, const Eigen::VectorXd& i_draw) {
    const int n = net.bus_count();
    Eigen::VectorXd pc, qc;
    calc_injections(net, v, theta, pc, qc);
    Eigen::VectorXd m(2 * (n - 1));
    int r = 0;
    for (int i = 0; i < n; ++i) {
        if (i == slack)
            continue;
        m[r] = p_inj[i] - i_draw[i] * v[i] - pc[i];
        m[n - 1 + r] = q_inj[i] - qc[i];
        ++r;
    }
    return m;
}

Eigen::MatrixXd pf_jacobian(const Network& net, int slack, const Eigen::VectorXd& v,
                            const Eigen::VectorXd& theta, const Eigen::VectorXd& i_draw) {
    const int n = net.bus_count();
    const auto& G = net.G();
    const auto& B = net.B();
    Eigen::VectorXd pc, qc;
    calc_injections(net, v, theta, pc, qc);

    // index map skipping the slack
    std::vector<int> col(n, -1);
    int r = 0;
    for (int i = 0; i < n; ++i)
        if (i != slack)
            col[i] = r++;
    const int m = n - 1;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * m, 2 * m);

    for (int i = 0; i < n; ++i) {
        if (i == slack)
            continue;
        const int ri = col[i];
        // diagonal blocks
        J(ri, ri) = -qc[i] - B(i, i) * v[i] * v[i];                    // dP/dtheta_i
        J(ri, m + ri) = pc[i] / v[i] + G(i, i) * v[i] + i_draw[i];     // dP/dv_i
        J(m + ri, ri) = pc[i] - G(i, i) * v[i] * v[i];                 // dQ/dtheta_i
        J(m + ri, m + ri) = qc[i] / v[i] - B(i, i) * v[i];             // dQ/dv_i
        for (size_t k = 0; k < net.neighbors(i).size(); ++k) {
            int j = net.neighbors(i)[k];
            double tij = theta[i] - theta[j];
            double c = std::cos(tij), s = std::sin(tij);
            double gc_bs = G(i, j) * c + B(i, j) * s;
            double gs_bc = G(i, j) * s - B(i, j) * c;
            if (j != slack) {
                const int rj = col[j];
                J(ri, rj) = v[i] * v[j] * gs_bc;        // dP_i/dtheta_j
                J(ri, m + rj) = v[i] * gc_bs;           // dP_i/dv_j
                J(m + ri, rj) = -v[i] * v[j] * gc_bs;   // dQ_i/dtheta_j
                J(m + ri, m + rj) = v[i] * gs_bc;       // dQ_i/dv_j
            }
        }
    }
    return J;
}

PfResult newton_pf(const Network& net, int slack, double v_slack,
                   const Eigen::VectorXd& p_inj, const Eigen::VectorXd& q_inj,
                   const Eigen::VectorXd& i_draw, double tol, int max_iter) {
    const int n = net.bus_count();
    if (slack < 0 || slack >= n)
        throw InputError("slack index " + std::to_string(slack) + " out of range");
    if (!(v_slack > 0.0))
        throw InputError("slack voltage must be positive, got " + fmt6(v_slack));
    if (!p_inj.allFinite() || !q_inj.allFinite() || !i_draw.allFinite())
        throw InputError("power-flow injections must be finite");

    PfResult res;
    res.v = Eigen::VectorXd::Ones(n);
    res.v[slack] = v_slack;
    res.theta = Eigen::VectorXd::Zero(n);

    const int m = n - 1;
    for (int it = 0; it <= max_iter; ++it) {
        Eigen::VectorXd mis = pf_mismatch(net, slack, res.v, res.theta, p_inj, q_inj, i_draw);
        double worst = mis.size() ? mis.cwiseAbs().maxCoeff() : 0.0;
        res.mismatch_history.push_back(worst);
        res.max_mismatch = worst;
        if (worst <= tol) {
            res.converged = true;
            res.iterations = it;
            return res;
        }
        if (it == max_iter)
            break;

        Eigen::MatrixXd J = pf_jacobian(net, slack, res.v, res.theta, i_draw);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible())
            throw NumericalError("singular power-flow Jacobian at iteration " +
                                 std::to_string(it));
        Eigen::VectorXd dx = lu.solve(mis);
        int r = 0;
        for (int i = 0; i < n; ++i) {
            if (i == slack)
                continue;
            res.theta[i] += dx[r];
            res.v[i] += dx[m + r];
            ++r;
        }
    }
    res.converged = false;
    res.iterations = max_iter;
    return res;
}

void line_flows(const Network& net, const Eigen::VectorXd& v, const Eigen::VectorXd& theta,
                Eigen::VectorXd& p, Eigen::VectorXd& q) {
    const auto& G = net.G();
    const auto& B = net.B();
    const int L = net.line_count();
    p.resize(L);
    q.resize(L);
    for (int l = 0; l < L; ++l) {
        int i = net.lines()[l].from;
        int j = net.lines()[l].to;
        double tij = theta[i] - theta[j];
        double cij = v[i] * v[j] * std::cos(tij);
        double sij = v[i] * v[j] * std::sin(tij);
        double cii = v[i] * v[i];
        p[l] = -G(i, j) * cii + G(i, j) * cij + B(i, j) * sij;
        q[l] = B(i, j) * cii - B(i, j) * cij + G(i, j) * sij;
    }
}

std::string VerificationReport::to_text() const {
    std::ostringstream os;
    for (const HourCheck& h : hours)
        os << "hour " << h.hour << ": " << (h.pass ? "pass" : "FAIL")
           << (h.converged ? "" : " (diverged)") << " max_dv=" << fmt6(h.max_dv)
           << " max_dflow=" << fmt6(h.max_dflow) << "\n";
    os << (pass ? "pass" : "FAIL") << " overall max_dv=" << fmt6(max_dv)
       << " max_dflow=" << fmt6(max_dflow) << " (tolerances " << fmt6(v_tol) << ", "
       << fmt6(flow_tol) << ")\n";
    return os.str();
}

VerificationReport verify_opf(const Network& net, const OpfSolution& sol, const Scenario& sc,
                              double v_tol, double flow_tol) {
    const int n = net.bus_count();
    VerificationReport rep;
    rep.v_tol = v_tol;
    rep.flow_tol = flow_tol;
    rep.pass = true;

    for (int t = 0; t < sol.horizon; ++t) {
        Eigen::VectorXd p_inj = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd q_inj = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd i_draw = Eigen::VectorXd::Zero(n);
        for (size_t d = 0; d < sc.demand.size(); ++d) {
            int i = net.index_of(sc.demand[d].bus);
            p_inj[i] -= sc.demand[d].p[t];
            q_inj[i] -= sc.demand[d].q[t];
        }
        for (size_t s = 0; s < sc.solar.size(); ++s)
            p_inj[net.index_of(sc.solar[s].bus)] += sol.p_solar(s, t);
        for (size_t e = 0; e < sc.fleets.size(); ++e) {
            int i = net.index_of(sc.fleets[e].bus);
            if (sol.model == ModelKind::FixedPower)
                p_inj[i] -= sol.ev(e, t);
            else
                i_draw[i] += sol.ev(e, t);
        }

        HourCheck hc;
        hc.hour = t + 1;
        PfResult pf = newton_pf(net, net.feeder_index(), sol.v(net.feeder_index(), t), p_inj,
                                q_inj, i_draw);
        hc.converged = pf.converged;
        if (pf.converged) {
            int worst = 0;
            hc.max_dv = (pf.v - sol.v.col(t)).cwiseAbs().maxCoeff(&worst);
            hc.worst_bus = net.buses()[worst].id;
            Eigen::VectorXd fp, fq;
            line_flows(net, pf.v, pf.theta, fp, fq);
            double dp = (fp - sol.flow_p.col(t)).cwiseAbs().maxCoeff();
            double dq = (fq - sol.flow_q.col(t)).cwiseAbs().maxCoeff();
            hc.max_dflow = std::max(dp, dq);
            hc.pass = hc.max_dv <= v_tol && hc.max_dflow <= flow_tol;
        } else {
            hc.max_dv = hc.max_dflow = std::numeric_limits<double>::infinity();
            hc.pass = false;
        }
        rep.max_dv = std::max(rep.max_dv, hc.max_dv);
        rep.max_dflow = std::max(rep.max_dflow, hc.max_dflow);
        rep.pass = rep.pass && hc.pass;
        rep.hours.push_back(hc);
    }
    return rep;
}

}  // namespace feederopt
