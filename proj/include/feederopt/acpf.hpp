#pragma once

#include "feederopt/grid.hpp"
#include "feederopt/scenario.hpp"
#include "feederopt/solution.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace feederopt {

struct PfResult {
    bool converged = false;
    int iterations = 0;
    Eigen::VectorXd v;
    Eigen::VectorXd theta;
    double max_mismatch = 0.0;
    std::vector<double> mismatch_history;  // max-norm per iteration, pre-update
};

// Power mismatch at every non-slack bus, ordered [dP...; dQ...]. p_inj/q_inj
// are specified net injections (generation positive, load negative); i_draw
// adds a constant-current real draw of i_draw[i] * v[i] at each bus.
Eigen::VectorXd pf_mismatch(const Network& net, int slack, const Eigen::VectorXd& v,
                            const Eigen::VectorXd& theta, const Eigen::VectorXd& p_inj,
                            const Eigen::VectorXd& q_inj, const Eigen::VectorXd& i_draw);

// Analytic Jacobian of the calculated injections (plus the constant-current
// term) with respect to [theta_nonslack; v_nonslack]; the Newton step solves
// J dx = mismatch.
Eigen::MatrixXd pf_jacobian(const Network& net, int slack, const Eigen::VectorXd& v,
                            const Eigen::VectorXd& theta, const Eigen::VectorXd& i_draw);

// Newton-Raphson in polar form with the full analytic Jacobian, flat start.
// The slack bus holds (v_slack, 0) and absorbs any imbalance.
PfResult newton_pf(const Network& net, int slack, double v_slack,
                   const Eigen::VectorXd& p_inj, const Eigen::VectorXd& q_inj,
                   const Eigen::VectorXd& i_draw, double tol = 1e-10, int max_iter = 20);

// Directed from->to line flows for a voltage solution.
void line_flows(const Network& net, const Eigen::VectorXd& v, const Eigen::VectorXd& theta,
                Eigen::VectorXd& p, Eigen::VectorXd& q);

struct HourCheck {
    int hour = 0;  // 1-based
    bool converged = false;
    double max_dv = 0.0;
    double max_dflow = 0.0;
    int worst_bus = 0;  // bus id with the largest voltage deviation
    bool pass = false;
};

struct VerificationReport {
    std::vector<HourCheck> hours;
    bool pass = false;
    double max_dv = 0.0;
    double max_dflow = 0.0;
    double v_tol = 1e-4;
    double flow_tol = 1e-3;
    std::string to_text() const;
};

// Replays every hour of an OPF solution through newton_pf using only the
// dispatch (solar, EV, loads) and the solved feeder voltage, then compares
// voltages and flows. Fixed-current solutions replay their fleets as
// constant-current draws inside the Newton iteration.
VerificationReport verify_opf(const Network& net, const OpfSolution& sol,
                              const Scenario& sc, double v_tol = 1e-4,
                              double flow_tol = 1e-3);

}  // namespace feederopt
