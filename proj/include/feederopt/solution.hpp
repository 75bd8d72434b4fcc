#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace feederopt {

enum class ModelKind { FixedPower, FixedCurrent };

inline const char* model_name(ModelKind m) {
    return m == ModelKind::FixedPower ? "fixed_power" : "fixed_current";
}

// Physical solution of one multi-period OPF. All matrices are indexed
// (entity, hour). ev holds the charging power P^c per fleet under the
// fixed-power model and the charging current I^c under fixed-current.
struct OpfSolution {
    ModelKind model = ModelKind::FixedPower;
    int horizon = 0;
    Eigen::MatrixXd v;        // bus x hour, p.u.
    Eigen::MatrixXd theta;    // bus x hour, rad, feeder = 0
    Eigen::MatrixXd flow_p;   // line x hour, from->to, p.u.
    Eigen::MatrixXd flow_q;   // line x hour
    Eigen::VectorXd p_grid;   // per hour, p.u.
    Eigen::VectorXd q_grid;   // per hour, p.u.
    Eigen::MatrixXd p_solar;  // unit x hour, p.u.
    Eigen::MatrixXd ev;       // fleet x hour, p.u.
    Eigen::MatrixXd energy;   // fleet x hour, p.u.*h
    double objective = 0.0;   // dollars
    double exactness_gap = 0.0;
    int fixed_point_iterations = 0;  // fixed-current only
};

}  // namespace feederopt
