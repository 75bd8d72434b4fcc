#pragma once

#include <Eigen/Dense>

#include <vector>

namespace feederopt {

// Cartesian product R+^l x Q^{q[0]} x Q^{q[1]} x ... where Q^k is the
// second-order cone {u in R^k : u[0] >= |u[1:]|}. SOC blocks follow the
// nonnegative part in one flat vector.
struct ConeLayout {
    int l = 0;
    std::vector<int> q;

    int dim() const;
    int degree() const;  // l plus one per SOC block
    std::vector<int> offsets() const;
};

// Nesterov-Todd scaling for a strictly interior pair (s, z): the symmetric
// automorphism W of the cone with W z = W^{-1} s = lambda. Per SOC block,
// with J = diag(1, -I) and P(u) = 2uu' - (u'Ju) J,
//     W^2 = eta^2 P(wbar),  W = eta P(vbar),  vbar = Jordan sqrt of wbar,
// where wbar' J wbar = vbar' J vbar = 1.
struct NtScaling {
    Eigen::VectorXd w;                  // nonnegative part, W = diag(w)
    std::vector<double> eta;            // per SOC block
    std::vector<Eigen::VectorXd> wbar;  // per SOC block
    std::vector<Eigen::VectorXd> vbar;  // per SOC block
    Eigen::VectorXd lambda;             // scaled point
};

// Throws NumericalError if either argument is not strictly interior.
NtScaling nt_scaling(const ConeLayout& k, const Eigen::VectorXd& s, const Eigen::VectorXd& z);

Eigen::VectorXd apply_w(const ConeLayout& k, const NtScaling& sc, const Eigen::VectorXd& u);
Eigen::VectorXd apply_w_inv(const ConeLayout& k, const NtScaling& sc, const Eigen::VectorXd& u);

// Jordan algebra product u o v, and the solve u o x = v for x.
Eigen::VectorXd jordan_prod(const ConeLayout& k, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& v);
Eigen::VectorXd jordan_div(const ConeLayout& k, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v);
Eigen::VectorXd cone_identity(const ConeLayout& k);

// Smallest t such that v + t * identity lies in the cone; negative when v is
// already interior, zero on the boundary.
double distance_to_cone(const ConeLayout& k, const Eigen::VectorXd& v);

// Largest alpha with point + alpha * dir still in the cone, +inf when the
// ray never leaves. point must be strictly interior.
double max_cone_step(const ConeLayout& k, const Eigen::VectorXd& point,
                     const Eigen::VectorXd& dir);

}  // namespace feederopt
