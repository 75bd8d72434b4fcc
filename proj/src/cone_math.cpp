#include "feederopt/cone_math.hpp"

#include "feederopt/common.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace feederopt {

using Eigen::VectorXd;

int ConeLayout::dim() const {
    return l + std::accumulate(q.begin(), q.end(), 0);
}

int ConeLayout::degree() const {
    return l + static_cast<int>(q.size());
}

std::vector<int> ConeLayout::offsets() const {
    std::vector<int> off(q.size());
    int at = l;
    for (size_t b = 0; b < q.size(); ++b) {
        off[b] = at;
        at += q[b];
    }
    return off;
}

namespace {

// u0^2 - |u1|^2, the squared Jordan "determinant" of an SOC vector.
double jnorm_sq(const VectorXd& v, int off, int k) {
    return v[off] * v[off] - v.segment(off + 1, k - 1).squaredNorm();
}

}  // namespace

NtScaling nt_scaling(const ConeLayout& k, const VectorXd& s, const VectorXd& z) {
    if (s.size() != k.dim() || z.size() != k.dim())
        throw NumericalError("scaling arguments do not match the cone layout");
    NtScaling sc;
    sc.w.resize(k.l);
    sc.lambda.resize(k.dim());
    for (int i = 0; i < k.l; ++i) {
        if (s[i] <= 0.0 || z[i] <= 0.0)
            throw NumericalError("scaling point left the nonnegative cone");
        sc.w[i] = std::sqrt(s[i] / z[i]);
        sc.lambda[i] = std::sqrt(s[i] * z[i]);
    }
    const auto off = k.offsets();
    for (size_t b = 0; b < k.q.size(); ++b) {
        const int o = off[b], m = k.q[b];
        const double as2 = jnorm_sq(s, o, m), az2 = jnorm_sq(z, o, m);
        if (s[o] <= 0.0 || z[o] <= 0.0 || as2 <= 0.0 || az2 <= 0.0)
            throw NumericalError("scaling point left a second-order cone");
        const double as = std::sqrt(as2), az = std::sqrt(az2);
        VectorXd sb = s.segment(o, m) / as, zb = z.segment(o, m) / az;
        const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
        VectorXd wb = zb;
        wb.tail(m - 1) = -wb.tail(m - 1);
        wb = (sb + wb) / (2.0 * gamma);
        VectorXd vb = wb;
        vb[0] += 1.0;
        vb /= std::sqrt(2.0 * (wb[0] + 1.0));
        sc.eta.push_back(std::sqrt(as / az));
        sc.wbar.push_back(wb);
        sc.vbar.push_back(vb);
    }
    // lambda = W z on the SOC part.
    VectorXd wz = apply_w(k, sc, z);
    sc.lambda.tail(k.dim() - k.l) = wz.tail(k.dim() - k.l);
    return sc;
}

VectorXd apply_w(const ConeLayout& k, const NtScaling& sc, const VectorXd& u) {
    VectorXd out(k.dim());
    out.head(k.l) = sc.w.cwiseProduct(u.head(k.l));
    const auto off = k.offsets();
    for (size_t b = 0; b < k.q.size(); ++b) {
        const int o = off[b], m = k.q[b];
        const VectorXd& vb = sc.vbar[b];
        VectorXd ju = u.segment(o, m);
        ju.tail(m - 1) = -ju.tail(m - 1);
        out.segment(o, m) = sc.eta[b] * (2.0 * vb * vb.dot(u.segment(o, m)) - ju);
    }
    return out;
}

VectorXd apply_w_inv(const ConeLayout& k, const NtScaling& sc, const VectorXd& u) {
    VectorXd out(k.dim());
    out.head(k.l) = u.head(k.l).cwiseQuotient(sc.w);
    const auto off = k.offsets();
    for (size_t b = 0; b < k.q.size(); ++b) {
        const int o = off[b], m = k.q[b];
        VectorXd jvb = sc.vbar[b];
        jvb.tail(m - 1) = -jvb.tail(m - 1);
        VectorXd ju = u.segment(o, m);
        ju.tail(m - 1) = -ju.tail(m - 1);
        out.segment(o, m) = (2.0 * jvb * jvb.dot(u.segment(o, m)) - ju) / sc.eta[b];
    }
    return out;
}

VectorXd jordan_prod(const ConeLayout& k, const VectorXd& u, const VectorXd& v) {
    VectorXd out(k.dim());
    out.head(k.l) = u.head(k.l).cwiseProduct(v.head(k.l));
    const auto off = k.offsets();
    for (size_t b = 0; b < k.q.size(); ++b) {
        const int o = off[b], m = k.q[b];
        out[o] = u.segment(o, m).dot(v.segment(o, m));
        out.segment(o + 1, m - 1) =
            u[o] * v.segment(o + 1, m - 1) + v[o] * u.segment(o + 1, m - 1);
    }
    return out;
}

VectorXd jordan_div(const ConeLayout& k, const VectorXd& u, const VectorXd& v) {
    VectorXd out(k.dim());
    out.head(k.l) = v.head(k.l).cwiseQuotient(u.head(k.l));
    const auto off = k.offsets();
    for (size_t b = 0; b < k.q.size(); ++b) {
        const int o = off[b], m = k.q[b];
        const double det = jnorm_sq(u, o, m);
        if (det == 0.0 || u[o] == 0.0)
            throw NumericalError("Jordan division by a boundary vector");
        const double x0 =
            (u[o] * v[o] - u.segment(o + 1, m - 1).dot(v.segment(o + 1, m - 1))) / det;
        out[o] = x0;
        out.segment(o + 1, m - 1) =
            (v.segment(o + 1, m - 1) - x0 * u.segment(o + 1, m - 1)) / u[o];
    }
    return out;
}

VectorXd cone_identity(const ConeLayout& k) {
    VectorXd e = VectorXd::Zero(k.dim());
    e.head(k.l).setOnes();
    for (int o : k.offsets())
        e[o] = 1.0;
    return e;
}

double distance_to_cone(const ConeLayout& k, const VectorXd& v) {
    double t = -std::numeric_limits<double>::infinity();
    if (k.l > 0)
        t = -v.head(k.l).minCoeff();
    const auto off = k.offsets();
    for (size_t b = 0; b < k.q.size(); ++b) {
        const int o = off[b], m = k.q[b];
        t = std::max(t, v.segment(o + 1, m - 1).norm() - v[o]);
    }
    return t;
}

double max_cone_step(const ConeLayout& k, const VectorXd& point, const VectorXd& dir) {
    double alpha = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k.l; ++i)
        if (dir[i] < 0.0)
            alpha = std::min(alpha, point[i] / -dir[i]);
    const auto off = k.offsets();
    for (size_t b = 0; b < k.q.size(); ++b) {
        const int o = off[b], m = k.q[b];
        // Roots of |p1 + a d1|^2 = (p0 + a d0)^2; the cone is left at the
        // smallest positive root, written in the cancellation-free form.
        const double qa = dir[o] * dir[o] - dir.segment(o + 1, m - 1).squaredNorm();
        const double qb = point[o] * dir[o] -
                          point.segment(o + 1, m - 1).dot(dir.segment(o + 1, m - 1));
        const double qc = jnorm_sq(point, o, m);
        if (qa < 0.0) {
            alpha = std::min(alpha, qc / (-qb + std::sqrt(std::max(qb * qb - qa * qc, 0.0))));
        } else if (qb < 0.0) {
            const double disc = qb * qb - qa * qc;
            if (disc >= 0.0)
                alpha = std::min(alpha, qc / (-qb + std::sqrt(disc)));
        }
    }
    return alpha;
}

}  // namespace feederopt
