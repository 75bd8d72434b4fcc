#include "feederopt/conic_program.hpp"

#include "feederopt/common.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace feederopt {

const char* var_kind_name(VarKind k) {
    switch (k) {
        case VarKind::GridP: return "Pg";
        case VarKind::GridQ: return "Qg";
        case VarKind::SolarP: return "Ps";
        case VarKind::EvCharge: return "Pc";
        case VarKind::EvEnergy: return "E";
        case VarKind::Cii: return "cii";
        case VarKind::Cij: return "cij";
        case VarKind::Sij: return "sij";
        case VarKind::FlowP: return "p";
        case VarKind::FlowQ: return "q";
    }
    return "?";
}

std::string VarInfo::name() const {
    std::string s = var_kind_name(kind);
    s += "[" + std::to_string(a);
    if (kind == VarKind::Cij || kind == VarKind::Sij || kind == VarKind::FlowP ||
        kind == VarKind::FlowQ)
        s += b == 0 ? ",f" : ",r";
    s += "](t" + std::to_string(t) + ")";
    return s;
}

int ConicProgram::add_var(const VarInfo& info, double lo, double hi) {
    if (lo > hi)
        throw InputError("variable " + info.name() + ": lower bound " + fmt6(lo) +
                         " exceeds upper bound " + fmt6(hi));
    vars.push_back(info);
    lb.push_back(lo);
    ub.push_back(hi);
    objective.push_back(0.0);
    return size() - 1;
}

int ConicProgram::find(VarKind kind, int t, int a, int b) const {
    for (int i = 0; i < size(); ++i) {
        const VarInfo& v = vars[i];
        if (v.kind == kind && v.t == t && v.a == a && v.b == b)
            return i;
    }
    return -1;
}

double ConicProgram::max_violation(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != size())
        throw InputError("point has " + std::to_string(x.size()) + " entries, program has " +
                         std::to_string(size()));
    double worst = 0.0;
    auto bump = [&](double v) { worst = std::max(worst, v); };
    for (int i = 0; i < size(); ++i) {
        bump(lb[i] - x[i]);
        bump(x[i] - ub[i]);
    }
    for (const LinearRow& r : eq_rows) {
        double s = -r.rhs;
        for (auto [i, c] : r.terms)
            s += c * x[i];
        bump(std::abs(s));
    }
    for (const LinearRow& r : ineq_rows) {
        double s = -r.rhs;
        for (auto [i, c] : r.terms)
            s += c * x[i];
        bump(s);
    }
    for (const SocCone4& k : soc_cones) {
        double a = 2.0 * x[k.cij], b = 2.0 * x[k.sij], c = x[k.cii] - x[k.cjj];
        bump(std::sqrt(a * a + b * b + c * c) - (x[k.cii] + x[k.cjj]));
    }
    for (const SocCone3& k : soc_thermal)
        bump(std::hypot(x[k.p], x[k.q]) - k.s_max);
    return worst;
}

void ConicProgram::check() const {
    const int n = size();
    if (static_cast<int>(lb.size()) != n || static_cast<int>(ub.size()) != n ||
        static_cast<int>(objective.size()) != n)
        throw InputError("program arrays are inconsistent with the variable count");
    auto idx_ok = [&](int i) { return i >= 0 && i < n; };
    for (const LinearRow& r : eq_rows)
        for (auto [i, c] : r.terms) {
            (void)c;
            if (!idx_ok(i))
                throw InputError("equality row references variable " + std::to_string(i));
        }
    for (const LinearRow& r : ineq_rows)
        for (auto [i, c] : r.terms) {
            (void)c;
            if (!idx_ok(i))
                throw InputError("inequality row references variable " + std::to_string(i));
        }
    for (const SocCone4& k : soc_cones)
        if (!idx_ok(k.cii) || !idx_ok(k.cjj) || !idx_ok(k.cij) || !idx_ok(k.sij))
            throw InputError("cone references an invalid variable index");
    for (const SocCone3& k : soc_thermal) {
        if (!idx_ok(k.p) || !idx_ok(k.q))
            throw InputError("thermal cone references an invalid variable index");
        if (!(k.s_max >= 0.0))
            throw InputError("thermal cone has negative rating " + fmt6(k.s_max));
    }
}

namespace {

void put_num(std::ostringstream& os, double v) {
    if (v == kInf) {
        os << "inf";
    } else if (v == -kInf) {
        os << "-inf";
    } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    }
}

void put_row(std::ostringstream& os, const LinearRow& r) {
    os << "r ";
    put_num(os, r.rhs);
    os << " " << r.terms.size();
    for (auto [i, c] : r.terms) {
        os << " " << i << " ";
        put_num(os, c);
    }
    os << "\n";
}

}  // namespace

std::string ConicProgram::dump() const {
    std::ostringstream os;
    os << "socp 1\n";
    os << "vars " << size() << "\n";
    for (int i = 0; i < size(); ++i) {
        os << "v " << i << " " << vars[i].name() << " ";
        put_num(os, lb[i]);
        os << " ";
        put_num(os, ub[i]);
        os << "\n";
    }
    os << "min";
    for (int i = 0; i < size(); ++i)
        if (objective[i] != 0.0) {
            os << " " << i << " ";
            put_num(os, objective[i]);
        }
    os << "\n";
    os << "eq " << eq_rows.size() << "\n";
    for (const LinearRow& r : eq_rows)
        put_row(os, r);
    os << "le " << ineq_rows.size() << "\n";
    for (const LinearRow& r : ineq_rows)
        put_row(os, r);
    for (const SocCone4& k : soc_cones)
        os << "cone4 " << k.cii << " " << k.cjj << " " << k.cij << " " << k.sij << "\n";
    for (const SocCone3& k : soc_thermal) {
        os << "cone3 " << k.p << " " << k.q << " ";
        put_num(os, k.s_max);
        os << "\n";
    }
    os << "end\n";
    return os.str();
}

}  // namespace feederopt
