#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace feederopt {

enum class VarKind {
    GridP,     // a = grid index (always 0)
    GridQ,
    SolarP,    // a = solar unit index
    EvCharge,  // a = fleet index; charging power, or current in the
               // voltage-parameterized variant
    EvEnergy,  // a = fleet index
    Cii,       // a = bus index; squared voltage magnitude
    Cij,       // a = line index, b = 0 forward (from->to) / 1 reverse
    Sij,       // a = line index, b = direction
    FlowP,     // a = line index, b = direction
    FlowQ,
};

const char* var_kind_name(VarKind k);

struct VarInfo {
    VarKind kind = VarKind::GridP;
    int t = 0;  // hour, 0-based
    int a = 0;  // entity index (bus/line/unit/fleet)
    int b = 0;  // direction for line-pair kinds
    std::string name() const;
};

// sum_k coef_k * x_k  (= rhs) for eq rows, (<= rhs) for ineq rows
struct LinearRow {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
};

// || (2 x_cij, 2 x_sij, x_cii - x_cjj) || <= x_cii + x_cjj
struct SocCone4 {
    int cii = -1, cjj = -1, cij = -1, sij = -1;
};

// || (x_p, x_q) || <= s_max
struct SocCone3 {
    int p = -1, q = -1;
    double s_max = 0.0;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConicProgram {
    std::vector<VarInfo> vars;
    std::vector<double> lb, ub;
    std::vector<double> objective;  // dense, same length as vars
    std::vector<LinearRow> eq_rows;
    std::vector<LinearRow> ineq_rows;
    std::vector<SocCone4> soc_cones;
    std::vector<SocCone3> soc_thermal;

    int size() const { return static_cast<int>(vars.size()); }
    int add_var(const VarInfo& info, double lo, double hi);

    // index of the first variable matching (kind, t, a, b), -1 if absent
    int find(VarKind kind, int t, int a, int b = 0) const;

    // residual of every row/cone/bound at the point x; max violation
    double max_violation(const std::vector<double>& x) const;

    void check() const;  // throws InputError on malformed structure

    // portable text serialization for external cross-checking
    std::string dump() const;
};

}  // namespace feederopt
