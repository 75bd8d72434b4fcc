#include "doctest.h"

#include "feederopt/acpf.hpp"
#include "feederopt/common.hpp"
#include "feederopt/socp_builder.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

using namespace feederopt;

namespace {

const std::string kData = FEEDEROPT_DATA_DIR;

// Sending-end complex power of arc (line l, direction d) at a polar point.
std::pair<double, double> send_flow(const Network& net, int l, int d, const Eigen::VectorXd& v,
                                    const Eigen::VectorXd& th) {
    const Line& ln = net.lines()[l];
    const int i = d == 0 ? ln.from : ln.to;
    const int j = d == 0 ? ln.to : ln.from;
    const std::complex<double> y = 1.0 / std::complex<double>(ln.r, ln.x);
    const std::complex<double> vi = std::polar(v[i], th[i]);
    const std::complex<double> vj = std::polar(v[j], th[j]);
    const std::complex<double> s = vi * std::conj((vi - vj) * y);
    return {s.real(), s.imag()};
}

// Candidate point assembled from per-hour polar solutions plus dispatch
// tables; feeder P/Q are recomputed from the polar point itself.
struct PointData {
    std::vector<Eigen::VectorXd> v, th;
    Eigen::MatrixXd solar;   // unit x hour, may be 0x0
    Eigen::MatrixXd charge;  // fleet (original index) x hour
    Eigen::MatrixXd energy;
};

std::vector<double> lift(const Network& net, const ConicProgram& prog, const PointData& pd) {
    std::vector<double> x(prog.size(), 0.0);
    for (int k = 0; k < prog.size(); ++k) {
        const VarInfo& info = prog.vars[k];
        const int t = info.t;
        const Eigen::VectorXd& v = pd.v[t];
        const Eigen::VectorXd& th = pd.th[t];
        switch (info.kind) {
            case VarKind::GridP:
            case VarKind::GridQ: {
                double p = 0.0, q = 0.0;
                for (int l = 0; l < net.line_count(); ++l) {
                    const Line& ln = net.lines()[l];
                    if (ln.from != net.feeder_index() && ln.to != net.feeder_index())
                        continue;
                    auto [pf, qf] = send_flow(net, l, ln.from == net.feeder_index() ? 0 : 1, v, th);
                    p += pf;
                    q += qf;
                }
                x[k] = info.kind == VarKind::GridP ? p : q;
                break;
            }
            case VarKind::SolarP:
                x[k] = pd.solar.size() ? pd.solar(info.a, t) : 0.0;
                break;
            case VarKind::EvCharge:
                x[k] = pd.charge(info.a, t);
                break;
            case VarKind::EvEnergy:
                x[k] = pd.energy(info.a, t);
                break;
            case VarKind::Cii:
                x[k] = v[info.a] * v[info.a];
                break;
            case VarKind::Cij: {
                const Line& ln = net.lines()[info.a];
                x[k] = v[ln.from] * v[ln.to] * std::cos(th[ln.from] - th[ln.to]);
                break;
            }
            case VarKind::Sij: {
                const Line& ln = net.lines()[info.a];
                const double s = v[ln.from] * v[ln.to] * std::sin(th[ln.from] - th[ln.to]);
                x[k] = info.b == 0 ? s : -s;
                break;
            }
            case VarKind::FlowP:
            case VarKind::FlowQ: {
                auto [p, q] = send_flow(net, info.a, info.b, v, th);
                x[k] = info.kind == VarKind::FlowP ? p : q;
                break;
            }
        }
    }
    return x;
}

int count_kind(const ConicProgram& prog, VarKind k) {
    int c = 0;
    for (const VarInfo& v : prog.vars)
        c += v.kind == k ? 1 : 0;
    return c;
}

const LinearRow* row_with_term(const ConicProgram& prog, int var, double coef) {
    for (const LinearRow& r : prog.eq_rows)
        for (auto [i, c] : r.terms)
            if (i == var && c == doctest::Approx(coef).epsilon(1e-12))
                return &r;
    return nullptr;
}

double coef_of(const LinearRow& r, int var) {
    double c = 0.0;
    for (auto [i, ci] : r.terms)
        if (i == var)
            c += ci;
    return c;
}

}  // namespace

TEST_CASE("program sizes for the bundled day, directed and reduced") {
    Network net = load_network(kData + "/ieee33.net");
    Scenario sc = load_scenario_file(kData + "/caiso_aug18.scn");

    ConicProgram prog = build_fixed_power(net, sc);
    const int T = sc.horizon, n = net.bus_count(), L = net.line_count();
    const int S = static_cast<int>(sc.solar.size());
    const int E = static_cast<int>(sc.fleets.size());
    CHECK(n == 33);
    CHECK(L == 32);
    CHECK(S == 5);
    CHECK(E == 32);

    CHECK(prog.size() == T * (2 + S + 2 * E + n + 8 * L));
    CHECK(prog.size() == 8640);
    CHECK(static_cast<int>(prog.eq_rows.size()) == T * (2 * L + 4 * L + 2 * n + E));
    CHECK(static_cast<int>(prog.soc_cones.size()) == T * 2 * L);
    CHECK(static_cast<int>(prog.soc_thermal.size()) == T * 2 * L);

    symmetry_reduce(prog);
    CHECK(prog.size() == T * (2 + S + 2 * E + n + 6 * L));
    CHECK(prog.size() == 7104);
    CHECK(static_cast<int>(prog.eq_rows.size()) == T * (4 * L + 2 * n + E));
    CHECK(static_cast<int>(prog.soc_cones.size()) == T * L);
    CHECK(static_cast<int>(prog.soc_thermal.size()) == T * 2 * L);
    for (const VarInfo& v : prog.vars)
        if (v.kind == VarKind::Cij || v.kind == VarKind::Sij)
            CHECK(v.b == 0);

    // Objective prices feeder energy only.
    double nonzero = 0;
    for (int i = 0; i < prog.size(); ++i)
        if (prog.objective[i] != 0.0) {
            CHECK(prog.vars[i].kind == VarKind::GridP);
            CHECK(prog.objective[i] ==
                  doctest::Approx(sc.tou_price[prog.vars[i].t] * sc.base_mva));
            nonzero += 1;
        }
    CHECK(nonzero == T);
}

TEST_CASE("energy recursion telescopes: every storage column sums to zero") {
    Network net = load_network(kData + "/ieee33.net");
    Scenario sc = load_scenario_file(kData + "/caiso_aug18.scn");
    ConicProgram prog = build_fixed_power(net, sc);
    symmetry_reduce(prog);

    std::vector<double> colsum(prog.size(), 0.0);
    for (const LinearRow& r : prog.eq_rows)
        for (auto [i, c] : r.terms)
            colsum[i] += c;
    for (int i = 0; i < prog.size(); ++i)
        if (prog.vars[i].kind == VarKind::EvEnergy)
            CHECK(colsum[i] == 0.0);

    // Spot-check one recursion row and the day wrap.
    const int en70 = prog.find(VarKind::EvEnergy, 7, 0);
    const int en60 = prog.find(VarKind::EvEnergy, 6, 0);
    const int pc70 = prog.find(VarKind::EvCharge, 7, 0);
    const LinearRow* r7 = nullptr;
    for (const LinearRow& r : prog.eq_rows)
        if (coef_of(r, en70) == 1.0 && coef_of(r, en60) == -1.0)
            r7 = &r;
    REQUIRE(r7 != nullptr);
    const EvFleet& f = sc.fleets[0];
    CHECK(coef_of(*r7, pc70) == doctest::Approx(-f.eff_charge));
    CHECK(r7->rhs == doctest::Approx(-f.travel[7] * sc.r_discharge[7] / f.eff_discharge));

    const int en00 = prog.find(VarKind::EvEnergy, 0, 0);
    const int en23 = prog.find(VarKind::EvEnergy, 23, 0);
    bool wrapped = false;
    for (const LinearRow& r : prog.eq_rows)
        if (coef_of(r, en00) == 1.0 && coef_of(r, en23) == -1.0)
            wrapped = true;
    CHECK(wrapped);
}

TEST_CASE("scaling the fleet to zero removes every fleet variable") {
    Network net = load_network(kData + "/ieee33.net");
    Scenario sc = load_scenario_file(kData + "/caiso_aug18.scn");
    sc.fleets = scale_penetration(sc.fleets, 0.0);
    ConicProgram prog = build_fixed_power(net, sc);
    CHECK(count_kind(prog, VarKind::EvCharge) == 0);
    CHECK(count_kind(prog, VarKind::EvEnergy) == 0);
    CHECK(prog.size() == 24 * (2 + 5 + 33 + 8 * 32));
    symmetry_reduce(prog);
    CHECK(prog.size() == 24 * (2 + 5 + 33 + 6 * 32));
}

TEST_CASE("two-bus balance and flow rows carry the expected coefficients") {
    Network net = load_network(kData + "/twobus.net");
    Scenario sc = load_scenario_file(kData + "/twobus.scn");
    ConicProgram prog = build_fixed_power(net, sc);
    symmetry_reduce(prog);

    const int pc = prog.find(VarKind::EvCharge, 0, 0);
    const int fp_r = prog.find(VarKind::FlowP, 0, 0, 1);
    const int fp_f = prog.find(VarKind::FlowP, 0, 0, 0);
    const int cf = prog.find(VarKind::Cij, 0, 0, 0);
    const int sf = prog.find(VarKind::Sij, 0, 0, 0);
    const int c11 = prog.find(VarKind::Cii, 0, 0);
    const int c22 = prog.find(VarKind::Cii, 0, 1);
    REQUIRE(pc >= 0);
    REQUIRE(fp_r >= 0);

    // Bus 2 real balance: the EV draw and the reverse-arc flow, nothing else.
    const LinearRow* bal = row_with_term(prog, pc, -1.0);
    REQUIRE(bal != nullptr);
    CHECK(bal->terms.size() == 2);
    CHECK(coef_of(*bal, fp_r) == -1.0);
    CHECK(bal->rhs == doctest::Approx(0.3));

    // y = 1/(0.05+0.05j) = 10-10j, so G12 = -10 and B12 = 10. The sine
    // coefficient flips between the two arc orientations.
    const LinearRow* def_f = row_with_term(prog, fp_f, 1.0);
    const LinearRow* def_r = row_with_term(prog, fp_r, 1.0);
    REQUIRE(def_f != nullptr);
    REQUIRE(def_r != nullptr);
    CHECK(coef_of(*def_f, c11) == doctest::Approx(-10.0));
    CHECK(coef_of(*def_f, cf) == doctest::Approx(10.0));
    CHECK(coef_of(*def_f, sf) == doctest::Approx(-10.0));
    CHECK(coef_of(*def_r, c22) == doctest::Approx(-10.0));
    CHECK(coef_of(*def_r, cf) == doctest::Approx(10.0));
    CHECK(coef_of(*def_r, sf) == doctest::Approx(10.0));

    CHECK(prog.soc_cones.size() == 1);
    CHECK(prog.soc_thermal.size() == 2);

    // A single-step horizon pins the charge rate through the wrap row.
    const LinearRow* rec = row_with_term(prog, pc, -0.95);
    REQUIRE(rec != nullptr);
    CHECK(rec->terms.size() == 1);
    CHECK(rec->rhs == doctest::Approx(-0.08 * 0.25 / 0.95));
}

TEST_CASE("a converged power-flow point satisfies the reduced two-bus program") {
    Network net = load_network(kData + "/twobus.net");
    Scenario sc = load_scenario_file(kData + "/twobus.scn");
    ConicProgram prog = build_fixed_power(net, sc);
    symmetry_reduce(prog);

    const double pc = 0.08 * 0.25 / (0.95 * 0.95);
    Eigen::VectorXd p_inj = Eigen::VectorXd::Zero(2), q_inj = Eigen::VectorXd::Zero(2);
    p_inj[1] = -(0.3 + pc);
    q_inj[1] = -0.15;
    PfResult pf = newton_pf(net, net.feeder_index(), 1.0, p_inj, q_inj,
                            Eigen::VectorXd::Zero(2));
    REQUIRE(pf.converged);

    PointData pd;
    pd.v = {pf.v};
    pd.th = {pf.theta};
    pd.charge = Eigen::MatrixXd::Constant(1, 1, pc);
    pd.energy = Eigen::MatrixXd::Constant(1, 1, 0.05);
    CHECK(prog.max_violation(lift(net, prog, pd)) < 1e-9);
}

TEST_CASE("a day of power-flow points satisfies the reduced feeder program") {
    Network net = load_network(kData + "/ieee33.net");
    Scenario sc = load_scenario_file(kData + "/caiso_aug18.scn");
    sc.fleets = scale_penetration(sc.fleets, 0.0);
    ConicProgram prog = build_fixed_power(net, sc);
    symmetry_reduce(prog);

    PointData pd;
    for (int t = 0; t < sc.horizon; ++t) {
        Eigen::VectorXd p_inj = Eigen::VectorXd::Zero(net.bus_count());
        Eigen::VectorXd q_inj = Eigen::VectorXd::Zero(net.bus_count());
        for (const LoadDemand& d : sc.demand) {
            p_inj[net.index_of(d.bus)] -= d.p[t];
            q_inj[net.index_of(d.bus)] -= d.q[t];
        }
        PfResult pf = newton_pf(net, net.feeder_index(), 1.0, p_inj, q_inj,
                                Eigen::VectorXd::Zero(net.bus_count()));
        REQUIRE(pf.converged);
        pd.v.push_back(pf.v);
        pd.th.push_back(pf.theta);
    }
    CHECK(prog.max_violation(lift(net, prog, pd)) < 1e-9);
}

TEST_CASE("current-mode build freezes the charger voltage where asked") {
    Network net = load_network(kData + "/twobus.net");
    Scenario sc = load_scenario_file(kData + "/twobus.scn");
    Eigen::MatrixXd v_hat = Eigen::MatrixXd::Constant(2, 1, 0.97);
    ConicProgram prog = build_fixed_current(net, sc, v_hat);
    symmetry_reduce(prog);

    const int cur = prog.find(VarKind::EvCharge, 0, 0);
    REQUIRE(cur >= 0);
    CHECK(prog.lb[cur] == 0.0);
    CHECK(prog.ub[cur] == doctest::Approx(0.05));

    const LinearRow* bal = row_with_term(prog, cur, -0.97);
    REQUIRE(bal != nullptr);
    CHECK(bal->rhs == doctest::Approx(0.3));

    const LinearRow* rec = row_with_term(prog, cur, -0.95 * 0.97);
    REQUIRE(rec != nullptr);
    CHECK(rec->rhs == doctest::Approx(-0.08 * 0.25 / 0.95));
}

TEST_CASE("builder input errors name the offending piece") {
    Network net = load_network(kData + "/twobus.net");
    Scenario sc = load_scenario_file(kData + "/twobus.scn");

    SUBCASE("MVA base mismatch") {
        Scenario bad = sc;
        bad.base_mva = 100.0;
        // Demand stays as parsed; only the base disagrees with the network.
        CHECK_THROWS_AS(build_fixed_power(net, bad), InputError);
    }
    SUBCASE("fleet at a bus the network does not have") {
        Scenario bad = sc;
        bad.fleets[0].bus = 99;
        CHECK_THROWS_WITH_AS(build_fixed_power(net, bad),
                             doctest::Contains("99"), InputError);
    }
    SUBCASE("voltage guess shape") {
        Eigen::MatrixXd v_hat = Eigen::MatrixXd::Constant(3, 1, 1.0);
        CHECK_THROWS_AS(build_fixed_current(net, sc, v_hat), InputError);
    }
    SUBCASE("voltage guess sign") {
        Eigen::MatrixXd v_hat = Eigen::MatrixXd::Constant(2, 1, 1.0);
        v_hat(1, 0) = 0.0;
        CHECK_THROWS_AS(build_fixed_current(net, sc, v_hat), InputError);
    }
    SUBCASE("reverse arc with no forward partner") {
        ConicProgram prog;
        prog.add_var({VarKind::Cij, 0, 0, 1}, -kInf, kInf);
        CHECK_THROWS_AS(symmetry_reduce(prog), InputError);
    }
}

TEST_CASE("violation scan reports the worst bound, row, and cone residual") {
    ConicProgram prog;
    prog.add_var({VarKind::Cii, 0, 0, 0}, 0.0, 1.0);
    prog.add_var({VarKind::Cii, 0, 1, 0}, 0.0, 2.0);
    prog.add_var({VarKind::Cij, 0, 0, 0}, -kInf, kInf);
    prog.add_var({VarKind::Sij, 0, 0, 0}, -kInf, kInf);
    prog.eq_rows.push_back({{{0, 1.0}, {1, 2.0}}, 2.6});
    prog.ineq_rows.push_back({{{0, 1.0}, {1, -1.0}}, -0.6});
    prog.soc_cones.push_back({0, 1, 2, 3});
    prog.soc_thermal.push_back({2, 3, 1.2});

    std::vector<double> x = {0.5, 1.0, 0.3, 0.4};
    CHECK(prog.max_violation(x) == doctest::Approx(0.1));
    // Pushing x0 past its bound also drives the inequality row to 0.85,
    // which dominates the 0.25 bound overshoot.
    x[0] = 1.25;
    CHECK(prog.max_violation(x) == doctest::Approx(0.85));
    x = {0.5, 1.0, 0.8, 0.6};
    // Norm (1.6, 1.2, -0.5) has length sqrt(4.25) ~ 2.0616 vs rhs 1.5.
    CHECK(prog.max_violation(x) == doctest::Approx(std::sqrt(4.25) - 1.5));

    CHECK_THROWS_AS(prog.max_violation(std::vector<double>(3, 0.0)), InputError);
    CHECK_THROWS_AS(prog.add_var({VarKind::Cii, 0, 2, 0}, 1.0, 0.5), InputError);

    SUBCASE("structural check catches stray indices") {
        prog.eq_rows.push_back({{{7, 1.0}}, 0.0});
        CHECK_THROWS_AS(prog.check(), InputError);
    }
    SUBCASE("structural check catches negative ratings") {
        prog.soc_thermal.push_back({2, 3, -1.0});
        CHECK_THROWS_AS(prog.check(), InputError);
    }
}

TEST_CASE("program dump is stable and self-delimited") {
    Network net = load_network(kData + "/twobus.net");
    Scenario sc = load_scenario_file(kData + "/twobus.scn");
    ConicProgram prog = build_fixed_power(net, sc);
    symmetry_reduce(prog);
    const std::string d1 = prog.dump();
    CHECK(d1.substr(0, 7) == "socp 1\n");
    CHECK(d1.find("vars " + std::to_string(prog.size()) + "\n") != std::string::npos);
    CHECK(d1.find("cone4 ") != std::string::npos);
    CHECK(d1.find("cone3 ") != std::string::npos);
    CHECK(d1.rfind("end\n") == d1.size() - 4);
    CHECK(d1 == prog.dump());
}
