#include "doctest.h"

#include "feederopt/cone_math.hpp"
#include "feederopt/conic_solver.hpp"
#include "feederopt/socp_builder.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <string>

using namespace feederopt;

namespace {

const std::string kData = FEEDEROPT_DATA_DIR;

ConicProgram lp_vars(std::initializer_list<std::pair<double, double>> bounds) {
    ConicProgram prog;
    int a = 0;
    for (auto [lo, hi] : bounds)
        prog.add_var({VarKind::Cii, 0, a++, 0}, lo, hi);
    return prog;
}

}  // namespace

TEST_CASE("scaled-space identities of the Nesterov-Todd point") {
    ConeLayout k;
    k.l = 2;
    k.q = {3, 4};
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd s(k.dim()), z(k.dim());
        for (int i = 0; i < k.dim(); ++i) {
            s[i] = U(gen);
            z[i] = U(gen);
        }
        // Push both points well inside the cone.
        s[0] = std::abs(s[0]) + 0.1;
        s[1] = std::abs(s[1]) + 0.1;
        z[0] = std::abs(z[0]) + 0.1;
        z[1] = std::abs(z[1]) + 0.1;
        for (int o : k.offsets()) {
            s[o] = 2.0 + std::abs(s[o]);
            z[o] = 2.0 + std::abs(z[o]);
        }
        REQUIRE(distance_to_cone(k, s) < 0.0);
        REQUIRE(distance_to_cone(k, z) < 0.0);

        NtScaling sc = nt_scaling(k, s, z);
        Eigen::VectorXd wz = apply_w(k, sc, z);
        Eigen::VectorXd wis = apply_w_inv(k, sc, s);
        CHECK((wz - sc.lambda).norm() < 1e-12);
        CHECK((wis - sc.lambda).norm() < 1e-12);

        // W W^{-1} = identity map.
        Eigen::VectorXd u(k.dim());
        for (int i = 0; i < k.dim(); ++i)
            u[i] = U(gen);
        CHECK((apply_w(k, sc, apply_w_inv(k, sc, u)) - u).norm() < 1e-12);

        // Jordan division inverts the product.
        Eigen::VectorXd v = jordan_prod(k, sc.lambda, u);
        CHECK((jordan_div(k, sc.lambda, v) - u).norm() < 1e-11);
    }

    // lambda o lambda recovers s'z in total.
    Eigen::VectorXd s(k.dim()), z(k.dim());
    s << 1.0, 2.0, 3.0, 1.0, -0.5, 4.0, 1.0, 1.0, -2.0;
    z << 0.5, 1.0, 2.0, 0.3, 0.2, 3.0, -0.5, 0.7, 1.0;
    NtScaling sc = nt_scaling(k, s, z);
    CHECK(sc.lambda.squaredNorm() == doctest::Approx(s.dot(z)));
}

TEST_CASE("cone step length matches a bisection oracle") {
    ConeLayout k;
    k.l = 1;
    k.q = {4};
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd p(k.dim()), d(k.dim());
        for (int i = 0; i < k.dim(); ++i) {
            p[i] = U(gen);
            d[i] = U(gen);
        }
        p[0] = 0.2 + std::abs(p[0]);
        p[1] = 1.5 + std::abs(p[1]);
        REQUIRE(distance_to_cone(k, p) < 0.0);
        const double a = max_cone_step(k, p, d);
        if (std::isfinite(a)) {
            CHECK(distance_to_cone(k, p + 0.999 * a * d) < 1e-9);
            CHECK(distance_to_cone(k, p + 1.001 * a * d) > -1e-9);
        } else {
            for (double t : {1.0, 10.0, 1000.0})
                CHECK(distance_to_cone(k, p + t * d) <= 1e-12);
        }
    }
}

TEST_CASE("one-variable problems against closed forms") {
    SUBCASE("lower bound active") {
        ConicProgram prog = lp_vars({{3.0, kInf}});
        prog.objective[0] = 1.0;
        ConicSolution sol = solve_conic(prog);
        REQUIRE(sol.ok());
        CHECK(sol.x[0] == doctest::Approx(3.0));
        CHECK(sol.objective == doctest::Approx(3.0));
    }
    SUBCASE("upper bound active") {
        ConicProgram prog = lp_vars({{-1.0, 5.0}});
        prog.objective[0] = -2.0;
        ConicSolution sol = solve_conic(prog);
        REQUIRE(sol.ok());
        CHECK(sol.x[0] == doctest::Approx(5.0));
        CHECK(sol.objective == doctest::Approx(-10.0));
    }
    SUBCASE("pinned variable rides through the equality path") {
        ConicProgram prog = lp_vars({{3.0, 3.0}, {0.0, 10.0}});
        prog.objective[1] = 1.0;
        prog.eq_rows.push_back({{{0, 1.0}, {1, 1.0}}, 5.0});
        ConicSolution sol = solve_conic(prog);
        REQUIRE(sol.ok());
        CHECK(sol.x[0] == doctest::Approx(3.0));
        CHECK(sol.x[1] == doctest::Approx(2.0));
    }
}

TEST_CASE("small LP with equality and inequality rows") {
    // min -x0 - 2 x1, x0 + x1 = 1.5, x1 - x0 <= 0.5, x in [0,1]^2.
    ConicProgram prog = lp_vars({{0.0, 1.0}, {0.0, 1.0}});
    prog.objective[0] = -1.0;
    prog.objective[1] = -2.0;
    prog.eq_rows.push_back({{{0, 1.0}, {1, 1.0}}, 1.5});
    prog.ineq_rows.push_back({{{1, 1.0}, {0, -1.0}}, 0.5});
    ConicSolution sol = solve_conic(prog);
    REQUIRE(sol.ok());
    CHECK(sol.x[0] == doctest::Approx(0.5));
    CHECK(sol.x[1] == doctest::Approx(1.0));
    CHECK(sol.objective == doctest::Approx(-2.5));
    CHECK(sol.info.pcost == doctest::Approx(sol.info.dcost).epsilon(1e-6));
}

TEST_CASE("voltage-product cone pushes the lifted cosine to its ceiling") {
    // With both squared voltages pinned at 1, the cone reads
    // c^2 + s^2 <= 1; maximizing c lands on (1, 0).
    ConicProgram prog;
    prog.add_var({VarKind::Cii, 0, 0, 0}, 1.0, 1.0);
    prog.add_var({VarKind::Cii, 0, 1, 0}, 1.0, 1.0);
    prog.add_var({VarKind::Cij, 0, 0, 0}, -kInf, kInf);
    prog.add_var({VarKind::Sij, 0, 0, 0}, -kInf, kInf);
    prog.objective[2] = -1.0;
    prog.soc_cones.push_back({0, 1, 2, 3});
    ConicSolution sol = solve_conic(prog);
    REQUIRE(sol.ok());
    CHECK(sol.x[2] == doctest::Approx(1.0));
    CHECK(std::abs(sol.x[3]) < 1e-6);
}

TEST_CASE("thermal cone clips the flow at the 3-4-5 triangle") {
    ConicProgram prog;
    prog.add_var({VarKind::FlowP, 0, 0, 0}, -kInf, kInf);
    prog.add_var({VarKind::FlowQ, 0, 0, 0}, 3.0, 3.0);
    prog.objective[0] = -1.0;
    prog.soc_thermal.push_back({0, 1, 5.0});
    ConicSolution sol = solve_conic(prog);
    REQUIRE(sol.ok());
    CHECK(sol.x[0] == doctest::Approx(4.0));
}

TEST_CASE("conflicting constraints come back as primal infeasibility") {
    ConicProgram prog = lp_vars({{2.0, kInf}});
    prog.ineq_rows.push_back({{{0, 1.0}}, 1.0});
    ConicSolution sol = solve_conic(prog);
    CHECK(sol.status == SolveStatus::PrimalInfeasible);
    CHECK(!sol.ok());
}

TEST_CASE("an unbounded objective comes back as dual infeasibility") {
    ConicProgram prog = lp_vars({{0.0, kInf}});
    prog.objective[0] = -1.0;
    ConicSolution sol = solve_conic(prog);
    CHECK(sol.status == SolveStatus::DualInfeasible);
}

TEST_CASE("repeat solves are bit-identical") {
    Network net = load_network(kData + "/twobus.net");
    Scenario sc = load_scenario_file(kData + "/twobus.scn");
    ConicProgram prog = build_fixed_power(net, sc);
    symmetry_reduce(prog);
    ConicSolution a = solve_conic(prog);
    ConicSolution b = solve_conic(prog);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    REQUIRE(a.x.size() == b.x.size());
    CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
    CHECK(a.objective == b.objective);
}

TEST_CASE("scaling the objective leaves the argmin in place") {
    Network net = load_network(kData + "/twobus.net");
    Scenario sc = load_scenario_file(kData + "/twobus.scn");
    ConicProgram prog = build_fixed_power(net, sc);
    symmetry_reduce(prog);
    ConicSolution a = solve_conic(prog);
    for (double& c : prog.objective)
        c *= 10.0;
    ConicSolution b = solve_conic(prog);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(b.objective == doctest::Approx(10.0 * a.objective).epsilon(1e-7));
    for (size_t i = 0; i < a.x.size(); ++i)
        CHECK(a.x[i] == doctest::Approx(b.x[i]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("two-bus dispatch lands on the pinned charge and a tight budget") {
    Network net = load_network(kData + "/twobus.net");
    Scenario sc = load_scenario_file(kData + "/twobus.scn");
    ConicProgram prog = build_fixed_power(net, sc);
    symmetry_reduce(prog);
    ConicSolution sol = solve_conic(prog);
    REQUIRE(sol.ok());
    CHECK(prog.max_violation(sol.x) < 1e-6);
    const int pc = prog.find(VarKind::EvCharge, 0, 0);
    CHECK(sol.x[pc] == doctest::Approx(0.08 * 0.25 / (0.95 * 0.95)));
    // Feeder import covers load plus charger plus the line loss, priced at
    // 50 $/MWh on a 10 MVA base.
    const int pg = prog.find(VarKind::GridP, 0, 0);
    CHECK(sol.x[pg] > 0.3 + sol.x[pc]);
    CHECK(sol.objective == doctest::Approx(50.0 * 10.0 * sol.x[pg]));
}

TEST_CASE("the full day program solves to tolerance") {
    Network net = load_network(kData + "/ieee33.net");
    Scenario sc = load_scenario_file(kData + "/caiso_aug18.scn");
    ConicProgram prog = build_fixed_power(net, sc);
    symmetry_reduce(prog);
    ConicSolution sol = solve_conic(prog);
    REQUIRE(sol.ok());
    CHECK(sol.info.pres <= 1e-8);
    CHECK(sol.info.dres <= 1e-8);
    CHECK(sol.info.relgap <= 1e-8);
    CHECK(prog.max_violation(sol.x) < 1e-5);
    CHECK(sol.objective > 0.0);
}
