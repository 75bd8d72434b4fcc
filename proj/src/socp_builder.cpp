#include "feederopt/socp_builder.hpp"

#include "feederopt/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <utility>

namespace feederopt {

namespace {

// Per-hour variable indices, in creation order.
struct HourVars {
    int pg = -1, qg = -1;
    std::vector<int> ps;                       // per solar unit
    std::vector<int> pc, en;                   // per active fleet
    std::vector<int> cii;                      // per bus
    std::vector<std::array<int, 2>> carc, sarc;  // per line, fwd/rev
    std::vector<std::array<int, 2>> fp, fq;
};

ConicProgram build(const Network& raw, const Scenario& sc_in, const Eigen::MatrixXd* v_hat) {
    if (std::abs(raw.bases().mva - sc_in.base_mva) > 1e-9)
        throw InputError("network MVA base " + fmt6(raw.bases().mva) +
                         " does not match scenario base " + fmt6(sc_in.base_mva));

    // Fleets scaled to nothing carry no variables; keep the original fleet
    // index in the variable metadata so recovery can place results.
    Scenario sc = sc_in;
    std::vector<int> orig;
    {
        std::vector<EvFleet> kept;
        for (int e = 0; e < static_cast<int>(sc.fleets.size()); ++e) {
            const EvFleet& f = sc.fleets[e];
            if (f.p_charge_max == 0.0 && f.e_max == 0.0)
                continue;
            kept.push_back(f);
            orig.push_back(e);
        }
        sc.fleets = std::move(kept);
    }
    sc.validate();

    const int T = sc.horizon;
    if (v_hat) {
        if (v_hat->rows() != raw.bus_count() || v_hat->cols() != T)
            throw InputError("voltage guess is " + std::to_string(v_hat->rows()) + "x" +
                             std::to_string(v_hat->cols()) + ", expected " +
                             std::to_string(raw.bus_count()) + "x" + std::to_string(T));
        if (!(v_hat->array() > 0.0).all())
            throw InputError("voltage guess has a nonpositive entry");
    }

    std::vector<int> load_buses, solar_buses, fleet_buses;
    for (const auto& d : sc.demand) load_buses.push_back(d.bus);
    for (const auto& s : sc.solar) solar_buses.push_back(s.bus);
    for (const auto& f : sc.fleets) fleet_buses.push_back(f.bus);
    const Network net = raw.with_attachments(load_buses, solar_buses, fleet_buses);

    const int n = net.bus_count();
    const int L = net.line_count();
    const int S = static_cast<int>(sc.solar.size());
    const int E = static_cast<int>(sc.fleets.size());

    std::vector<int> fleet_bus_ix(E);
    for (int e = 0; e < E; ++e)
        fleet_bus_ix[e] = net.index_of(sc.fleets[e].bus);

    // Arcs leaving each bus: (line, direction), direction 0 = the line's own
    // from->to orientation.
    std::vector<std::vector<std::pair<int, int>>> arcs_out(n);
    for (int l = 0; l < L; ++l) {
        arcs_out[net.lines()[l].from].push_back({l, 0});
        arcs_out[net.lines()[l].to].push_back({l, 1});
    }

    ConicProgram prog;
    std::vector<HourVars> hv(T);
    for (int t = 0; t < T; ++t) {
        HourVars& h = hv[t];
        h.pg = prog.add_var({VarKind::GridP, t, net.feeder_index(), 0}, -kInf, kInf);
        h.qg = prog.add_var({VarKind::GridQ, t, net.feeder_index(), 0}, -kInf, kInf);
        for (int s = 0; s < S; ++s)
            h.ps.push_back(prog.add_var({VarKind::SolarP, t, s, 0}, 0.0, sc.solar_bound(s, t)));
        for (int e = 0; e < E; ++e)
            h.pc.push_back(prog.add_var({VarKind::EvCharge, t, orig[e], 0}, 0.0,
                                        sc.fleets[e].p_charge_max * sc.r_charge[t]));
        for (int e = 0; e < E; ++e)
            h.en.push_back(prog.add_var({VarKind::EvEnergy, t, orig[e], 0}, sc.fleets[e].e_min,
                                        sc.fleets[e].e_max));
        for (int i = 0; i < n; ++i) {
            const Bus& bus = net.buses()[i];
            h.cii.push_back(prog.add_var({VarKind::Cii, t, i, 0}, bus.v_min * bus.v_min,
                                         bus.v_max * bus.v_max));
        }
        h.carc.resize(L);
        h.sarc.resize(L);
        for (int l = 0; l < L; ++l) {
            h.carc[l][0] = prog.add_var({VarKind::Cij, t, l, 0}, -kInf, kInf);
            h.sarc[l][0] = prog.add_var({VarKind::Sij, t, l, 0}, -kInf, kInf);
            h.carc[l][1] = prog.add_var({VarKind::Cij, t, l, 1}, -kInf, kInf);
            h.sarc[l][1] = prog.add_var({VarKind::Sij, t, l, 1}, -kInf, kInf);
        }
        h.fp.resize(L);
        h.fq.resize(L);
        for (int l = 0; l < L; ++l) {
            h.fp[l][0] = prog.add_var({VarKind::FlowP, t, l, 0}, -kInf, kInf);
            h.fq[l][0] = prog.add_var({VarKind::FlowQ, t, l, 0}, -kInf, kInf);
            h.fp[l][1] = prog.add_var({VarKind::FlowP, t, l, 1}, -kInf, kInf);
            h.fq[l][1] = prog.add_var({VarKind::FlowQ, t, l, 1}, -kInf, kInf);
        }
        prog.objective[h.pg] = sc.tou_price[t] * sc.base_mva;
    }

    for (int t = 0; t < T; ++t) {
        const HourVars& h = hv[t];

        // Reverse arcs mirror the forward lifted pair.
        for (int l = 0; l < L; ++l) {
            prog.eq_rows.push_back({{{h.carc[l][1], 1.0}, {h.carc[l][0], -1.0}}, 0.0});
            prog.eq_rows.push_back({{{h.sarc[l][1], 1.0}, {h.sarc[l][0], 1.0}}, 0.0});
        }

        // Sending-end flow of each arc in lifted variables.
        for (int l = 0; l < L; ++l) {
            const Line& ln = net.lines()[l];
            const double Gij = net.G()(ln.from, ln.to);
            const double Bij = net.B()(ln.from, ln.to);
            for (int d = 0; d < 2; ++d) {
                const int tail = d == 0 ? ln.from : ln.to;
                prog.eq_rows.push_back({{{h.fp[l][d], 1.0},
                                         {h.cii[tail], Gij},
                                         {h.carc[l][d], -Gij},
                                         {h.sarc[l][d], -Bij}},
                                        0.0});
                prog.eq_rows.push_back({{{h.fq[l][d], 1.0},
                                         {h.cii[tail], -Bij},
                                         {h.carc[l][d], Bij},
                                         {h.sarc[l][d], -Gij}},
                                        0.0});
            }
        }

        // Nodal balance. The diagonal-plus-neighbors admittance term is zero
        // for a pure series network but kept for generality (bus shunts).
        for (int i = 0; i < n; ++i) {
            const Bus& bus = net.buses()[i];
            LinearRow pr, qr;
            for (int s : bus.attached_solar_ids)
                pr.terms.push_back({h.ps[s], 1.0});
            if (i == net.feeder_index()) {
                pr.terms.push_back({h.pg, 1.0});
                qr.terms.push_back({h.qg, 1.0});
            }
            for (auto [l, d] : arcs_out[i]) {
                pr.terms.push_back({h.fp[l][d], -1.0});
                qr.terms.push_back({h.fq[l][d], -1.0});
            }
            double shunt_g = net.G()(i, i), shunt_b = net.B()(i, i);
            for (int j : net.neighbors(i)) {
                shunt_g += net.G()(i, j);
                shunt_b += net.B()(i, j);
            }
            if (shunt_g != 0.0)
                pr.terms.push_back({h.cii[i], -shunt_g});
            if (shunt_b != 0.0)
                qr.terms.push_back({h.cii[i], shunt_b});
            for (int e : bus.attached_fleet_ids)
                pr.terms.push_back({h.pc[e], v_hat ? -(*v_hat)(i, t) : -1.0});
            double pd = 0.0, qd = 0.0;
            for (int dix : bus.attached_load_ids) {
                pd += sc.demand[dix].p[t];
                qd += sc.demand[dix].q[t];
            }
            pr.rhs = pd;
            qr.rhs = qd;
            prog.eq_rows.push_back(std::move(pr));
            prog.eq_rows.push_back(std::move(qr));
        }

        // Fleet energy bookkeeping, cyclic over the day. Charging adds
        // eff_charge per unit drawn; traveling removes the scheduled
        // discharge divided by eff_discharge.
        for (int e = 0; e < E; ++e) {
            const EvFleet& f = sc.fleets[e];
            LinearRow r;
            const int tp = (t + T - 1) % T;
            if (tp != t) {
                r.terms.push_back({h.en[e], 1.0});
                r.terms.push_back({hv[tp].en[e], -1.0});
            }
            const double draw = v_hat ? (*v_hat)(fleet_bus_ix[e], t) : 1.0;
            r.terms.push_back({h.pc[e], -f.eff_charge * draw});
            r.rhs = -f.travel[t] * sc.r_discharge[t] / f.eff_discharge;
            prog.eq_rows.push_back(std::move(r));
        }

        for (int l = 0; l < L; ++l) {
            const Line& ln = net.lines()[l];
            prog.soc_cones.push_back({h.cii[ln.from], h.cii[ln.to], h.carc[l][0], h.sarc[l][0]});
            prog.soc_cones.push_back({h.cii[ln.to], h.cii[ln.from], h.carc[l][1], h.sarc[l][1]});
            prog.soc_thermal.push_back({h.fp[l][0], h.fq[l][0], ln.s_max});
            prog.soc_thermal.push_back({h.fp[l][1], h.fq[l][1], ln.s_max});
        }
    }

    prog.check();
    return prog;
}

}  // namespace

ConicProgram build_fixed_power(const Network& net, const Scenario& sc) {
    return build(net, sc, nullptr);
}

ConicProgram build_fixed_current(const Network& net, const Scenario& sc,
                                 const Eigen::MatrixXd& v_hat) {
    return build(net, sc, &v_hat);
}

void symmetry_reduce(ConicProgram& prog) {
    const int n = prog.size();

    // Map each reverse-arc lifted variable onto its forward partner.
    std::map<std::pair<int, int>, int> fwd_c, fwd_s;
    for (int i = 0; i < n; ++i) {
        const VarInfo& v = prog.vars[i];
        if (v.b != 0)
            continue;
        if (v.kind == VarKind::Cij)
            fwd_c[{v.t, v.a}] = i;
        else if (v.kind == VarKind::Sij)
            fwd_s[{v.t, v.a}] = i;
    }
    std::vector<int> target(n);
    std::iota(target.begin(), target.end(), 0);
    std::vector<double> flip(n, 1.0);
    std::vector<char> drop(n, 0);
    for (int i = 0; i < n; ++i) {
        const VarInfo& v = prog.vars[i];
        if (v.b != 1 || (v.kind != VarKind::Cij && v.kind != VarKind::Sij))
            continue;
        const auto& table = v.kind == VarKind::Cij ? fwd_c : fwd_s;
        auto it = table.find({v.t, v.a});
        if (it == table.end())
            throw InputError("reverse arc " + v.name() + " has no forward partner");
        target[i] = it->second;
        flip[i] = v.kind == VarKind::Sij ? -1.0 : 1.0;
        drop[i] = 1;
    }

    // Fold bounds and costs of the eliminated variables into their targets.
    for (int i = 0; i < n; ++i) {
        if (!drop[i])
            continue;
        const int j = target[i];
        double lo = prog.lb[i], hi = prog.ub[i];
        if (flip[i] < 0.0)
            std::tie(lo, hi) = std::pair{-hi, -lo};
        prog.lb[j] = std::max(prog.lb[j], lo);
        prog.ub[j] = std::min(prog.ub[j], hi);
        if (prog.lb[j] > prog.ub[j])
            throw InputError("arc elimination left " + prog.vars[j].name() +
                             " with an empty bound interval");
        prog.objective[j] += flip[i] * prog.objective[i];
    }

    auto rewrite = [&](std::vector<LinearRow>& rows) {
        std::vector<LinearRow> out;
        out.reserve(rows.size());
        for (const LinearRow& r : rows) {
            std::map<int, double> acc;
            for (auto [i, c] : r.terms)
                acc[target[i]] += flip[i] * c;
            LinearRow nr;
            nr.rhs = r.rhs;
            for (auto [i, c] : acc)
                if (c != 0.0)
                    nr.terms.push_back({i, c});
            if (nr.terms.empty()) {
                if (r.rhs != 0.0)
                    throw InputError("arc elimination produced an unsatisfiable constant row");
                continue;
            }
            out.push_back(std::move(nr));
        }
        rows = std::move(out);
    };
    rewrite(prog.eq_rows);
    rewrite(prog.ineq_rows);

    // The mirrored voltage cone is the same constraint: the sine enters
    // squared and the diagonal difference flips sign under the swap.
    std::set<std::array<int, 4>> seen;
    std::vector<SocCone4> cones;
    for (SocCone4 k : prog.soc_cones) {
        k.cii = target[k.cii];
        k.cjj = target[k.cjj];
        k.cij = target[k.cij];
        k.sij = target[k.sij];
        std::array<int, 4> key{std::min(k.cii, k.cjj), std::max(k.cii, k.cjj), k.cij, k.sij};
        if (seen.insert(key).second)
            cones.push_back(k);
    }
    prog.soc_cones = std::move(cones);
    for (SocCone3& k : prog.soc_thermal) {
        k.p = target[k.p];
        k.q = target[k.q];
    }

    // Renumber.
    std::vector<int> newix(n, -1);
    int m = 0;
    for (int i = 0; i < n; ++i)
        if (!drop[i])
            newix[i] = m++;
    std::vector<VarInfo> vars;
    std::vector<double> lb, ub, obj;
    vars.reserve(m);
    lb.reserve(m);
    ub.reserve(m);
    obj.reserve(m);
    for (int i = 0; i < n; ++i) {
        if (drop[i])
            continue;
        vars.push_back(prog.vars[i]);
        lb.push_back(prog.lb[i]);
        ub.push_back(prog.ub[i]);
        obj.push_back(prog.objective[i]);
    }
    prog.vars = std::move(vars);
    prog.lb = std::move(lb);
    prog.ub = std::move(ub);
    prog.objective = std::move(obj);
    for (auto* rows : {&prog.eq_rows, &prog.ineq_rows})
        for (LinearRow& r : *rows)
            for (auto& [i, c] : r.terms)
                i = newix[i];
    for (SocCone4& k : prog.soc_cones) {
        k.cii = newix[k.cii];
        k.cjj = newix[k.cjj];
        k.cij = newix[k.cij];
        k.sij = newix[k.sij];
    }
    for (SocCone3& k : prog.soc_thermal) {
        k.p = newix[k.p];
        k.q = newix[k.q];
    }
    prog.check();
}

}  // namespace feederopt
