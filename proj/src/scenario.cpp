#include "feederopt/scenario.hpp"

#include "feederopt/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace feederopt {

namespace {

void check_series(const std::string& name, const std::vector<double>& v, int horizon,
                  double lo, double hi, const std::string& src) {
    if (static_cast<int>(v.size()) != horizon)
        throw InputError(src + ": series '" + name + "' has " + std::to_string(v.size()) +
                         " entries, expected " + std::to_string(horizon));
    for (int t = 0; t < horizon; ++t) {
        if (!std::isfinite(v[t]))
            throw InputError(src + ": series '" + name + "' entry " + std::to_string(t + 1) +
                             " is not finite");
        if (v[t] < lo || v[t] > hi)
            throw InputError(src + ": series '" + name + "' entry " + std::to_string(t + 1) +
                             " = " + fmt6(v[t]) + " outside [" + fmt6(lo) + ", " + fmt6(hi) + "]");
    }
}

}  // namespace

void Scenario::validate() const {
    const std::string src = "scenario";
    if (horizon < 1)
        throw InputError(src + ": horizon must be at least 1");
    const double big = 1e12;
    check_series("price", tou_price, horizon, 0.0, big, src);
    check_series("solar", solar_availability, horizon, 0.0, big, src);
    check_series("r_charge", r_charge, horizon, 0.0, 1.0, src);
    check_series("r_discharge", r_discharge, horizon, 0.0, 1.0, src);
    check_series("travel", travel_profile, horizon, 0.0, big, src);
    for (const auto& d : demand) {
        check_series("load_p[bus " + std::to_string(d.bus) + "]", d.p, horizon, -big, big, src);
        check_series("load_q[bus " + std::to_string(d.bus) + "]", d.q, horizon, -big, big, src);
    }
    for (const auto& s : solar) {
        if (s.capacity < 0.0)
            throw InputError(src + ": field 'capacity' of solar unit at bus " +
                             std::to_string(s.bus) + " is negative");
    }
    for (const auto& f : fleets) {
        const std::string who = " of fleet at bus " + std::to_string(f.bus);
        if (f.e_min < 0.0 || f.e_min >= f.e_max)
            throw InputError(src + ": fields 'e_min'/'e_max'" + who +
                             " must satisfy 0 <= e_min < e_max");
        if (f.p_charge_max < 0.0)
            throw InputError(src + ": field 'p_charge_max'" + who + " is negative");
        if (f.eff_charge <= 0.0 || f.eff_charge > 1.0)
            throw InputError(src + ": field 'eff_charge'" + who + " outside (0, 1]");
        if (f.eff_discharge <= 0.0 || f.eff_discharge > 1.0)
            throw InputError(src + ": field 'eff_discharge'" + who + " outside (0, 1]");
        if (f.e_init_fraction < 0.0 || f.e_init_fraction > 1.0)
            throw InputError(src + ": field 'e_init_fraction'" + who + " outside [0, 1]");
        check_series("travel[bus " + std::to_string(f.bus) + "]", f.travel, horizon, 0.0, big,
                     src);
    }
}

Scenario load_scenario(const TextDocument& doc) {
    Scenario sc;

    if (doc.has("scenario")) {
        const TextSection& head = doc.at("scenario");
        auto it = head.keyed.find("hours");
        if (it != head.keyed.end())
            sc.horizon = to_int(doc, it->second, 0, "hours");
        it = head.keyed.find("mva");
        if (it != head.keyed.end())
            sc.base_mva = to_double(doc, it->second, 0, "mva");
    }
    if (sc.horizon < 1)
        throw InputError(doc.source + ": field 'hours' must be at least 1");
    if (sc.base_mva <= 0.0)
        throw InputError(doc.source + ": field 'mva' must be positive");

    const TextSection& series = doc.at("series");
    auto get_series = [&](const std::string& key) {
        auto it = series.keyed.find(key);
        if (it == series.keyed.end())
            throw InputError(doc.source + ": [series] is missing '" + key + "'");
        return to_double_vector(doc, it->second, key);
    };
    sc.tou_price = get_series("price");
    std::vector<double> load_p = get_series("load_p");
    std::vector<double> load_q = get_series("load_q");
    sc.solar_availability = get_series("solar");
    sc.r_charge = get_series("r_charge");
    sc.r_discharge = get_series("r_discharge");
    sc.travel_profile = get_series("travel");

    if (static_cast<int>(load_p.size()) != sc.horizon ||
        static_cast<int>(load_q.size()) != sc.horizon)
        throw InputError(doc.source + ": series 'load_p'/'load_q' must have " +
                         std::to_string(sc.horizon) + " entries");

    if (doc.has("loads")) {
        for (const TextRow& row : doc.at("loads").rows) {
            if (row.fields.size() != 3)
                throw InputError(doc.source + ":" + std::to_string(row.line) +
                                 ": [loads] rows need 'bus p_mw q_mvar'");
            LoadDemand d;
            d.bus = to_int(doc, row, 0, "bus");
            d.p_nominal = to_double(doc, row, 1, "p_mw") / sc.base_mva;
            d.q_nominal = to_double(doc, row, 2, "q_mvar") / sc.base_mva;
            d.p.resize(sc.horizon);
            d.q.resize(sc.horizon);
            for (int t = 0; t < sc.horizon; ++t) {
                d.p[t] = load_p[t] * d.p_nominal;
                d.q[t] = load_q[t] * d.q_nominal;
            }
            sc.demand.push_back(std::move(d));
        }
    }

    if (doc.has("solar_units")) {
        for (const TextRow& row : doc.at("solar_units").rows) {
            if (row.fields.size() != 2)
                throw InputError(doc.source + ":" + std::to_string(row.line) +
                                 ": [solar_units] rows need 'bus capacity_mw'");
            SolarUnit s;
            s.bus = to_int(doc, row, 0, "bus");
            s.capacity = to_double(doc, row, 1, "capacity_mw") / sc.base_mva;
            sc.solar.push_back(s);
        }
    }

    if (doc.has("fleets")) {
        for (const TextRow& row : doc.at("fleets").rows) {
            if (row.fields.size() != 8)
                throw InputError(
                    doc.source + ":" + std::to_string(row.line) +
                    ": [fleets] rows need 'bus cap_mw e_min_mwh e_max_mwh travel_mw "
                    "eff_charge eff_discharge e_init_fraction'");
            EvFleet f;
            f.bus = to_int(doc, row, 0, "bus");
            f.p_charge_max = to_double(doc, row, 1, "cap_mw") / sc.base_mva;
            f.e_min = to_double(doc, row, 2, "e_min_mwh") / sc.base_mva;
            f.e_max = to_double(doc, row, 3, "e_max_mwh") / sc.base_mva;
            double travel_mw = to_double(doc, row, 4, "travel_mw");
            f.eff_charge = to_double(doc, row, 5, "eff_charge");
            f.eff_discharge = to_double(doc, row, 6, "eff_discharge");
            f.e_init_fraction = to_double(doc, row, 7, "e_init_fraction");
            f.travel.resize(sc.horizon);
            for (int t = 0; t < sc.horizon; ++t)
                f.travel[t] = travel_mw * sc.travel_profile[t] / sc.base_mva;
            sc.fleets.push_back(std::move(f));
        }
    }

    sc.validate();
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    return load_scenario(parse_text_document(path));
}

std::vector<EvFleet> scale_penetration(const std::vector<EvFleet>& fleets, double level) {
    if (level < 0.0)
        throw InputError("penetration level must be non-negative, got " + fmt6(level));
    std::vector<EvFleet> out = fleets;
    for (EvFleet& f : out) {
        f.p_charge_max *= level;
        f.e_min *= level;
        f.e_max *= level;
        for (double& x : f.travel)
            x *= level;
    }
    return out;
}

std::vector<double> tou_price_series(int k, double mean_price) {
    if (k < 1 || k > 4)
        throw InputError("tou layout index must be in 1..4, got " + std::to_string(k));
    std::vector<double> p(24, mean_price);
    if (k == 1)
        return p;
    // Three equal-mean tiers at 0.5x / 1.0x / 1.5x. Windows are 1-based hour
    // labels; cheap and peak windows have equal length so the daily mean
    // stays at mean_price exactly.
    auto set_range = [&](int lo, int hi, double v) {
        for (int h = lo; h <= hi; ++h)
            p[h - 1] = v;
    };
    const double cheap = 0.5 * mean_price;
    const double peak = 1.5 * mean_price;
    if (k == 2) {
        set_range(1, 6, cheap);
        set_range(12, 13, cheap);
        set_range(17, 24, peak);
    } else if (k == 3) {
        set_range(1, 7, cheap);
        set_range(18, 24, peak);
    } else {
        set_range(10, 15, cheap);
        set_range(19, 24, peak);
    }
    return p;
}

std::vector<std::vector<double>> tou_scenarios() {
    std::vector<std::vector<double>> out;
    out.reserve(4);
    for (int k = 1; k <= 4; ++k)
        out.push_back(tou_price_series(k, 50.0));
    return out;
}

Scenario with_tou(Scenario sc, int k) {
    if (sc.horizon != 24)
        throw InputError("tou overlays need a 24-step horizon, scenario has " +
                         std::to_string(sc.horizon));
    double mean = std::accumulate(sc.tou_price.begin(), sc.tou_price.end(), 0.0) / 24.0;
    sc.tou_price = tou_price_series(k, mean);
    sc.validate();
    return sc;
}

}  // namespace feederopt
