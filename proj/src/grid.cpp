#include "feederopt/grid.hpp"

#include "feederopt/common.hpp"
#include "feederopt/text_data.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace feederopt {

Network Network::build_admittance(std::vector<Bus> buses, const std::vector<LineSpec>& lines,
                                  const Bases& bases, int feeder_bus_id) {
    Network net;
    if (buses.empty())
        throw InputError("network has no buses");
    if (bases.mva <= 0.0 || bases.kv <= 0.0)
        throw InputError("bases must be positive (mva=" + fmt6(bases.mva) +
                         ", kv=" + fmt6(bases.kv) + ")");
    net.bases_ = bases;

    std::map<int, int> index;
    for (size_t k = 0; k < buses.size(); ++k) {
        const Bus& b = buses[k];
        if (index.count(b.id))
            throw InputError("duplicate bus id " + std::to_string(b.id));
        if (!(b.v_min > 0.0) || !(b.v_max > b.v_min))
            throw InputError("bus " + std::to_string(b.id) + ": need 0 < v_min < v_max, got [" +
                             fmt6(b.v_min) + ", " + fmt6(b.v_max) + "]");
        index[b.id] = static_cast<int>(k);
    }
    net.buses_ = std::move(buses);

    auto fit = index.find(feeder_bus_id);
    if (fit == index.end())
        throw InputError("feeder bus " + std::to_string(feeder_bus_id) + " is not in the bus table");
    net.feeder_ = fit->second;
    net.buses_[net.feeder_].attached_grid_ids = {0};

    const int n = static_cast<int>(net.buses_.size());
    net.G_ = Eigen::MatrixXd::Zero(n, n);
    net.B_ = Eigen::MatrixXd::Zero(n, n);
    net.adj_.assign(n, {});
    net.adj_lines_.assign(n, {});

    const double z_base = bases.z_ohm();
    std::set<std::pair<int, int>> seen;
    for (const LineSpec& ls : lines) {
        auto f = index.find(ls.from);
        auto t = index.find(ls.to);
        if (f == index.end() || t == index.end())
            throw InputError("line " + std::to_string(ls.from) + "-" + std::to_string(ls.to) +
                             " references an unknown bus");
        if (ls.from == ls.to)
            throw InputError("line " + std::to_string(ls.from) + "-" + std::to_string(ls.to) +
                             " is a self-loop");
        double r = ls.r, x = ls.x;
        double s_max = ls.s_max.value_or(0.0);
        if (ls.units == ImpedanceUnits::Ohms) {
            r /= z_base;
            x /= z_base;
            if (ls.s_max)
                s_max = *ls.s_max / bases.mva;
        }
        if (r < 0.0 || x < 0.0 || (r == 0.0 && x == 0.0))
            throw InputError("line " + std::to_string(ls.from) + "-" + std::to_string(ls.to) +
                             ": impedance must be nonnegative and nonzero");
        auto key = std::minmax(f->second, t->second);
        if (!seen.insert(key).second)
            throw InputError("duplicate line between buses " + std::to_string(ls.from) +
                             " and " + std::to_string(ls.to));

        Line line;
        line.from = f->second;
        line.to = t->second;
        line.r = r;
        line.x = x;
        line.s_max = ls.s_max ? s_max : 10.0;
        int li = static_cast<int>(net.lines_.size());
        net.lines_.push_back(line);

        // y = 1/(r+jx) = (r - jx)/(r^2+x^2)
        const double d = r * r + x * x;
        const double g = r / d;
        const double b = -x / d;
        net.G_(line.from, line.from) += g;
        net.G_(line.to, line.to) += g;
        net.G_(line.from, line.to) -= g;
        net.G_(line.to, line.from) -= g;
        net.B_(line.from, line.from) += b;
        net.B_(line.to, line.to) += b;
        net.B_(line.from, line.to) -= b;
        net.B_(line.to, line.from) -= b;

        net.adj_[line.from].push_back(line.to);
        net.adj_[line.to].push_back(line.from);
        net.adj_lines_[line.from].push_back(li);
        net.adj_lines_[line.to].push_back(li);
    }
    return net;
}

int Network::index_of(int bus_id) const {
    for (size_t k = 0; k < buses_.size(); ++k)
        if (buses_[k].id == bus_id)
            return static_cast<int>(k);
    throw InputError("unknown bus id " + std::to_string(bus_id));
}

int Network::line_between(int i, int j) const {
    for (int li : adj_lines_[i]) {
        const Line& l = lines_[li];
        if ((l.from == i && l.to == j) || (l.from == j && l.to == i))
            return li;
    }
    return -1;
}

TopologyReport Network::validate_radial() const {
    TopologyReport rep;
    const int n = bus_count();
    if (n == 0) {
        rep.kind = TopologyReport::Kind::Empty;
        rep.message = "network has no buses";
        return rep;
    }
    // BFS from the feeder; a revisit through a distinct line is a cycle.
    std::vector<int> parent_line(n, -2);
    parent_line[feeder_] = -1;
    std::queue<int> q;
    q.push(feeder_);
    int reached = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (size_t k = 0; k < adj_[u].size(); ++k) {
            int v = adj_[u][k];
            int li = adj_lines_[u][k];
            if (li == parent_line[u])
                continue;
            if (parent_line[v] != -2) {
                rep.kind = TopologyReport::Kind::Cycle;
                rep.buses = {buses_[u].id, buses_[v].id};
                rep.message = "cycle detected through buses " + std::to_string(buses_[u].id) +
                              " and " + std::to_string(buses_[v].id);
                return rep;
            }
            parent_line[v] = li;
            ++reached;
            q.push(v);
        }
    }
    if (reached != n) {
        rep.kind = TopologyReport::Kind::Disconnected;
        for (int k = 0; k < n; ++k)
            if (parent_line[k] == -2)
                rep.buses.push_back(buses_[k].id);
        std::string list;
        for (size_t k = 0; k < rep.buses.size() && k < 8; ++k)
            list += (k ? ", " : "") + std::to_string(rep.buses[k]);
        rep.message = "buses unreachable from the feeder: " + list +
                      (rep.buses.size() > 8 ? ", ..." : "");
        return rep;
    }
    if (line_count() != n - 1) {
        // connected with extra lines means a cycle exists (caught above),
        // so this is only reachable with parallel feeders filtered earlier.
        rep.kind = TopologyReport::Kind::Cycle;
        rep.message = "line count " + std::to_string(line_count()) +
                      " does not match radial requirement " + std::to_string(n - 1);
        return rep;
    }
    return rep;
}

std::vector<SpanningEdge> Network::spanning_order() const {
    TopologyReport rep = validate_radial();
    if (!rep.ok())
        throw InputError("spanning order requires a radial network: " + rep.message);
    std::vector<SpanningEdge> order;
    order.reserve(bus_count() - 1);
    std::vector<char> visited(bus_count(), 0);
    visited[feeder_] = 1;
    std::queue<int> q;
    q.push(feeder_);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (size_t k = 0; k < adj_[u].size(); ++k) {
            int v = adj_[u][k];
            if (visited[v])
                continue;
            visited[v] = 1;
            SpanningEdge e;
            e.parent = u;
            e.child = v;
            e.line = adj_lines_[u][k];
            e.forward = (lines_[e.line].from == u);
            order.push_back(e);
            q.push(v);
        }
    }
    return order;
}

Network Network::with_attachments(const std::vector<int>& load_buses,
                                  const std::vector<int>& solar_buses,
                                  const std::vector<int>& fleet_buses) const {
    Network out = *this;
    auto attach = [&](const std::vector<int>& buses, auto member, const char* what) {
        for (size_t e = 0; e < buses.size(); ++e) {
            int idx = -1;
            for (int k = 0; k < out.bus_count(); ++k)
                if (out.buses_[k].id == buses[e]) {
                    idx = k;
                    break;
                }
            if (idx < 0)
                throw InputError(std::string(what) + " " + std::to_string(e) +
                                 " references unknown bus " + std::to_string(buses[e]));
            (out.buses_[idx].*member).push_back(static_cast<int>(e));
        }
    };
    attach(load_buses, &Bus::attached_load_ids, "load");
    attach(solar_buses, &Bus::attached_solar_ids, "solar unit");
    attach(fleet_buses, &Bus::attached_fleet_ids, "fleet");
    return out;
}

Network load_network(const std::string& path) {
    TextDocument doc = parse_text_document(path);

    const TextSection& bases_sec = doc.at("bases");
    Bases bases;
    auto need_key = [&](const TextSection& sec, const std::string& key) -> const TextRow& {
        auto it = sec.keyed.find(key);
        if (it == sec.keyed.end())
            throw InputError(doc.source + ": missing '" + key + " = ...' entry");
        return it->second;
    };
    bases.mva = to_double(doc, need_key(bases_sec, "mva"), 0, "mva");
    bases.kv = to_double(doc, need_key(bases_sec, "kv"), 0, "kv");

    int feeder_id = to_int(doc, need_key(doc.at("feeder"), "bus"), 0, "feeder bus");

    std::vector<Bus> buses;
    for (const TextRow& row : doc.at("buses").rows) {
        Bus b;
        b.id = to_int(doc, row, 0, "bus id");
        b.v_min = to_double(doc, row, 1, "v_min");
        b.v_max = to_double(doc, row, 2, "v_max");
        buses.push_back(b);
    }

    const TextSection& lines_sec = doc.at("lines");
    ImpedanceUnits units = ImpedanceUnits::Ohms;
    if (auto it = lines_sec.keyed.find("units"); it != lines_sec.keyed.end()) {
        const std::string& u = it->second.fields.at(0);
        if (u == "pu")
            units = ImpedanceUnits::PerUnit;
        else if (u != "ohm")
            throw InputError(doc.source + ":" + std::to_string(it->second.line) +
                             ": line units must be 'ohm' or 'pu', got '" + u + "'");
    }
    std::vector<LineSpec> lines;
    for (const TextRow& row : lines_sec.rows) {
        LineSpec ls;
        ls.from = to_int(doc, row, 0, "from bus");
        ls.to = to_int(doc, row, 1, "to bus");
        ls.r = to_double(doc, row, 2, "r");
        ls.x = to_double(doc, row, 3, "x");
        if (row.fields.size() > 4)
            ls.s_max = to_double(doc, row, 4, "s_max");
        ls.units = units;
        lines.push_back(ls);
    }

    return Network::build_admittance(std::move(buses), lines, bases, feeder_id);
}

} // namespace feederopt
