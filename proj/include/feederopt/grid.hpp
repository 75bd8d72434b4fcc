#ifndef FEEDEROPT_GRID_HPP
#define FEEDEROPT_GRID_HPP

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace feederopt {

// Buses are externally 1-based ids; internally addressed by contiguous index.
struct Bus {
    int id = 0;
    double v_min = 0.85;              // p.u.
    double v_max = 1.05;              // p.u.
    // Entity attachments, filled in by Network::with_attachments once a scenario
    // is known. Indices refer to the scenario's load/solar/fleet tables.
    std::vector<int> attached_load_ids;
    std::vector<int> attached_solar_ids;
    std::vector<int> attached_fleet_ids;
    std::vector<int> attached_grid_ids;
};

enum class ImpedanceUnits { PerUnit, Ohms };

struct LineSpec {
    int from = 0;                     // bus id
    int to = 0;                       // bus id
    double r = 0.0;
    double x = 0.0;
    std::optional<double> s_max;      // MVA (Ohms) or p.u. (PerUnit); absent -> default
    ImpedanceUnits units = ImpedanceUnits::PerUnit;
};

struct Line {
    int from = 0;                     // bus index
    int to = 0;                       // bus index
    double r = 0.0;                   // p.u.
    double x = 0.0;                   // p.u.
    double s_max = 10.0;              // p.u. thermal limit
};

struct Bases {
    double mva = 10.0;
    double kv = 12.66;
    double z_ohm() const { return kv * kv / mva; }
};

// Parent-child edge in a spanning traversal rooted at the feeder.
struct SpanningEdge {
    int parent = 0;                   // bus index
    int child = 0;                    // bus index
    int line = 0;                     // line index
    bool forward = true;              // line.from == parent
};

struct TopologyReport {
    enum class Kind { Ok, Cycle, Disconnected, Empty };
    Kind kind = Kind::Ok;
    std::string message;
    std::vector<int> buses;           // offending bus ids
    bool ok() const { return kind == Kind::Ok; }
};

class Network {
public:
    // Assembles the nodal admittance matrices. Series impedances only, no shunts:
    // Y_ii = sum over incident lines of 1/(r+jx), Y_ij = -1/(r+jx).
    // Ohm-valued lines are converted through bases (z_base = kv^2 / mva).
    static Network build_admittance(std::vector<Bus> buses, const std::vector<LineSpec>& lines,
                                    const Bases& bases, int feeder_bus_id);

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Line>& lines() const { return lines_; }
    const Bases& bases() const { return bases_; }
    const Eigen::MatrixXd& G() const { return G_; }
    const Eigen::MatrixXd& B() const { return B_; }

    int bus_count() const { return static_cast<int>(buses_.size()); }
    int line_count() const { return static_cast<int>(lines_.size()); }
    int feeder_index() const { return feeder_; }
    int feeder_id() const { return buses_[feeder_].id; }

    int index_of(int bus_id) const;               // InputError on unknown id
    const std::vector<int>& neighbors(int bus_index) const { return adj_[bus_index]; }
    // Line index joining two bus indices, -1 if none.
    int line_between(int i, int j) const;

    // Radial check: connected and |lines| == |buses| - 1 with no duplicate pair.
    TopologyReport validate_radial() const;

    // Feeder-rooted BFS spanning order. Requires a radial network; every non-root
    // bus appears exactly once as a child.
    std::vector<SpanningEdge> spanning_order() const;

    // Copy with per-bus attachment sets populated; validates entity bus ids.
    Network with_attachments(const std::vector<int>& load_buses,
                             const std::vector<int>& solar_buses,
                             const std::vector<int>& fleet_buses) const;

private:
    std::vector<Bus> buses_;
    std::vector<Line> lines_;
    Bases bases_;
    int feeder_ = 0;
    Eigen::MatrixXd G_, B_;
    std::vector<std::vector<int>> adj_;
    std::vector<std::vector<int>> adj_lines_;
};

// Reads a network document: [bases], [feeder], [buses], [lines].
Network load_network(const std::string& path);

} // namespace feederopt

#endif
