#pragma once

#include "feederopt/conic_program.hpp"
#include "feederopt/grid.hpp"
#include "feederopt/scenario.hpp"

#include <Eigen/Dense>

namespace feederopt {

// Assembles the day-long dispatch program with EV chargers drawing constant
// power. Variables are built per hour: feeder P/Q, solar outputs, fleet
// charge power and stored energy, squared bus voltages, and one lifted
// cosine/sine pair plus a P/Q flow pair per directed line arc. Rows couple
// them through flow definitions, nodal balance, and the cyclic fleet energy
// recursion; rotated-norm cones tie the lifted pairs to the voltages and
// thermal cones cap each arc's apparent power. The objective prices feeder
// energy at the scenario tariff. Fleets scaled down to nothing (zero charge
// cap and zero capacity) are left out entirely.
ConicProgram build_fixed_power(const Network& net, const Scenario& sc);

// Same rows with each fleet drawing a controlled current magnitude instead.
// Charger power at the bus is V*I; the builder freezes V at v_hat(bus, hour)
// so the program stays conic. Pair with a fixed-point loop that refreshes
// v_hat from the recovered voltages.
ConicProgram build_fixed_current(const Network& net, const Scenario& sc,
                                 const Eigen::MatrixXd& v_hat);

// Eliminates each reverse arc's lifted pair through c_rev = c_fwd and
// s_rev = -s_fwd, drops rows made vacuous by the substitution, removes the
// mirrored duplicate of each voltage cone, and renumbers the survivors.
// Flow variables keep both directions; sending-end flows differ by the line
// loss, so there is nothing to merge there.
void symmetry_reduce(ConicProgram& prog);

}  // namespace feederopt
