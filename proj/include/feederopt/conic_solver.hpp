#pragma once

#include "feederopt/conic_program.hpp"

#include <string>
#include <vector>

namespace feederopt {

enum class SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterLimit,
    NumericalTrouble,
};

const char* solve_status_name(SolveStatus s);

struct SolveOptions {
    double tol = 1e-8;   // feasibility and relative-gap target
    int max_iter = 100;
    bool verbose = false;  // one progress line per iteration on stderr
};

struct SolveInfo {
    int iterations = 0;
    double pres = 0.0, dres = 0.0, relgap = 0.0;
    double pcost = 0.0, dcost = 0.0;
};

struct ConicSolution {
    SolveStatus status = SolveStatus::NumericalTrouble;
    std::vector<double> x;  // one value per program variable
    double objective = 0.0;
    SolveInfo info;
    bool ok() const { return status == SolveStatus::Optimal; }
};

// Interior-point solve of the program over its nonnegative/second-order
// cones via a homogeneous self-dual embedding, so primal or dual
// infeasibility comes back as a status instead of a diverging iterate.
// Throws NumericalError only when linear algebra itself breaks down.
ConicSolution solve_conic(const ConicProgram& prog, const SolveOptions& opt = {});

}  // namespace feederopt
