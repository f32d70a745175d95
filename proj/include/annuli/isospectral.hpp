#pragma once

#include <vector>

#include "annuli/loop_algebra.hpp"

namespace annuli {

using FlowParameter = std::vector<cplx>;  // t_0 .. t_{g-1}

// X = su + plus with su(l) skew-hermitian on |l| = 1 (X_k = -X_{-k}^*) and plus
// polynomial in l whose l^0 block is upper triangular with real diagonal
struct SplitLoop {
    Laurent su;
    Laurent plus;
};

SplitLoop lie_split(const Laurent& x);

// [ (sum l^-i t_i xi)^+, xi ] in the window -1..g. Throws std::runtime_error if the
// terms outside the window exceed tol (relative to |t| |xi|^2).
MatrixLaurent flow_field(const MatrixLaurent& xi, const FlowParameter& t, double* residual = nullptr,
                         double tol = 1e-10);

struct FlowResult {
    MatrixLaurent xi;
    double max_correction = 0.0;  // reality re-imposed after each step
    double max_residual = 0.0;    // window truncation
};

// RK4 of d xi/ds = flow_field(xi, t) on s in [0, 1]
FlowResult flow(const MatrixLaurent& xi, const FlowParameter& t, int steps = 200);

// |flow(xi, t) - xi|
double stabilizer_defect(const MatrixLaurent& xi, const FlowParameter& t, int steps = 200);

// real rank of t in C^g = R^{2g} -> flow_field(xi, t), and the largest field over
// the slice t_{g-1-i} = conj(t_i)
struct FieldRank {
    int rank = 0;
    std::vector<double> singular_values;
    double slice_field = 0.0;
};
FieldRank field_rank(const MatrixLaurent& xi, double rel_tol = 1e-8);

}  // namespace annuli
