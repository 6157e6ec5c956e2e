#pragma once

#include <string>
#include <vector>

#include "diffcomp/model.hpp"
#include "diffcomp/payoff.hpp"

namespace diffcomp::pde {

using model::DiffusionModel;
using Vec = Eigen::VectorXd;

// Uniform axis-aligned grid on [-radius, radius]^dim (dim is 1 or 2), odd
// node counts keep the origin on the grid. time_steps is a lower bound; the
// solver raises it to satisfy the explicit stability constraint.
struct GridSpec {
    int dim = 1;
    double radius = 8.0;
    int nodes_per_axis = 257;
    int time_steps = 0;
    double horizon = 1.0;
};

// How boundary nodes evolve while marching backward from the horizon:
//   ExactGaussian - closed-form (or quadrature) conditional expectation of
//                   the payoff under the model, valid for constant
//                   coefficients; exact compensation for the truncated box.
//   FrozenData    - boundary keeps its terminal payoff values; cheap and
//                   model-free, accurate when the box is generously sized.
enum class BoundaryPolicy { ExactGaussian, FrozenData };

// Backward-in-time value function E[f(<c, X_T>) | X_t = x] restricted to the
// grid; `values` holds the t = 0 slice, x1 fastest.
struct ValueField {
    GridSpec grid;
    std::vector<double> values;
    double dt_used = 0.0;
    int steps_taken = 0;

    double node_coord(int index) const; // axis coordinate of a node index
    double at(int i) const { return values[static_cast<std::size_t>(i)]; }
    double at(int i, int j) const {
        return values[static_cast<std::size_t>(i) +
                      static_cast<std::size_t>(grid.nodes_per_axis) * j];
    }
};

// Explicit central-difference march of the backward equation
//   du/dt + tr(A(x) D^2 u) + b(x) . grad u = 0,  A = sigma sigma^T / 2,
// from u(T, .) = f(<c, .>) down to t = 0. Throws SpecError when the grid or
// boundary policy cannot support the model (ExactGaussian needs constant
// coefficients; in two dimensions it also needs a payoff family with a
// closed-form Gaussian expectation).
ValueField solve_backward(const DiffusionModel& model, const convex::PayoffSpec& payoff,
                          const GridSpec& grid, BoundaryPolicy policy, int threads = 0);

// Multilinear interpolation of the t = 0 slice at an interior point.
double probe_value(const ValueField& field, const Vec& point);

// Shape diagnostics of the solved field over the core box |x_i| <= core
// (defaults to half the grid radius), by central differences:
//   min_second_diff - smallest per-axis second difference
//   min_hessian_eig - smallest eigenvalue of the difference Hessian
//                     (equals min_second_diff in one dimension)
//   min_trace       - smallest difference Laplacian
//   min_gradient    - smallest per-axis first difference
struct PropagationReport {
    int dim = 1;
    double core_radius = 0.0;
    double min_second_diff = 0.0;
    double min_hessian_eig = 0.0;
    double min_trace = 0.0;
    double min_gradient = 0.0;
};

PropagationReport propagation_report(const ValueField& field, double core_radius = 0.0);

// Node-wise gap field u_y - u_x for two fields on the same grid, and its
// minimum over the core box.
struct DeltaField {
    GridSpec grid;
    std::vector<double> values;
    double core_min = 0.0;
};

DeltaField delta_field(const ValueField& field_x, const ValueField& field_y,
                       double core_radius = 0.0);

// Writes "x,value" (or "x,y,value") rows with a header line.
void dump_csv(const ValueField& field, const std::string& path);

} // namespace diffcomp::pde
