#include "diffcomp/gauss.hpp"

#include "diffcomp/errors.hpp"

namespace diffcomp {

double normal_expectation(const std::function<double(double)>& f, double mean, double var,
                          int nodes) {
    if (var < 0.0) throw SpecError("normal_expectation called with negative variance");
    if (var == 0.0) return f(mean);
    if (nodes < 16) throw SpecError("normal_expectation needs at least 16 nodes");

    const double sd = std::sqrt(var);
    const double lo = mean - 8.0 * sd;
    const double hi = mean + 8.0 * sd;
    const double h = (hi - lo) / (nodes - 1);

    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double z = lo + h * i;
        const double w = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
        acc += w * f(z) * norm_pdf((z - mean) / sd);
    }
    return acc * h / sd;
}

} // namespace diffcomp
