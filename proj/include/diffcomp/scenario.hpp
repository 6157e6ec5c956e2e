#pragma once

#include <string>
#include <vector>

#include "diffcomp/model.hpp"
#include "diffcomp/payoff.hpp"
#include "diffcomp/pde.hpp"
#include "diffcomp/sim.hpp"
#include "diffcomp/text_config.hpp"

namespace diffcomp::harness {

using model::DiffusionModel;

// Which comparison statement a scenario claims:
//   Driftless - both drifts vanish; diffusion dominance alone orders the
//               expectations of convex payoffs of weighted sums.
//   Drifted   - adds componentwise drift dominance; the payoff profile must
//               also be nondecreasing.
enum class TheoremKind { Driftless, Drifted };

std::string to_string(TheoremKind kind);
TheoremKind theorem_kind_from_string(const std::string& name);

struct PdeSettings {
    bool enabled = false;
    double radius = 8.0;
    int nodes = 257;
    pde::BoundaryPolicy boundary = pde::BoundaryPolicy::ExactGaussian;
};

struct MollifySettings {
    bool enabled = false;
    double epsilon = 0.0;
    double radius = 0.0;
};

struct Scenario {
    std::string name;
    TheoremKind theorem = TheoremKind::Driftless;
    int dim = 1;
    model::Vec x0;
    convex::PayoffSpec payoff; // profile as declared, before any smoothing
    DiffusionModel model_x{1, model::Vec::Zero(1),
                           model::CoefficientField::constant(1, model::Mat::Zero(1, 1)),
                           model::CoefficientField::constant(1, model::Mat::Identity(1, 1))};
    DiffusionModel model_y = model_x;
    sde::SimPlan plan;
    PdeSettings pde;
    MollifySettings mollify;
    bool has_expected_delta = false;
    double expected_delta = 0.0;
    std::string expect; // "", "holds", "indeterminate" or "violated"
};

Scenario scenario_from_config(const ConfigBlock& block, const std::string& origin);
Scenario load_scenario_file(const std::string& path);

struct SuiteSpec {
    std::string name;
    std::vector<std::string> scenario_paths; // resolved against the suite file
};

SuiteSpec load_suite_file(const std::string& path);

} // namespace diffcomp::harness
