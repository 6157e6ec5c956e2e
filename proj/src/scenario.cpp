#include "diffcomp/scenario.hpp"

#include <filesystem>

#include "diffcomp/errors.hpp"
#include "diffcomp/scalar_function.hpp"

namespace diffcomp::harness {

std::string to_string(TheoremKind kind) {
    return kind == TheoremKind::Driftless ? "driftless" : "drifted";
}

TheoremKind theorem_kind_from_string(const std::string& name) {
    if (name == "driftless") return TheoremKind::Driftless;
    if (name == "drifted") return TheoremKind::Drifted;
    throw SpecError("unknown theorem kind '" + name + "' (use driftless or drifted)");
}

namespace {

using model::CoefficientField;
using model::Mat;
using model::Vec;

Vec to_vec(const std::vector<double>& v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

CoefficientField field_from_config(const ConfigBlock& block, const std::string& origin,
                                   int dim, int rows, int cols) {
    const std::string kind_name = require_string(block, "kind", origin);
    const model::FieldKind kind = model::field_kind_from_string(kind_name);
    std::vector<double> params;
    if (const ConfigValue* v = find_key(block, "values"))
        params = v->list;
    else if (const ConfigValue* v2 = find_key(block, "params"))
        params = v2->list;
    else
        throw SpecError(origin + ": coefficient block needs 'values' or 'params'");
    return CoefficientField::from_params(kind, dim, rows, cols, params);
}

DiffusionModel model_from_config(const ConfigBlock& block, const std::string& origin, int dim,
                                 const Vec& x0) {
    const ConfigBlock& drift = require_block(block, "drift", origin);
    const ConfigBlock& disp = require_block(block, "dispersion", origin);
    return DiffusionModel(dim, x0, field_from_config(drift, origin + " drift", dim, dim, 1),
                          field_from_config(disp, origin + " dispersion", dim, dim, dim));
}

} // namespace

Scenario scenario_from_config(const ConfigBlock& block, const std::string& origin) {
    Scenario s;
    s.name = require_string(block, "name", origin);
    s.theorem = theorem_kind_from_string(require_string(block, "theorem", origin));
    s.dim = static_cast<int>(require_number(block, "dim", origin));
    if (s.dim < 1 || s.dim > 32) throw SpecError(origin + ": dim out of range");
    s.x0 = to_vec(require_list(block, "x0", origin));
    if (s.x0.size() != s.dim) throw SpecError(origin + ": x0 length must equal dim");

    const ConfigBlock& pay = require_block(block, "payoff", origin);
    const std::string fname = require_string(pay, "kind", origin + " payoff");
    std::vector<double> fparams;
    if (const ConfigValue* v = find_key(pay, "params")) fparams = v->list;
    convex::ScalarFunction f(convex::function_kind_from_string(fname), fparams);
    const Vec weights = to_vec(require_list(pay, "weights", origin + " payoff"));
    if (weights.size() != s.dim)
        throw SpecError(origin + ": payoff weights length must equal dim");
    const bool declared_convex = get_bool(pay, "convex", false);
    const bool declared_nondecreasing = get_bool(pay, "nondecreasing", false);
    std::vector<double> growth = {1.0, 1.0};
    if (const ConfigValue* v = find_key(pay, "growth")) growth = v->list;
    if (growth.size() != 2) throw SpecError(origin + ": payoff growth must be [a, b]");
    s.payoff = convex::PayoffSpec(weights, f, declared_convex, declared_nondecreasing, growth[0],
                                  growth[1]);

    s.model_x = model_from_config(require_block(block, "model_x", origin), origin + " model_x",
                                  s.dim, s.x0);
    s.model_y = model_from_config(require_block(block, "model_y", origin), origin + " model_y",
                                  s.dim, s.x0);

    const ConfigBlock& plan = require_block(block, "plan", origin);
    s.plan.horizon = require_number(plan, "horizon", origin + " plan");
    s.plan.steps = static_cast<int>(require_number(plan, "steps", origin + " plan"));
    s.plan.paths = static_cast<std::int64_t>(require_number(plan, "paths", origin + " plan"));
    s.plan.seed = static_cast<std::uint64_t>(get_number(plan, "seed", 1.0));

    if (const ConfigValue* v = find_key(block, "pde")) {
        if (v->kind != ConfigValue::Kind::Block)
            throw SpecError(origin + ": 'pde' must be a block");
        s.pde.enabled = get_bool(v->block, "enabled", true);
        s.pde.radius = get_number(v->block, "radius", 8.0);
        s.pde.nodes = static_cast<int>(get_number(v->block, "nodes", 257.0));
        const std::string boundary = get_string(v->block, "boundary", "exact-gaussian");
        if (boundary == "exact-gaussian")
            s.pde.boundary = pde::BoundaryPolicy::ExactGaussian;
        else if (boundary == "frozen")
            s.pde.boundary = pde::BoundaryPolicy::FrozenData;
        else
            throw SpecError(origin + ": pde boundary must be exact-gaussian or frozen");
    }

    if (const ConfigValue* v = find_key(block, "mollify")) {
        if (v->kind != ConfigValue::Kind::Block)
            throw SpecError(origin + ": 'mollify' must be a block");
        s.mollify.enabled = true;
        s.mollify.epsilon = require_number(v->block, "epsilon", origin + " mollify");
        s.mollify.radius = require_number(v->block, "radius", origin + " mollify");
    }

    if (const ConfigValue* v = find_key(block, "expected_delta")) {
        (void)v;
        s.has_expected_delta = true;
        s.expected_delta = require_number(block, "expected_delta", origin);
    }
    s.expect = get_string(block, "expect", "");
    if (!s.expect.empty() && s.expect != "holds" && s.expect != "indeterminate" &&
        s.expect != "violated")
        throw SpecError(origin + ": expect must be holds, indeterminate or violated");
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    return scenario_from_config(parse_config_file(path), path);
}

SuiteSpec load_suite_file(const std::string& path) {
    const ConfigBlock block = parse_config_file(path);
    SuiteSpec suite;
    suite.name = get_string(block, "name", std::filesystem::path(path).stem().string());
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    for (const auto& [key, value] : block) {
        if (key != "scenario") continue;
        if (value.kind != ConfigValue::Kind::Scalar)
            throw SpecError(path + ": 'scenario' entries must be file names");
        std::filesystem::path p(value.scalar);
        if (p.is_relative()) p = base / p;
        suite.scenario_paths.push_back(p.string());
    }
    if (suite.scenario_paths.empty())
        throw SpecError(path + ": suite lists no scenarios");
    return suite;
}

} // namespace diffcomp::harness
