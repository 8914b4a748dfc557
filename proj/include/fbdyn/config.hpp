#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fbdyn/factory.hpp"
#include "fbdyn/loads.hpp"
#include "fbdyn/model.hpp"
#include "fbdyn/rotation.hpp"

namespace fbdyn {

struct SimulationConfig {
    double dt = 1e-4;      // s
    double t_end = 0.0;    // s
    int n_flex_modes = 0;
    Eigen::VectorXd damping_ratios;  // empty, one (uniform) or per-mode
    int marker_ref = -1;
    int marker_p = -1;
    int marker_q = -1;
    LoadSpec loads;
    std::vector<std::pair<int, Eigen::Vector3d>> initial_displacements;  // (node, mm)
    std::vector<std::pair<int, Eigen::Vector3d>> initial_velocities;     // (node, mm/s)
    std::vector<std::pair<int, double>> initial_modal_q;                 // (mode, value)
    std::vector<std::pair<int, double>> initial_modal_qdot;
    std::vector<int> output_nodes;
    std::uint64_t seed = 0;

    // Throws ValidationError naming the offending field.
    void validate(const StructuralModel& model) const;

    MarkerTriad marker_triad(const StructuralModel& model) const;
    // Nodal initial state assembled from the nodal and modal entries.
    std::pair<Eigen::VectorXd, Eigen::VectorXd> initial_state(const StructuralModel& model,
                                                              const ModalBasis& basis) const;
};

// Explicit rigid-body properties, overriding derivation from the model.
struct RigidPropsSpec {
    double mass = 0.0;
    Eigen::Vector3d inertia = Eigen::Vector3d::Zero();  // principal, material axes
    Eigen::Vector3d com = Eigen::Vector3d::Zero();
};

// A parsed scenario file: a model source plus the simulation setup.
struct Scenario {
    std::optional<std::string> model_file;
    std::optional<LumpedGridRecipe> grid;
    std::optional<DumbbellRecipe> dumbbell;
    std::optional<PointSetRecipe> points;
    SimulationConfig sim;
    std::optional<RigidPropsSpec> rigid;

    bool has_model() const {
        return model_file || grid || dumbbell || points;
    }
};

Scenario parse_scenario_file(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& origin);

// Builds the structural model named by the scenario's [model] section.
StructuralModel build_scenario_model(const Scenario& scenario);

// Compact recipe syntax for the CLI, e.g.
//   "dumbbell:length=400,stiffness=1e4" or "plate-surrogate:stiffness=200".
Scenario recipe_from_string(const std::string& text);

}  // namespace fbdyn
