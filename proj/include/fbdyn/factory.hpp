#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fbdyn/model.hpp"

namespace fbdyn {

struct SpringSpec {
    int node_i = 0;
    int node_j = 0;
    double stiffness = 0.0;  // N/mm, axial
};

// Explicit lumped-parameter model: point masses joined by axial springs.
// Deliberately unvalidated beyond basic sanity so degenerate sub-problems
// (two collinear masses, a single mass) can be built for analysis.
struct PointSetRecipe {
    std::vector<Eigen::Vector3d> nodes;  // mm
    std::vector<double> masses;          // Mg
    std::vector<SpringSpec> springs;
    std::string name = "point-set";
};

// Three lumped masses on an isosceles triangle in the X1-X2 plane with a
// complete spring graph; stiff springs make it a near-rigid test body.
struct DumbbellRecipe {
    double length = 400.0;      // mm, base between the two end masses
    double height = 150.0;      // mm, apex offset
    double end_mass = 3e-4;     // Mg
    double apex_mass = 2e-4;    // Mg
    double stiffness = 1e4;     // N/mm
    std::string name = "dumbbell";
};

// Regular nx x ny x nz grid of lumped masses spanning lx x ly x lz,
// centered at the origin in X1/X2 and with X3 in [0, lz]. Every node pair
// within one cell diagonal is joined by an axial spring, which braces the
// grid into a free-free truss. Attached masses are added at the listed
// nodes; total_mass fixes the sum over all nodes.
struct LumpedGridRecipe {
    int nx = 2, ny = 2, nz = 2;
    double lx = 100.0, ly = 100.0, lz = 100.0;  // mm
    double total_mass = 1e-3;                   // Mg, including attachments
    double stiffness = 100.0;                   // N/mm
    std::vector<std::pair<int, double>> attached_masses;  // (node, Mg)
    std::string name = "lumped-grid";

    int node_index(int ix, int iy, int iz) const { return (ix * ny + iy) * nz + iz; }
};

// Surrogate of a 1000 x 50 x 10 mm plate with 0.001 Mg corner masses and
// total mass 0.0093 Mg: a 5 x 3 x 2 grid calibrated so the mass properties
// match the plate (I22 within a few percent).
LumpedGridRecipe plate_surrogate_recipe(double stiffness = 2e4);

StructuralModel make_point_set(const PointSetRecipe& recipe);
StructuralModel make_dumbbell(const DumbbellRecipe& recipe);
StructuralModel make_lumped_grid(const LumpedGridRecipe& recipe);

struct MassProperties {
    double total_mass = 0.0;                 // Mg
    Eigen::Vector3d com;                     // mm, material frame
    Eigen::Matrix3d inertia_com;             // Mg*mm^2, about com, material axes
    Eigen::Vector3d principal_moments;       // Mg*mm^2
    Eigen::Matrix3d principal_axes;          // material -> principal (identity if
                                             // inertia_com is already diagonal)
};

MassProperties mass_properties(const StructuralModel& model);

// Self-describing text model file (see README for the grammar).
struct LoadedModel {
    StructuralModel model;
    std::optional<ModalBasis> basis;
};

LoadedModel load_model(const std::string& path);
LoadedModel load_model_stream(std::istream& in, const std::string& origin);
void save_model(const std::string& path, const StructuralModel& model,
                const ModalBasis* basis = nullptr);

}  // namespace fbdyn
