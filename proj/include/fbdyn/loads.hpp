#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fbdyn/types.hpp"

namespace fbdyn {

enum class LoadFrame {
    global_fixed,  // direction fixed in the global analysis frame
    body_fixed,    // follower load, direction fixed in the body frame
};

struct LoadEntry {
    int node = 0;
    Eigen::Vector3d direction = Eigen::Vector3d::UnitX();  // unit length
    LoadFrame frame = LoadFrame::global_fixed;
    std::vector<std::pair<double, double>> magnitude;  // (time s, force N) breakpoints

    // Linear interpolation between breakpoints, clamped at the ends.
    double magnitude_at(double t) const;
};

struct LoadSpec {
    std::vector<LoadEntry> entries;

    bool empty() const { return entries.empty(); }
    // Checks node range, unit directions, breakpoint ordering and coverage
    // of [0, t_end].
    void validate(int n_nodes, double t_end) const;
};

// Nodal force vector at time t with components in the current frame.
// a_total maps global components to current-frame components; follower
// loads are used as given.
Eigen::VectorXd assemble_force(const LoadSpec& loads, double t, const Eigen::Matrix3d& a_total,
                               int n_dofs);

}  // namespace fbdyn
