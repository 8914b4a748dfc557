#pragma once

#include <vector>

#include <Eigen/Core>

#include "fbdyn/factory.hpp"
#include "fbdyn/loads.hpp"
#include "fbdyn/rotation.hpp"
#include "fbdyn/trajectory.hpp"

namespace fbdyn {

// Rigid-body mass properties. principal_axes maps material components to
// the principal frame the Euler equations are integrated in (identity for
// bodies whose material-axes inertia tensor is already diagonal).
struct RigidBodyProps {
    double mass = 0.0;                    // Mg
    Eigen::Vector3d inertia_principal;    // Mg*mm^2
    Eigen::Vector3d com;                  // mm, material frame
    Eigen::Matrix3d principal_axes = Eigen::Matrix3d::Identity();

    static RigidBodyProps from_mass_properties(const MassProperties& mp);
    // mass > 0, positive moments, triangle inequalities.
    void validate() const;
};

// State of the rigid oracle. orientation = exp(M) * base maps global
// components to principal-body components; at t = 0 it equals
// principal_axes so the body starts aligned with the material frame.
struct RigidState {
    Eigen::Vector3d com_pos = Eigen::Vector3d::Zero();  // global, mm
    Eigen::Vector3d com_vel = Eigen::Vector3d::Zero();  // global, mm/s
    LogRotation log_rot;
    Eigen::Matrix3d base_rot = Eigen::Matrix3d::Identity();
    Eigen::Vector3d omega_body = Eigen::Vector3d::Zero();  // principal comps, rad/s
    double time = 0.0;

    Eigen::Matrix3d orientation() const { return rotation_exp(log_rot) * base_rot; }
};

struct RigidRates {
    Eigen::Vector3d com_vel, com_acc, m_rot_rate, omega_dot;
};

// Newton's second law for the mass center plus Euler's equations in the
// principal frame; orientation rate through the same dexp-inverse map as
// the flexible solver. node_coords locates the load application points.
RigidRates rigid_derivative(const RigidBodyProps& props, const RigidState& state,
                            const LoadSpec& loads,
                            const std::vector<Eigen::Vector3d>& node_coords, double t);

// RK4 integration recording the same trajectory layout as the flexible
// solver (body-frame omega/alpha in material axes, point kinematics for the
// output nodes, rbm_acc equal to the full acceleration).
Trajectory simulate_rigid(const RigidBodyProps& props,
                          const std::vector<Eigen::Vector3d>& node_coords, const LoadSpec& loads,
                          double dt, double t_end, const RigidState& initial,
                          const std::vector<int>& output_nodes);

}  // namespace fbdyn
