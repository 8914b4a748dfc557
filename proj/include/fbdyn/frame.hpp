#pragma once

#include <Eigen/Core>

#include "fbdyn/config.hpp"
#include "fbdyn/loads.hpp"
#include "fbdyn/model.hpp"
#include "fbdyn/rotation.hpp"
#include "fbdyn/trajectory.hpp"

namespace fbdyn {

// Pose of the current inertial frame in the global analysis frame. The
// total orientation a_total = exp(M) * base maps global components to
// current-frame components; origin is the material-origin point of the
// dummy body tracked in global coordinates.
struct FrameState {
    LogRotation log_rot;
    Eigen::Matrix3d base_rot = Eigen::Matrix3d::Identity();
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();

    Eigen::Matrix3d a_total() const { return rotation_exp(log_rot) * base_rot; }
    // Folds log_rot into base_rot; a_total is unchanged.
    void rebase_in_place();
};

// Physical and modal state in the current frame. x holds the elastic
// displacement (rigid content removed at step boundaries); x_dot the total
// velocity. v_pr / v_qr are the body-frame marker relative velocities of
// the embedded rigid body motion, integrated as independent states.
struct SimState {
    Eigen::VectorXd x;
    Eigen::VectorXd x_dot;
    ModalState eta;
    Eigen::Vector3d v_pr = Eigen::Vector3d::Zero();
    Eigen::Vector3d v_qr = Eigen::Vector3d::Zero();
    double time = 0.0;

    explicit SimState(int n_modes) : eta(n_modes) {}
};

struct EmbeddedRbm {
    Eigen::Vector3d v_pr, v_qr, a_pr, a_qr;
};

// Expands only the rigid block of a 2m vector whose halves are modal rates
// and modal accelerations (or coordinate and rate increments), returning
// marker relative quantities in the current frame.
EmbeddedRbm extract_embedded_rbm(const ModalBasis& basis, const Eigen::VectorXd& eta_like,
                                 const MarkerTriad& triad);

// Applies a relative rotation as a per-node 3x3 block to displacement and
// velocity vectors.
void transform_state(const Eigen::Matrix3d& r_rel, Eigen::VectorXd& x, Eigen::VectorXd& x_dot);

// One staged step of the reconfigured-frame scheme: four stages with
// mid-step frame transforms, combination of the increments, removal of the
// embedded rigid displacement into the frame, and the frame pose update.
// Throws NumericalError on divergence; an internal RebaseRequired triggers
// one rebase-and-retry.
void rk4_step(const ModalSystem& system, SimState& state, FrameState& frame,
              const LoadSpec& loads, const MarkerTriad& triad, double dt,
              long* marker_warnings = nullptr);

// Runs the scheme from the configured initial conditions to t_end,
// recording one trajectory record per step boundary.
Trajectory simulate(const StructuralModel& model, const ModalSystem& system,
                    const SimulationConfig& config);

}  // namespace fbdyn
