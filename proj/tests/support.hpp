#pragma once

// Test-side oracles and helpers, kept independent of the library code paths
// they are used to check.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fbdyn/config.hpp"
#include "fbdyn/model.hpp"
#include "fbdyn/rotation.hpp"

namespace testsup {

using Rng = std::mt19937_64;

Eigen::Vector3d random_vec3(Rng& rng, double scale = 1.0);
Eigen::Vector3d random_unit(Rng& rng);

// Well-conditioned random marker triad (cross norm >= 0.2).
fbdyn::MarkerTriad random_triad(Rng& rng);

// Plain truncated Taylor series of the matrix exponential.
Eigen::Matrix3d expm_series(const Eigen::Matrix3d& m, int terms = 30);

// Rigid-kinematics synthesis of marker relative quantities from a
// prescribed omega/alpha (cross-product oracle).
struct MarkerKinematics {
    Eigen::Vector3d v_pr, v_qr, a_pr, a_qr;
};
MarkerKinematics synthesize_marker_motion(const fbdyn::MarkerTriad& triad,
                                          const Eigen::Vector3d& omega,
                                          const Eigen::Vector3d& alpha);

// Conventional fixed-frame modal transient: RK4 on the modal state in the
// global analysis frame (no frame reconfiguration), endpoint-averaged force
// at the half stages. Returns the physical displacement per record.
struct FixedFrameRun {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> x;  // displacement, global frame
};
FixedFrameRun run_fixed_frame(const fbdyn::ModalSystem& system, const fbdyn::LoadSpec& loads,
                              const Eigen::VectorXd& x0, const Eigen::VectorXd& v0, double dt,
                              double t_end);

// Local maxima of |series| with parabolic refinement; returns (time, value).
std::vector<std::pair<double, double>> abs_peaks(const std::vector<double>& times,
                                                 const std::vector<double>& values);

// max |a - b| over all entries.
double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace testsup
