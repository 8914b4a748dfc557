#pragma once

#include <Eigen/Core>

#include "fbdyn/types.hpp"

namespace fbdyn {

// Skew matrix with the sign placement used throughout this library:
//   hat(u) = [  0    u3  -u2
//              -u3   0    u1
//               u2  -u1   0 ],
// i.e. the transpose of the more common convention. With this choice the
// orientation matrix A = exp(hat(theta*lambda)) maps global components to
// body components, v_body = A * v_global.
Eigen::Matrix3d hat(const Eigen::Vector3d& u);

// Inverse of hat(); expects an antisymmetric matrix.
Eigen::Vector3d vee(const Eigen::Matrix3d& m);

// Rotation in logarithmic form, M = theta * hat(lambda). Stored as the
// rotation vector theta*lambda so antisymmetry holds by construction.
class LogRotation {
public:
    LogRotation() : rotvec_(Eigen::Vector3d::Zero()) {}
    explicit LogRotation(const Eigen::Vector3d& rotvec) : rotvec_(rotvec) {}

    // Builds from a matrix, validating antisymmetry to 1e-12 of its scale.
    static LogRotation from_matrix(const Eigen::Matrix3d& m);

    const Eigen::Vector3d& vector() const { return rotvec_; }
    Eigen::Matrix3d matrix() const { return hat(rotvec_); }
    double theta() const { return rotvec_.norm(); }
    // Unit axis; returns the zero vector for theta == 0.
    Eigen::Vector3d axis() const;

private:
    Eigen::Vector3d rotvec_;
};

// Three non-collinear marker points R, P, Q with body-frame offset vectors
// p = RP, q = RQ. Offsets are material-frame constants.
struct MarkerTriad {
    int ref_node = -1;
    int p_node = -1;
    int q_node = -1;
    Eigen::Vector3d p_vec;
    Eigen::Vector3d q_vec;
    double p_len = 0.0;
    double q_len = 0.0;

    static MarkerTriad from_offsets(const Eigen::Vector3d& p, const Eigen::Vector3d& q,
                                    int ref_node = -1, int p_node = -1, int q_node = -1);
    void validate() const;
};

struct TriadBasis {
    Eigen::Vector3d e1, e2, e3;  // unit vectors, body-frame components
    Eigen::Matrix3d b;           // rows are e1, e2, e3
    double cross_norm = 0.0;     // ||e1 x e2||
};

// Basis vectors spanned by the marker offsets. Throws ValidationError for
// (near-)collinear markers.
TriadBasis basis_from_markers(const MarkerTriad& triad);

// Body-frame angular velocity from marker relative velocities. All inputs
// and the result are components in the current body-fixed frame.
Eigen::Vector3d angular_velocity_g(const MarkerTriad& triad, const Eigen::Vector3d& v_pr,
                                   const Eigen::Vector3d& v_qr);

// Body-frame angular acceleration from marker relative velocities and
// accelerations plus the angular velocity from angular_velocity_g.
Eigen::Vector3d angular_acceleration_h(const MarkerTriad& triad, const Eigen::Vector3d& v_pr,
                                       const Eigen::Vector3d& v_qr, const Eigen::Vector3d& a_pr,
                                       const Eigen::Vector3d& a_qr,
                                       const Eigen::Vector3d& omega_body);

// Rate of body-frame relative-velocity components: a' - omega' x v'.
Eigen::Vector3d relative_velocity_rate(const Eigen::Vector3d& v_rel, const Eigen::Vector3d& a_rel,
                                       const Eigen::Vector3d& omega_body);

// Rodrigues form A = I + sin(theta)*hat(lambda) + (1-cos(theta))*hat(lambda)^2,
// with series evaluation of sin(theta)/theta and (1-cos)/theta^2 below
// theta = 1e-6.
Eigen::Matrix3d rotation_exp(const Eigen::Vector3d& rotvec);
inline Eigen::Matrix3d rotation_exp(const LogRotation& log_rot) {
    return rotation_exp(log_rot.vector());
}

// Rotation vector of a rotation matrix (inverse of rotation_exp), robust
// near theta = 0 and theta = pi.
Eigen::Vector3d so3_log(const Eigen::Matrix3d& a);

// Rate of the rotation vector m for angular velocity omega expressed in the
// frame the rotation is measured against (the global/base frame):
//   mdot = omega - (1/2) m x omega + c(theta) m x (m x omega),
//   c = (1 - (theta/2) cot(theta/2)) / theta^2,
// which is the inverse of the exponential's differential under the
// composition d/dt exp(M) = exp(M) * hat(omega). Throws RebaseRequired
// within 1e-3 of theta = 2*pi.
Eigen::Vector3d dexp_inv_rate_vec(const Eigen::Vector3d& rotvec, const Eigen::Vector3d& omega);

// Matrix form of the same rate, Mdot = hat(dexp_inv_rate_vec(...)).
Eigen::Matrix3d dexp_inv_rate(const LogRotation& log_rot, const Eigen::Vector3d& omega);

struct RebaseResult {
    LogRotation log_rot;    // zeroed
    Eigen::Matrix3d base;   // exp(old log_rot) * old base
};

// Folds the log-rotation into the accumulated base so the total orientation
// exp(M)*base is unchanged and M restarts at zero.
RebaseResult rebase(const LogRotation& log_rot, const Eigen::Matrix3d& base);

}  // namespace fbdyn
