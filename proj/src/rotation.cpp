#include "fbdyn/rotation.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace fbdyn {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kSmallTheta = 1e-6;
}  // namespace

Eigen::Matrix3d hat(const Eigen::Vector3d& u) {
    Eigen::Matrix3d m;
    m << 0.0, u.z(), -u.y(),
        -u.z(), 0.0, u.x(),
        u.y(), -u.x(), 0.0;
    return m;
}

Eigen::Vector3d vee(const Eigen::Matrix3d& m) {
    return {m(1, 2), m(2, 0), m(0, 1)};
}

LogRotation LogRotation::from_matrix(const Eigen::Matrix3d& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (((m + m.transpose()).cwiseAbs().maxCoeff()) > 1e-12 * scale) {
        throw ValidationError("log-rotation matrix is not antisymmetric");
    }
    return LogRotation(vee(m));
}

Eigen::Vector3d LogRotation::axis() const {
    const double th = rotvec_.norm();
    if (th == 0.0) return Eigen::Vector3d::Zero();
    return rotvec_ / th;
}

MarkerTriad MarkerTriad::from_offsets(const Eigen::Vector3d& p, const Eigen::Vector3d& q,
                                      int ref_node, int p_node, int q_node) {
    MarkerTriad t;
    t.ref_node = ref_node;
    t.p_node = p_node;
    t.q_node = q_node;
    t.p_vec = p;
    t.q_vec = q;
    t.p_len = p.norm();
    t.q_len = q.norm();
    t.validate();
    return t;
}

void MarkerTriad::validate() const {
    if (p_len <= 0.0 || q_len <= 0.0) {
        throw ValidationError("marker triad has a zero-length offset");
    }
    const Eigen::Vector3d e1 = p_vec / p_len;
    const Eigen::Vector3d e2 = q_vec / q_len;
    if (e1.cross(e2).norm() <= 1e-6) {
        throw ValidationError("marker triad is collinear: ||e1 x e2|| <= 1e-6");
    }
}

TriadBasis basis_from_markers(const MarkerTriad& triad) {
    triad.validate();
    TriadBasis basis;
    basis.e1 = triad.p_vec / triad.p_len;
    basis.e2 = triad.q_vec / triad.q_len;
    const Eigen::Vector3d c = basis.e1.cross(basis.e2);
    basis.cross_norm = c.norm();
    basis.e3 = c / basis.cross_norm;
    basis.b.row(0) = basis.e1;
    basis.b.row(1) = basis.e2;
    basis.b.row(2) = basis.e3;
    return basis;
}

Eigen::Vector3d angular_velocity_g(const MarkerTriad& triad, const Eigen::Vector3d& v_pr,
                                   const Eigen::Vector3d& v_qr) {
    const TriadBasis t = basis_from_markers(triad);
    const double pc = triad.p_len * t.cross_norm;
    const double qc = triad.q_len * t.cross_norm;
    Eigen::Vector3d w_hat;
    w_hat(2) = v_pr.dot(t.e2 - t.e1 * t.e1.dot(t.e2)) / pc;
    w_hat(1) = -v_pr.dot(t.e3) / pc;
    w_hat(0) = v_qr.dot(t.e3) / qc;
    return t.b.transpose() * w_hat;
}

Eigen::Vector3d angular_acceleration_h(const MarkerTriad& triad, const Eigen::Vector3d& v_pr,
                                       const Eigen::Vector3d& v_qr, const Eigen::Vector3d& a_pr,
                                       const Eigen::Vector3d& a_qr,
                                       const Eigen::Vector3d& omega_body) {
    const TriadBasis t = basis_from_markers(triad);
    const Eigen::Vector3d wxv_p = omega_body.cross(v_pr);
    const Eigen::Vector3d wxv_q = omega_body.cross(v_qr);
    Eigen::Vector3d a_hat;
    a_hat(2) = (t.e3.cross(wxv_p) - t.e3.cross(a_pr)).dot(t.e1) / triad.p_len;
    a_hat(1) = (wxv_p - a_pr).dot(t.e3) / (triad.p_len * t.cross_norm);
    a_hat(0) = (a_qr - wxv_q).dot(t.e3) / (triad.q_len * t.cross_norm);
    return t.b.transpose() * a_hat;
}

Eigen::Vector3d relative_velocity_rate(const Eigen::Vector3d& v_rel, const Eigen::Vector3d& a_rel,
                                       const Eigen::Vector3d& omega_body) {
    return a_rel - omega_body.cross(v_rel);
}

Eigen::Matrix3d rotation_exp(const Eigen::Vector3d& rotvec) {
    const double th = rotvec.norm();
    double f1, f2;  // sin(th)/th, (1-cos(th))/th^2
    if (th < kSmallTheta) {
        const double th2 = th * th;
        f1 = 1.0 - th2 / 6.0;
        f2 = 0.5 - th2 / 24.0;
    } else {
        f1 = std::sin(th) / th;
        f2 = (1.0 - std::cos(th)) / (th * th);
    }
    const Eigen::Matrix3d k = hat(rotvec);
    return Eigen::Matrix3d::Identity() + f1 * k + f2 * (k * k);
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& a) {
    const double c = std::clamp((a.trace() - 1.0) / 2.0, -1.0, 1.0);
    const double th = std::acos(c);
    const Eigen::Vector3d w = vee((a - a.transpose()) / 2.0);  // sin(th) * lambda
    if (th < 1e-8) {
        return w;
    }
    if (th < kPi - 1e-4) {
        return (th / std::sin(th)) * w;
    }
    // Near pi the antisymmetric part degenerates; recover the axis from the
    // symmetric part, (a + a^T)/2 = I + (1 - cos th)(lambda lambda^T - I).
    const Eigen::Matrix3d s =
        (a + a.transpose()) / 2.0 - c * Eigen::Matrix3d::Identity();
    Eigen::Vector3d axis2 = s.diagonal() / (1.0 - c);
    Eigen::Vector3d axis = axis2.cwiseMax(0.0).cwiseSqrt();
    // Off-diagonal entries fix the relative signs; anchor on the largest
    // component, then align with the antisymmetric part if it is usable.
    int k = 0;
    axis2.cwiseAbs().maxCoeff(&k);
    const Eigen::Matrix3d lam2 = s / (1.0 - c);
    for (int i = 0; i < 3; ++i) {
        if (i == k || axis(i) == 0.0) continue;
        if (lam2(k, i) < 0.0) axis(i) = -axis(i);
    }
    axis.normalize();
    if (w.dot(axis) < 0.0) axis = -axis;
    return th * axis;
}

Eigen::Vector3d dexp_inv_rate_vec(const Eigen::Vector3d& rotvec, const Eigen::Vector3d& omega) {
    const double th = rotvec.norm();
    if (std::abs(th - kTwoPi) < 1e-3 || th > kTwoPi) {
        throw RebaseRequired("log-rotation angle near 2*pi; rebase required");
    }
    double c;  // (1 - (th/2) cot(th/2)) / th^2
    if (th < kSmallTheta) {
        c = 1.0 / 12.0 + th * th / 720.0;
    } else {
        c = (1.0 - (th / 2.0) / std::tan(th / 2.0)) / (th * th);
    }
    return omega - 0.5 * rotvec.cross(omega) + c * rotvec.cross(rotvec.cross(omega));
}

Eigen::Matrix3d dexp_inv_rate(const LogRotation& log_rot, const Eigen::Vector3d& omega) {
    return hat(dexp_inv_rate_vec(log_rot.vector(), omega));
}

RebaseResult rebase(const LogRotation& log_rot, const Eigen::Matrix3d& base) {
    RebaseResult r;
    r.base = rotation_exp(log_rot) * base;
    r.log_rot = LogRotation();
    return r;
}

}  // namespace fbdyn
