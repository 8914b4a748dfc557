#include "fbdyn/rigid.hpp"

#include <cmath>

#include <Eigen/Geometry>

namespace fbdyn {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
}

RigidBodyProps RigidBodyProps::from_mass_properties(const MassProperties& mp) {
    RigidBodyProps p;
    p.mass = mp.total_mass;
    p.inertia_principal = mp.principal_moments;
    p.com = mp.com;
    p.principal_axes = mp.principal_axes;
    p.validate();
    return p;
}

void RigidBodyProps::validate() const {
    if (!(mass > 0.0)) throw ValidationError("rigid body mass must be positive");
    const Eigen::Vector3d& i = inertia_principal;
    if (!(i.x() > 0.0) || !(i.y() > 0.0) || !(i.z() > 0.0)) {
        throw ValidationError("principal moments of inertia must be positive");
    }
    const double tol = 1e-9 * i.maxCoeff();
    if (i.x() + i.y() < i.z() - tol || i.y() + i.z() < i.x() - tol ||
        i.z() + i.x() < i.y() - tol) {
        throw ValidationError("principal moments violate the triangle inequalities");
    }
}

RigidRates rigid_derivative(const RigidBodyProps& props, const RigidState& state,
                            const LoadSpec& loads,
                            const std::vector<Eigen::Vector3d>& node_coords, double t) {
    const Eigen::Matrix3d a = state.orientation();  // global -> principal body
    Eigen::Vector3d force_global = Eigen::Vector3d::Zero();
    Eigen::Vector3d torque_body = Eigen::Vector3d::Zero();
    for (const LoadEntry& e : loads.entries) {
        const double mag = e.magnitude_at(t);
        if (mag == 0.0) continue;
        if (e.node < 0 || e.node >= static_cast<int>(node_coords.size())) {
            throw ValidationError("load node " + std::to_string(e.node) + " does not exist");
        }
        Eigen::Vector3d f_global;
        if (e.frame == LoadFrame::global_fixed) {
            f_global = mag * e.direction;
        } else {
            // Follower load: direction given in material body axes.
            f_global = a.transpose() * (props.principal_axes * (mag * e.direction));
        }
        force_global += f_global;
        const Eigen::Vector3d arm_body =
            props.principal_axes * (node_coords[e.node] - props.com);
        torque_body += arm_body.cross(a * f_global);
    }

    const Eigen::Vector3d& i = props.inertia_principal;
    const Eigen::Vector3d& w = state.omega_body;
    RigidRates rates;
    rates.com_vel = state.com_vel;
    rates.com_acc = force_global / props.mass;
    rates.omega_dot = {((i.y() - i.z()) * w.y() * w.z() + torque_body.x()) / i.x(),
                       ((i.z() - i.x()) * w.z() * w.x() + torque_body.y()) / i.y(),
                       ((i.x() - i.y()) * w.x() * w.y() + torque_body.z()) / i.z()};
    // Same base-frame conjugation as the flexible solver: the dexp input is
    // exp(M)^T * omega_body.
    rates.m_rot_rate = dexp_inv_rate_vec(state.log_rot.vector(),
                                         rotation_exp(state.log_rot).transpose() * w);
    return rates;
}

namespace {

TrajectoryRecord rigid_record(const RigidBodyProps& props, const RigidState& state,
                              const LoadSpec& loads,
                              const std::vector<Eigen::Vector3d>& node_coords,
                              const std::vector<int>& output_nodes) {
    const RigidRates rates = rigid_derivative(props, state, loads, node_coords, state.time);
    const Eigen::Matrix3d a = state.orientation();          // global -> principal
    const Eigen::Matrix3d p = props.principal_axes;          // material -> principal
    TrajectoryRecord rec;
    rec.time = state.time;
    // Material body axes, for column-wise comparison with the flexible run.
    rec.a_total = p.transpose() * a;
    rec.rotvec_total = so3_log(rec.a_total);
    rec.omega_body = p.transpose() * state.omega_body;
    rec.alpha_body = p.transpose() * rates.omega_dot;
    rec.origin = state.com_pos + a.transpose() * (p * (-props.com));
    rec.modal_q.resize(0);
    rec.modal_qdot.resize(0);
    rec.nodes.reserve(output_nodes.size());
    for (int node : output_nodes) {
        if (node < 0 || node >= static_cast<int>(node_coords.size())) {
            throw ValidationError("output node " + std::to_string(node) + " does not exist");
        }
        const Eigen::Vector3d s = p * (node_coords[node] - props.com);  // principal comps
        const Eigen::Vector3d w = state.omega_body;
        NodeFrameData nd;
        // Stored in the record's body frame (material axes); reconstruction
        // maps them through a_total like the flexible records. The elastic
        // displacement of a rigid body is identically zero.
        nd.disp.setZero();
        nd.vel = rec.a_total * (state.com_vel + a.transpose() * w.cross(s));
        nd.acc = rec.a_total *
                 (rates.com_acc + a.transpose() * (rates.omega_dot.cross(s) + w.cross(w.cross(s))));
        nd.rbm_acc = nd.acc;
        rec.nodes.push_back(nd);
    }
    return rec;
}

}  // namespace

Trajectory simulate_rigid(const RigidBodyProps& props,
                          const std::vector<Eigen::Vector3d>& node_coords, const LoadSpec& loads,
                          double dt, double t_end, const RigidState& initial,
                          const std::vector<int>& output_nodes) {
    props.validate();
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (t_end < 0.0) throw ValidationError("t_end must be non-negative");
    loads.validate(static_cast<int>(node_coords.size()), t_end);

    RigidState state = initial;
    Trajectory traj;
    traj.output_nodes = output_nodes;
    const long n_steps = std::llround(t_end / dt);
    traj.records.reserve(static_cast<size_t>(n_steps) + 1);
    traj.records.push_back(rigid_record(props, state, loads, node_coords, output_nodes));

    for (long step = 0; step < n_steps; ++step) {
        if (state.log_rot.theta() > kPi) {
            const RebaseResult r = rebase(state.log_rot, state.base_rot);
            state.log_rot = r.log_rot;
            state.base_rot = r.base;
        }
        const double t = state.time;
        const auto eval = [&](const RigidState& s, double at) {
            return rigid_derivative(props, s, loads, node_coords, at);
        };
        const auto advance = [&](const RigidState& s, const RigidRates& r, double h) {
            RigidState out = s;
            out.com_pos += h * r.com_vel;
            out.com_vel += h * r.com_acc;
            out.log_rot = LogRotation(s.log_rot.vector() + h * r.m_rot_rate);
            out.omega_body += h * r.omega_dot;
            return out;
        };
        const RigidRates r1 = eval(state, t);
        const RigidRates r2 = eval(advance(state, r1, dt / 2.0), t + dt / 2.0);
        const RigidRates r3 = eval(advance(state, r2, dt / 2.0), t + dt / 2.0);
        const RigidRates r4 = eval(advance(state, r3, dt), t + dt);

        state.com_pos += dt / 6.0 *
                         (r1.com_vel + 2.0 * r2.com_vel + 2.0 * r3.com_vel + r4.com_vel);
        state.com_vel +=
            dt / 6.0 * (r1.com_acc + 2.0 * r2.com_acc + 2.0 * r3.com_acc + r4.com_acc);
        state.log_rot = LogRotation(
            state.log_rot.vector() +
            dt / 6.0 *
                (r1.m_rot_rate + 2.0 * r2.m_rot_rate + 2.0 * r3.m_rot_rate + r4.m_rot_rate));
        state.omega_body += dt / 6.0 *
                            (r1.omega_dot + 2.0 * r2.omega_dot + 2.0 * r3.omega_dot +
                             r4.omega_dot);
        state.time += dt;

        if (!state.com_pos.allFinite() || !state.omega_body.allFinite() ||
            !state.log_rot.vector().allFinite()) {
            throw DivergenceError("rigid simulation diverged at t = " +
                                  std::to_string(state.time) + " s (step " +
                                  std::to_string(step + 1) + ")", std::move(traj));
        }
        traj.records.push_back(rigid_record(props, state, loads, node_coords, output_nodes));
    }
    return traj;
}

}  // namespace fbdyn
