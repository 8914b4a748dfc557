#include "fbdyn/frame.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace fbdyn {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
}

void FrameState::rebase_in_place() {
    const RebaseResult r = rebase(log_rot, base_rot);
    log_rot = r.log_rot;
    base_rot = r.base;
}

EmbeddedRbm extract_embedded_rbm(const ModalBasis& basis, const Eigen::VectorXd& eta_like,
                                 const MarkerTriad& triad) {
    const int m = basis.n_modes();
    const int nr = basis.n_rigid;
    if (eta_like.size() != 2 * m) {
        throw ValidationError("embedded-RBM input length does not match modal basis");
    }
    const int n_nodes = static_cast<int>(basis.shapes.rows()) / 3;
    for (int node : {triad.ref_node, triad.p_node, triad.q_node}) {
        if (node < 0 || node >= n_nodes) {
            throw ValidationError("marker node " + std::to_string(node) + " does not exist");
        }
    }
    const Eigen::VectorXd rate_r = eta_like.head(m).head(nr);
    const Eigen::VectorXd acc_r = eta_like.tail(m).head(nr);
    const auto block = [&](int node) {
        return basis.shapes.block(3 * node, 0, 3, nr);
    };
    EmbeddedRbm out;
    const Eigen::Vector3d v_ref = block(triad.ref_node) * rate_r;
    const Eigen::Vector3d a_ref = block(triad.ref_node) * acc_r;
    out.v_pr = block(triad.p_node) * rate_r - v_ref;
    out.v_qr = block(triad.q_node) * rate_r - v_ref;
    out.a_pr = block(triad.p_node) * acc_r - a_ref;
    out.a_qr = block(triad.q_node) * acc_r - a_ref;
    return out;
}

void transform_state(const Eigen::Matrix3d& r_rel, Eigen::VectorXd& x, Eigen::VectorXd& x_dot) {
    if (x.size() != x_dot.size() || x.size() % 3 != 0) {
        throw ValidationError("state vectors must have matching 3n lengths");
    }
    for (Eigen::Index i = 0; i < x.size(); i += 3) {
        x.segment<3>(i) = r_rel * x.segment<3>(i);
        x_dot.segment<3>(i) = r_rel * x_dot.segment<3>(i);
    }
}

namespace {

struct StageDeltas {
    Eigen::VectorXd eta;                 // 2m
    Eigen::Vector3d v_pr, v_qr, m_rot;   // marker velocity and log-rotation deltas
};

// Marker accelerations of the embedded rigid motion, from the acceleration
// half of a modal state derivative.
void rigid_accels(const ModalBasis& basis, const MarkerTriad& triad,
                  const Eigen::VectorXd& eta_dot, Eigen::Vector3d& a_pr, Eigen::Vector3d& a_qr) {
    const EmbeddedRbm rbm = extract_embedded_rbm(basis, eta_dot, triad);
    a_pr = rbm.a_pr;
    a_qr = rbm.a_qr;
}

void attempt_step(const ModalSystem& system, SimState& state, FrameState& frame,
                  const LoadSpec& loads, const MarkerTriad& triad, double dt,
                  long* marker_warnings) {
    const ModalBasis& basis = system.basis;
    const int m = system.n_modes();
    const int nr = basis.n_rigid;
    const int n_dofs = static_cast<int>(basis.shapes.rows());

    const Eigen::Vector3d m_n = frame.log_rot.vector();
    const Eigen::Matrix3d exp_mn = rotation_exp(m_n);
    const Eigen::Matrix3d a_n = exp_mn * frame.base_rot;

    // Endpoint force samples in the frame-n components; the frame is
    // inertial within the step, so a global-fixed load has constant
    // direction here and mid-stages use the plain endpoint average.
    const Eigen::VectorXd f_q_n =
        basis.shapes.transpose() * assemble_force(loads, state.time, a_n, n_dofs);
    const Eigen::VectorXd f_q_np1 =
        basis.shapes.transpose() * assemble_force(loads, state.time + dt, a_n, n_dofs);
    const Eigen::VectorXd f_q_mid = 0.5 * (f_q_n + f_q_np1);

    const auto stage = [&](double c, const StageDeltas* prev,
                           const Eigen::VectorXd& f_q) -> StageDeltas {
        Eigen::Vector3d v_pr_k = state.v_pr;
        Eigen::Vector3d v_qr_k = state.v_qr;
        Eigen::Vector3d m_k = m_n;
        Eigen::VectorXd eta_k;
        if (prev == nullptr) {
            eta_k = state.eta.packed();
        } else {
            v_pr_k += c * prev->v_pr;
            v_qr_k += c * prev->v_qr;
            m_k += c * prev->m_rot;
            // Stage state: advance by the previous increment, remove its
            // rigid displacement subset, transform into the stage frame,
            // and re-derive the modal state by inverse expansion.
            Eigen::VectorXd x_k =
                state.x + basis.shapes * (c * prev->eta.head(m)) -
                basis.shapes.leftCols(nr) * (c * prev->eta.head(m).head(nr));
            Eigen::VectorXd xd_k = state.x_dot + basis.shapes * (c * prev->eta.tail(m));
            const Eigen::Matrix3d r_k = rotation_exp(m_k) * exp_mn.transpose();
            transform_state(r_k, x_k, xd_k);
            eta_k.resize(2 * m);
            eta_k.head(m) = system.projection * x_k;
            eta_k.tail(m) = system.projection * xd_k;
        }
        const Eigen::Vector3d omega_k = angular_velocity_g(triad, v_pr_k, v_qr_k);
        const Eigen::VectorXd eta_dot = modal_state_derivative(system, eta_k, f_q);
        Eigen::Vector3d a_pr_k, a_qr_k;
        rigid_accels(basis, triad, eta_dot, a_pr_k, a_qr_k);

        StageDeltas d;
        d.eta = dt * eta_dot;
        d.v_pr = dt * relative_velocity_rate(v_pr_k, a_pr_k, omega_k);
        d.v_qr = dt * relative_velocity_rate(v_qr_k, a_qr_k, omega_k);
        d.m_rot = dt * dexp_inv_rate_vec(m_k, rotation_exp(m_k).transpose() * omega_k);
        return d;
    };

    const StageDeltas k1 = stage(0.0, nullptr, f_q_n);
    const StageDeltas k2 = stage(0.5, &k1, f_q_mid);
    const StageDeltas k3 = stage(0.5, &k2, f_q_mid);
    const StageDeltas k4 = stage(1.0, &k3, f_q_np1);

    const Eigen::Vector3d m_next =
        m_n + (k1.m_rot + 2.0 * k2.m_rot + 2.0 * k3.m_rot + k4.m_rot) / 6.0;
    const Eigen::VectorXd d_eta = (k1.eta + 2.0 * k2.eta + 2.0 * k3.eta + k4.eta) / 6.0;
    const Eigen::Vector3d d_v_pr =
        (k1.v_pr + 2.0 * k2.v_pr + 2.0 * k3.v_pr + k4.v_pr) / 6.0;
    const Eigen::Vector3d d_v_qr =
        (k1.v_qr + 2.0 * k2.v_qr + 2.0 * k3.v_qr + k4.v_qr) / 6.0;

    Eigen::VectorXd x_next = state.x + basis.shapes * d_eta.head(m);
    Eigen::VectorXd xd_next = state.x_dot + basis.shapes * d_eta.tail(m);
    const Eigen::Matrix3d exp_next = rotation_exp(m_next);
    const Eigen::Matrix3d r_step = exp_next * exp_mn.transpose();
    transform_state(r_step, x_next, xd_next);

    // Remove the embedded rigid displacement. Projecting after the frame
    // change keeps the stored displacement rigid-free to machine precision;
    // the removed content is accounted for in the frame pose below.
    const Eigen::VectorXd dq_rigid = (system.projection * x_next).head(nr);
    x_next -= basis.shapes.leftCols(nr) * dq_rigid;

    if (!x_next.allFinite() || !xd_next.allFinite() || !m_next.allFinite()) {
        throw NumericalError("simulation diverged at t = " + std::to_string(state.time + dt) +
                             " s");
    }

    // Frame pose update: orientation from the integrated log-rotation, the
    // origin advanced by the removed rigid field evaluated at the material
    // origin, mapped to global components.
    const Eigen::Matrix<double, 6, 1> rigid_amp = basis.rigid_param_map * dq_rigid;
    const Eigen::Vector3d d_origin =
        rigid_amp.head<3>() - rigid_amp.tail<3>().cross(basis.com);
    frame.log_rot = LogRotation(m_next);
    const Eigen::Matrix3d a_next = exp_next * frame.base_rot;
    frame.origin += a_next.transpose() * d_origin;

    state.x = std::move(x_next);
    state.x_dot = std::move(xd_next);
    state.eta = ModalState::from_parts(system.projection * state.x,
                                       system.projection * state.x_dot);
    state.v_pr += d_v_pr;
    state.v_qr += d_v_qr;
    state.time += dt;

    if (marker_warnings != nullptr) {
        // Monitor drift between the integrated marker velocities and
        // re-extraction from the modal state.
        Eigen::VectorXd rates_only = Eigen::VectorXd::Zero(2 * m);
        rates_only.head(m) = state.eta.rates();
        const EmbeddedRbm re = extract_embedded_rbm(basis, rates_only, triad);
        const double scale = 1.0 + std::max(state.v_pr.norm(), state.v_qr.norm());
        const double drift =
            std::max((state.v_pr - re.v_pr).norm(), (state.v_qr - re.v_qr).norm());
        if (drift > 1e-6 * scale) ++(*marker_warnings);
    }
}

}  // namespace

void rk4_step(const ModalSystem& system, SimState& state, FrameState& frame,
              const LoadSpec& loads, const MarkerTriad& triad, double dt,
              long* marker_warnings) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (frame.log_rot.theta() > kPi) frame.rebase_in_place();
    SimState saved_state = state;
    FrameState saved_frame = frame;
    try {
        attempt_step(system, state, frame, loads, triad, dt, marker_warnings);
    } catch (const RebaseRequired&) {
        state = std::move(saved_state);
        frame = std::move(saved_frame);
        frame.rebase_in_place();
        attempt_step(system, state, frame, loads, triad, dt, marker_warnings);
    }
}

namespace {

TrajectoryRecord make_record(const ModalSystem& system, const SimState& state,
                             const FrameState& frame, const LoadSpec& loads,
                             const MarkerTriad& triad, const std::vector<int>& output_nodes) {
    const ModalBasis& basis = system.basis;
    const int m = system.n_modes();
    TrajectoryRecord rec;
    rec.time = state.time;
    rec.origin = frame.origin;
    rec.a_total = frame.a_total();
    rec.rotvec_total = so3_log(rec.a_total);
    rec.omega_body = angular_velocity_g(triad, state.v_pr, state.v_qr);

    const Eigen::VectorXd f_q =
        basis.shapes.transpose() *
        assemble_force(loads, state.time, rec.a_total, static_cast<int>(basis.shapes.rows()));
    const Eigen::VectorXd eta_dot = modal_state_derivative(system, state.eta.packed(), f_q);
    const EmbeddedRbm rbm = extract_embedded_rbm(basis, eta_dot, triad);
    rec.alpha_body = angular_acceleration_h(triad, state.v_pr, state.v_qr, rbm.a_pr, rbm.a_qr,
                                            rec.omega_body);
    rec.modal_q = state.eta.coords();
    rec.modal_qdot = state.eta.rates();

    const Eigen::VectorXd acc = basis.shapes * eta_dot.tail(m);
    const Eigen::VectorXd acc_rbm =
        basis.shapes.leftCols(basis.n_rigid) * eta_dot.tail(m).head(basis.n_rigid);
    rec.nodes.reserve(output_nodes.size());
    for (int node : output_nodes) {
        NodeFrameData nd;
        nd.disp = state.x.segment<3>(3 * node);
        nd.vel = state.x_dot.segment<3>(3 * node);
        nd.acc = acc.segment<3>(3 * node);
        nd.rbm_acc = acc_rbm.segment<3>(3 * node);
        rec.nodes.push_back(nd);
    }
    return rec;
}

}  // namespace

Trajectory simulate(const StructuralModel& model, const ModalSystem& system,
                    const SimulationConfig& config) {
    config.validate(model);
    const ModalBasis& basis = system.basis;
    if (basis.n_rigid != 6) {
        throw ValidationError("frame synthesis needs the full 6-mode rigid block, basis has " +
                              std::to_string(basis.n_rigid));
    }
    if (basis.shapes.rows() != model.n_dofs()) {
        throw ValidationError("modal system does not match the model");
    }
    const MarkerTriad triad = config.marker_triad(model);

    SimState state(system.n_modes());
    FrameState frame;
    auto [x0, v0] = config.initial_state(model, basis);
    state.x = x0;
    state.x_dot = v0;

    // Sweep any rigid displacement content of the initial conditions into
    // the frame origin; x stores flexible deformation only.
    const Eigen::VectorXd q_r0 = (system.projection * state.x).head(basis.n_rigid);
    state.x -= basis.shapes.leftCols(basis.n_rigid) * q_r0;
    const Eigen::Matrix<double, 6, 1> amp0 = basis.rigid_param_map * q_r0;
    frame.origin = amp0.head<3>() - amp0.tail<3>().cross(basis.com);

    state.eta = ModalState::from_parts(system.projection * state.x,
                                       system.projection * state.x_dot);
    Eigen::VectorXd rates_only = Eigen::VectorXd::Zero(2 * system.n_modes());
    rates_only.head(system.n_modes()) = state.eta.rates();
    const EmbeddedRbm rbm0 = extract_embedded_rbm(basis, rates_only, triad);
    state.v_pr = rbm0.v_pr;
    state.v_qr = rbm0.v_qr;

    Trajectory traj;
    traj.output_nodes = config.output_nodes;
    const long n_steps = std::llround(config.t_end / config.dt);
    traj.records.reserve(static_cast<size_t>(n_steps) + 1);
    traj.records.push_back(
        make_record(system, state, frame, config.loads, triad, config.output_nodes));
    for (long step = 0; step < n_steps; ++step) {
        try {
            rk4_step(system, state, frame, config.loads, triad, config.dt,
                     &traj.marker_consistency_warnings);
        } catch (const NumericalError& e) {
            throw DivergenceError(std::string(e.what()) + " (step " + std::to_string(step + 1) +
                                  ")", std::move(traj));
        }
        traj.records.push_back(
            make_record(system, state, frame, config.loads, triad, config.output_nodes));
    }
    return traj;
}

}  // namespace fbdyn
