#include <cmath>

#include <doctest.h>

#include "fbdyn/factory.hpp"
#include "fbdyn/frame.hpp"
#include "fbdyn/rigid.hpp"
#include "support.hpp"

using namespace fbdyn;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

SimulationConfig dumbbell_config() {
    SimulationConfig cfg;
    cfg.marker_ref = 0;
    cfg.marker_p = 1;
    cfg.marker_q = 2;
    cfg.output_nodes = {0, 1, 2};
    cfg.n_flex_modes = 3;
    return cfg;
}

LoadEntry constant_load(int node, const Vector3d& dir, double value, double t_end) {
    LoadEntry e;
    e.node = node;
    e.direction = dir.normalized();
    e.magnitude = {{0.0, value}, {t_end, value}};
    return e;
}

LoadEntry ramp_load(int node, const Vector3d& dir, double value, double t_ramp, double t_end) {
    LoadEntry e;
    e.node = node;
    e.direction = dir.normalized();
    e.magnitude = {{0.0, 0.0}, {t_ramp, value}, {t_end, value}};
    return e;
}
}  // namespace

TEST_CASE("extract embedded rigid motion") {
    const StructuralModel model = make_dumbbell(DumbbellRecipe{});
    const ModalBasis basis = compute_modes(model, 3);
    const int m = basis.n_modes();
    const MarkerTriad triad = dumbbell_config().marker_triad(model);

    SUBCASE("zero rigid content") {
        VectorXd eta_like = VectorXd::Zero(2 * m);
        eta_like(m - 1) = 2.0;  // flexible entries only
        eta_like(2 * m - 1) = -1.0;
        const EmbeddedRbm rbm = extract_embedded_rbm(basis, eta_like, triad);
        CHECK(rbm.v_pr.norm() == 0.0);
        CHECK(rbm.a_qr.norm() == 0.0);
    }
    SUBCASE("pure translations cancel in relative quantities") {
        VectorXd eta_like = VectorXd::Zero(2 * m);
        eta_like(0) = 1.3;
        eta_like(1) = -0.4;
        eta_like(2) = 2.2;
        const EmbeddedRbm rbm = extract_embedded_rbm(basis, eta_like, triad);
        CHECK(rbm.v_pr.norm() < 1e-12);
        CHECK(rbm.v_qr.norm() < 1e-12);
    }
    SUBCASE("rotation mode matches a hand expansion") {
        testsup::Rng rng(3);
        VectorXd eta_like(2 * m);
        for (int i = 0; i < 2 * m; ++i) eta_like(i) = testsup::random_vec3(rng).x();
        const EmbeddedRbm rbm = extract_embedded_rbm(basis, eta_like, triad);
        // Brute-force nodal expansion of the rigid block only.
        const MatrixXd psi_r = basis.rigid_shapes();
        const VectorXd v_nodes = psi_r * eta_like.head(m).head(6);
        const VectorXd a_nodes = psi_r * eta_like.tail(m).head(6);
        const auto seg = [](const VectorXd& v, int node) { return v.segment<3>(3 * node); };
        CHECK((rbm.v_pr - (seg(v_nodes, 1) - seg(v_nodes, 0))).norm() < 1e-13);
        CHECK((rbm.v_qr - (seg(v_nodes, 2) - seg(v_nodes, 0))).norm() < 1e-13);
        CHECK((rbm.a_pr - (seg(a_nodes, 1) - seg(a_nodes, 0))).norm() < 1e-13);
        CHECK((rbm.a_qr - (seg(a_nodes, 2) - seg(a_nodes, 0))).norm() < 1e-13);
        // The implied angular rate reproduces v = omega x p at the markers.
        const Eigen::Matrix<double, 6, 1> amp =
            basis.rigid_param_map * eta_like.head(m).head(6);
        const Vector3d omega = amp.tail<3>();
        CHECK((rbm.v_pr - omega.cross(triad.p_vec)).norm() < 1e-12 * (1.0 + omega.norm()));
    }
}

TEST_CASE("transform state") {
    SUBCASE("identity") {
        VectorXd x(6), xd(6);
        x << 1, 2, 3, 4, 5, 6;
        xd = 2.0 * x;
        VectorXd x2 = x, xd2 = xd;
        transform_state(Eigen::Matrix3d::Identity(), x2, xd2);
        CHECK((x2 - x).norm() == 0.0);
        CHECK((xd2 - xd).norm() == 0.0);
    }
    SUBCASE("quarter turn about X3 under the pinned convention") {
        VectorXd x(3), xd(3);
        x << 1, 0, 0;
        xd << 0, 0, 0;
        transform_state(rotation_exp(Vector3d(0, 0, kPi / 2.0)), x, xd);
        CHECK((x - VectorXd(Vector3d(0, -1, 0))).norm() < 1e-14);
    }
    SUBCASE("isometry") {
        testsup::Rng rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            VectorXd x(9), xd(9);
            for (int i = 0; i < 9; ++i) {
                x(i) = testsup::random_vec3(rng).x();
                xd(i) = testsup::random_vec3(rng).y();
            }
            const double nx = x.norm(), nxd = xd.norm();
            transform_state(rotation_exp(testsup::random_vec3(rng)), x, xd);
            CHECK(std::abs(x.norm() - nx) < 1e-12 * (1.0 + nx));
            CHECK(std::abs(xd.norm() - nxd) < 1e-12 * (1.0 + nxd));
        }
    }
}

TEST_CASE("rk4 step equilibrium") {
    const StructuralModel model = make_dumbbell(DumbbellRecipe{});
    const ModalBasis basis = compute_modes(model, 3);
    const ModalSystem system = build_modal_system(model, basis, VectorXd::Constant(1, 0.05));
    const MarkerTriad triad = dumbbell_config().marker_triad(model);

    SimState state(system.n_modes());
    state.x = VectorXd::Zero(model.n_dofs());
    state.x_dot = VectorXd::Zero(model.n_dofs());
    FrameState frame;
    rk4_step(system, state, frame, LoadSpec{}, triad, 1e-4);
    CHECK(state.x.norm() == 0.0);
    CHECK(state.x_dot.norm() == 0.0);
    CHECK(state.eta.packed().norm() == 0.0);
    CHECK(frame.origin.norm() == 0.0);
    CHECK(frame.log_rot.theta() == 0.0);
    CHECK(state.time == doctest::Approx(1e-4));
}

TEST_CASE("rk4 step uniform force on a rigid-only basis") {
    const StructuralModel model = make_dumbbell(DumbbellRecipe{});
    const ModalBasis basis = compute_modes(model, 0);
    const ModalSystem system = build_modal_system(model, basis, VectorXd());
    const MarkerTriad triad = dumbbell_config().marker_triad(model);
    const double m_tot = mass_properties(model).total_mass;
    const double force = 0.016;
    const double dt = 1e-4;

    LoadSpec loads;
    for (int node = 0; node < 3; ++node) {
        // Share the force over the nodes proportionally to their mass so the
        // load is a pure mass-center push with no torque.
        const double share = model.mass_matrix(3 * node, 3 * node) / m_tot;
        loads.entries.push_back(constant_load(node, Vector3d::UnitX(), force * share, 1.0));
    }

    SimState state(system.n_modes());
    state.x = VectorXd::Zero(model.n_dofs());
    state.x_dot = VectorXd::Zero(model.n_dofs());
    FrameState frame;
    rk4_step(system, state, frame, loads, triad, dt);

    const double dv_expected = force / m_tot * dt;
    for (int node = 0; node < 3; ++node) {
        CHECK(state.x_dot(3 * node) == doctest::Approx(dv_expected).epsilon(1e-10));
        CHECK(std::abs(state.x_dot(3 * node + 1)) < 1e-14);
    }
    CHECK(state.x.norm() < 1e-12);  // displacement swept into the frame
    CHECK(frame.origin.x() == doctest::Approx(0.5 * force / m_tot * dt * dt).epsilon(1e-6));
}

TEST_CASE("simulate basics") {
    const StructuralModel model = make_dumbbell(DumbbellRecipe{});
    const ModalBasis basis = compute_modes(model, 3);
    const ModalSystem system = build_modal_system(model, basis, VectorXd::Constant(1, 0.05));

    SUBCASE("zero end time gives a single record") {
        SimulationConfig cfg = dumbbell_config();
        cfg.t_end = 0.0;
        const Trajectory traj = simulate(model, system, cfg);
        CHECK(traj.records.size() == 1);
        CHECK(traj.records.front().time == 0.0);
    }
    SUBCASE("zero loads and state stay at rest") {
        SimulationConfig cfg = dumbbell_config();
        cfg.t_end = 0.01;
        cfg.dt = 1e-4;
        const Trajectory traj = simulate(model, system, cfg);
        CHECK(traj.records.size() == 101);
        for (const auto& rec : traj.records) {
            CHECK(rec.omega_body.norm() == 0.0);
            CHECK(rec.origin.norm() == 0.0);
            CHECK(rec.modal_q.norm() == 0.0);
        }
    }
    SUBCASE("record times increase strictly") {
        SimulationConfig cfg = dumbbell_config();
        cfg.t_end = 5e-3;
        cfg.dt = 1e-4;
        const Trajectory traj = simulate(model, system, cfg);
        for (size_t i = 1; i < traj.records.size(); ++i) {
            CHECK(traj.records[i].time > traj.records[i - 1].time);
        }
        CHECK(traj.records.back().time == doctest::Approx(5e-3).epsilon(1e-12));
    }
}

TEST_CASE("rigid displacement content stays removed") {
    const StructuralModel model = make_dumbbell(DumbbellRecipe{});
    const ModalBasis basis = compute_modes(model, 3);
    const ModalSystem system = build_modal_system(model, basis, VectorXd::Constant(1, 0.05));
    SimulationConfig cfg = dumbbell_config();
    cfg.dt = 1e-4;
    cfg.t_end = 0.05;
    cfg.loads.entries.push_back(ramp_load(2, Vector3d(0.3, 0.1, 0.95), 0.02, 0.01, cfg.t_end));
    cfg.loads.entries.push_back(constant_load(0, Vector3d::UnitZ(), 0.01, cfg.t_end));
    cfg.loads.entries.push_back(constant_load(1, -Vector3d::UnitZ(), 0.01, cfg.t_end));

    SimState state(system.n_modes());
    state.x = VectorXd::Zero(model.n_dofs());
    state.x_dot = VectorXd::Zero(model.n_dofs());
    FrameState frame;
    const MarkerTriad triad = cfg.marker_triad(model);
    for (int step = 0; step < 500; ++step) {
        rk4_step(system, state, frame, cfg.loads, triad, cfg.dt);
        const VectorXd q_r = (system.projection * state.x).head(6);
        CHECK(q_r.norm() <= 1e-8 * state.x.norm() + 1e-12);
        const Eigen::Matrix3d a = frame.a_total();
        CHECK((a * a.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("near-rigid dumbbell tracks the rigid oracle") {
    DumbbellRecipe recipe;
    recipe.stiffness = 1e4;
    const StructuralModel model = make_dumbbell(recipe);
    const ModalBasis basis = compute_modes(model, 3);
    const ModalSystem system = build_modal_system(model, basis, VectorXd::Constant(1, 0.05));

    SimulationConfig cfg = dumbbell_config();
    cfg.dt = 1e-4;
    cfg.t_end = 0.2;
    // A couple about the X3 axis through the mass center.
    cfg.loads.entries.push_back(ramp_load(0, Vector3d::UnitY(), -0.05, 0.05, cfg.t_end));
    cfg.loads.entries.push_back(ramp_load(1, Vector3d::UnitY(), 0.05, 0.05, cfg.t_end));

    const Trajectory flex = simulate(model, system, cfg);

    const RigidBodyProps props = RigidBodyProps::from_mass_properties(mass_properties(model));
    RigidState initial;
    initial.base_rot = props.principal_axes;
    const Trajectory rigid = simulate_rigid(props, model.node_coords, cfg.loads, cfg.dt,
                                            cfg.t_end, initial, cfg.output_nodes);

    REQUIRE(flex.records.size() == rigid.records.size());
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < flex.records.size(); ++i) {
        num += (flex.records[i].omega_body - rigid.records[i].omega_body).squaredNorm();
        den += rigid.records[i].omega_body.squaredNorm();
    }
    CHECK(std::sqrt(num / den) < 1e-3);
}

TEST_CASE("translation invariance of the body-frame response") {
    DumbbellRecipe recipe;
    const StructuralModel model = make_dumbbell(recipe);
    StructuralModel shifted = model;
    const Vector3d shift(320.0, -41.0, 77.0);
    for (auto& p : shifted.node_coords) p += shift;

    SimulationConfig cfg = dumbbell_config();
    cfg.dt = 1e-4;
    cfg.t_end = 0.02;
    cfg.loads.entries.push_back(ramp_load(2, Vector3d(1, 0, 0.5), 0.03, 0.01, cfg.t_end));

    const auto run = [&](const StructuralModel& m) {
        const ModalBasis basis = compute_modes(m, 3);
        const ModalSystem system = build_modal_system(m, basis, VectorXd::Constant(1, 0.05));
        return simulate(m, system, cfg);
    };
    const Trajectory a = run(model);
    const Trajectory b = run(shifted);
    REQUIRE(a.records.size() == b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
        CHECK((a.records[i].omega_body - b.records[i].omega_body).norm() < 1e-9);
        CHECK((a.records[i].alpha_body - b.records[i].alpha_body).norm() < 1e-9);
        for (size_t k = 0; k < a.records[i].nodes.size(); ++k) {
            CHECK((a.records[i].nodes[k].disp - b.records[i].nodes[k].disp).norm() < 1e-9);
        }
    }
}

TEST_CASE("global reconstruction") {
    const StructuralModel model = make_dumbbell(DumbbellRecipe{});
    const ModalBasis basis = compute_modes(model, 3);
    const ModalSystem system = build_modal_system(model, basis, VectorXd::Constant(1, 0.05));

    SUBCASE("zero motion keeps material coordinates") {
        SimulationConfig cfg = dumbbell_config();
        cfg.t_end = 2e-3;
        cfg.dt = 1e-4;
        const Trajectory traj = simulate(model, system, cfg);
        const auto series = reconstruct_global(traj, model, {0, 2});
        for (const auto& s : series) {
            for (const auto& p : s.pos) {
                CHECK((p - model.node_coords[s.node]).norm() < 1e-12);
            }
        }
    }
    SUBCASE("pure rigid translation appears verbatim") {
        SimulationConfig cfg = dumbbell_config();
        cfg.t_end = 0.05;
        cfg.dt = 1e-4;
        const double m_tot = mass_properties(model).total_mass;
        const double force = 0.008;
        for (int node = 0; node < 3; ++node) {
            const double share = model.mass_matrix(3 * node, 3 * node) / m_tot;
            cfg.loads.entries.push_back(
                constant_load(node, Vector3d::UnitX(), force * share, cfg.t_end));
        }
        const Trajectory traj = simulate(model, system, cfg);
        const auto series = reconstruct_global(traj, model, {1});
        const double a = force / m_tot;
        for (size_t i = 0; i < traj.records.size(); ++i) {
            const double t = traj.records[i].time;
            const Vector3d expected =
                model.node_coords[1] + Vector3d(0.5 * a * t * t, 0.0, 0.0);
            CHECK((series[0].pos[i] - expected).norm() < 1e-8 * (1.0 + expected.norm()));
        }
    }
    SUBCASE("unknown node is rejected") {
        SimulationConfig cfg = dumbbell_config();
        cfg.t_end = 0.0;
        const Trajectory traj = simulate(model, system, cfg);
        CHECK_THROWS_AS(reconstruct_global(traj, model, {7}), ValidationError);
    }
}

TEST_CASE("small-rotation runs match the fixed-frame solver") {
    DumbbellRecipe recipe;
    const StructuralModel model = make_dumbbell(recipe);
    const ModalBasis basis = compute_modes(model, 3);
    const ModalSystem system = build_modal_system(model, basis, VectorXd::Constant(1, 0.05));

    SimulationConfig cfg = dumbbell_config();
    cfg.dt = 1e-5;
    cfg.t_end = 0.05;
    // Mostly along the arm to the mass center, so the push dominates the
    // induced rotation by orders of magnitude.
    cfg.loads.entries.push_back(ramp_load(2, Vector3d(0.15, 1, 0), 0.01, 0.02, cfg.t_end));

    const Trajectory traj = simulate(model, system, cfg);
    // Total rotation stays inside the conventional model's validity range.
    CHECK(traj.records.back().rotvec_total.norm() < 1e-3);

    const testsup::FixedFrameRun ff = testsup::run_fixed_frame(
        system, cfg.loads, VectorXd::Zero(model.n_dofs()), VectorXd::Zero(model.n_dofs()),
        cfg.dt, cfg.t_end);
    const auto series = reconstruct_global(traj, model, cfg.output_nodes);

    double err = 0.0, scale = 0.0;
    for (size_t i = 0; i < traj.records.size(); ++i) {
        for (size_t k = 0; k < cfg.output_nodes.size(); ++k) {
            const int node = cfg.output_nodes[k];
            const Vector3d u_fs = series[k].pos[i] - model.node_coords[node];
            const Vector3d u_ff = ff.x[i].segment<3>(3 * node);
            err = std::max(err, (u_fs - u_ff).norm());
            scale = std::max(scale, u_ff.norm());
        }
    }
    CHECK(err < 1e-4 * scale);
}
