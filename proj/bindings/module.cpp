#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fbdyn/config.hpp"
#include "fbdyn/factory.hpp"
#include "fbdyn/frame.hpp"
#include "fbdyn/model.hpp"
#include "fbdyn/rigid.hpp"
#include "fbdyn/rotation.hpp"
#include "fbdyn/trajectory.hpp"

namespace py = pybind11;
using namespace fbdyn;

namespace {

Eigen::MatrixXd stack_vec3(const std::vector<Eigen::Vector3d>& v) {
    Eigen::MatrixXd m(v.size(), 3);
    for (size_t i = 0; i < v.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = v[i];
    return m;
}

template <typename Getter>
Eigen::MatrixXd record_rows3(const Trajectory& t, Getter get) {
    Eigen::MatrixXd m(t.records.size(), 3);
    for (size_t i = 0; i < t.records.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) = get(t.records[i]);
    }
    return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Flexible body dynamics by synthesizing incremental motions in "
              "reconfigured inertial frames";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    // --- rotation kinematics -------------------------------------------------
    m.def("hat", &hat, py::arg("u"));
    m.def("vee", &vee, py::arg("m"));
    m.def("rotation_exp", py::overload_cast<const Eigen::Vector3d&>(&rotation_exp),
          py::arg("rotvec"));
    m.def("so3_log", &so3_log, py::arg("rotation"));
    m.def("dexp_inv_rate", &dexp_inv_rate_vec, py::arg("rotvec"), py::arg("omega"));

    py::class_<MarkerTriad>(m, "MarkerTriad")
        .def_static("from_offsets", &MarkerTriad::from_offsets, py::arg("p"), py::arg("q"),
                    py::arg("ref_node") = -1, py::arg("p_node") = -1, py::arg("q_node") = -1)
        .def_readonly("p_vec", &MarkerTriad::p_vec)
        .def_readonly("q_vec", &MarkerTriad::q_vec)
        .def_readonly("p_len", &MarkerTriad::p_len)
        .def_readonly("q_len", &MarkerTriad::q_len);

    m.def("angular_velocity", &angular_velocity_g, py::arg("triad"), py::arg("v_pr"),
          py::arg("v_qr"));
    m.def("angular_acceleration", &angular_acceleration_h, py::arg("triad"), py::arg("v_pr"),
          py::arg("v_qr"), py::arg("a_pr"), py::arg("a_qr"), py::arg("omega_body"));
    m.def("relative_velocity_rate", &relative_velocity_rate, py::arg("v_rel"), py::arg("a_rel"),
          py::arg("omega_body"));

    // --- structural model ----------------------------------------------------
    py::class_<StructuralModel>(m, "StructuralModel")
        .def_property_readonly("node_coords",
                               [](const StructuralModel& s) { return stack_vec3(s.node_coords); })
        .def_readonly("mass_matrix", &StructuralModel::mass_matrix)
        .def_readonly("stiffness_matrix", &StructuralModel::stiffness_matrix)
        .def_readonly("name", &StructuralModel::name)
        .def_property_readonly("n_nodes", &StructuralModel::n_nodes)
        .def_property_readonly("n_dofs", &StructuralModel::n_dofs)
        .def("validate", &StructuralModel::validate);

    py::class_<ModalBasis>(m, "ModalBasis")
        .def_readonly("shapes", &ModalBasis::shapes)
        .def_readonly("frequencies", &ModalBasis::frequencies)
        .def_readonly("n_rigid", &ModalBasis::n_rigid)
        .def_property_readonly("n_modes", &ModalBasis::n_modes)
        .def("rigid_shapes", &ModalBasis::rigid_shapes);

    py::class_<ModalSystem>(m, "ModalSystem")
        .def_readonly("modal_mass", &ModalSystem::modal_mass)
        .def_readonly("modal_stiffness", &ModalSystem::modal_stiffness)
        .def_readonly("modal_damping", &ModalSystem::modal_damping)
        .def_readonly("state_matrix", &ModalSystem::state_matrix)
        .def_readonly("basis", &ModalSystem::basis)
        .def_property_readonly("n_modes", &ModalSystem::n_modes);

    m.def("eigen_frequencies", &eigen_frequencies, py::arg("model"));
    m.def("compute_modes", &compute_modes, py::arg("model"), py::arg("n_flex"));
    m.def(
        "build_modal_system",
        [](const StructuralModel& model, const ModalBasis& basis, py::object damping) {
            Eigen::VectorXd zeta;
            if (!damping.is_none()) {
                if (py::isinstance<py::float_>(damping) || py::isinstance<py::int_>(damping)) {
                    zeta = Eigen::VectorXd::Constant(1, damping.cast<double>());
                } else {
                    zeta = damping.cast<Eigen::VectorXd>();
                }
            }
            return build_modal_system(model, basis, zeta);
        },
        py::arg("model"), py::arg("basis"), py::arg("damping_ratios") = py::none());
    m.def("project_force", &project_force, py::arg("basis"), py::arg("f_x"));
    m.def(
        "modal_expand",
        [](const ModalBasis& basis, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot) {
            const auto [x, xd] = modal_expand(basis, ModalState::from_parts(q, qdot));
            return py::make_tuple(x, xd);
        },
        py::arg("basis"), py::arg("q"), py::arg("qdot"));
    m.def(
        "inverse_modal_expand",
        [](const ModalSystem& system, const Eigen::VectorXd& x, const Eigen::VectorXd& x_dot) {
            const ModalState s = inverse_modal_expand(system, x, x_dot);
            return py::make_tuple(s.coords(), s.rates());
        },
        py::arg("system"), py::arg("x"), py::arg("x_dot"));
    m.def("modal_state_derivative", &modal_state_derivative, py::arg("system"), py::arg("eta"),
          py::arg("f_q"));

    // --- factory ---------------------------------------------------------
    py::class_<SpringSpec>(m, "SpringSpec")
        .def(py::init([](int i, int j, double k) {
                 return SpringSpec{i, j, k};
             }),
             py::arg("node_i"), py::arg("node_j"), py::arg("stiffness"));

    py::class_<PointSetRecipe>(m, "PointSetRecipe")
        .def(py::init<>())
        .def_property(
            "nodes",
            [](const PointSetRecipe& r) { return stack_vec3(r.nodes); },
            [](PointSetRecipe& r, const Eigen::MatrixXd& nodes) {
                r.nodes.clear();
                for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
                    r.nodes.emplace_back(nodes.row(i).transpose());
                }
            })
        .def_readwrite("masses", &PointSetRecipe::masses)
        .def_readwrite("springs", &PointSetRecipe::springs)
        .def_readwrite("name", &PointSetRecipe::name);

    py::class_<DumbbellRecipe>(m, "DumbbellRecipe")
        .def(py::init<>())
        .def_readwrite("length", &DumbbellRecipe::length)
        .def_readwrite("height", &DumbbellRecipe::height)
        .def_readwrite("end_mass", &DumbbellRecipe::end_mass)
        .def_readwrite("apex_mass", &DumbbellRecipe::apex_mass)
        .def_readwrite("stiffness", &DumbbellRecipe::stiffness);

    py::class_<LumpedGridRecipe>(m, "LumpedGridRecipe")
        .def(py::init<>())
        .def_readwrite("nx", &LumpedGridRecipe::nx)
        .def_readwrite("ny", &LumpedGridRecipe::ny)
        .def_readwrite("nz", &LumpedGridRecipe::nz)
        .def_readwrite("lx", &LumpedGridRecipe::lx)
        .def_readwrite("ly", &LumpedGridRecipe::ly)
        .def_readwrite("lz", &LumpedGridRecipe::lz)
        .def_readwrite("total_mass", &LumpedGridRecipe::total_mass)
        .def_readwrite("stiffness", &LumpedGridRecipe::stiffness)
        .def_readwrite("attached_masses", &LumpedGridRecipe::attached_masses)
        .def("node_index", &LumpedGridRecipe::node_index);

    m.def("make_point_set", &make_point_set, py::arg("recipe"));
    m.def("make_dumbbell", &make_dumbbell, py::arg("recipe") = DumbbellRecipe{});
    m.def("make_lumped_grid", &make_lumped_grid, py::arg("recipe"));
    m.def("plate_surrogate_recipe", &plate_surrogate_recipe, py::arg("stiffness") = 2e4);

    py::class_<MassProperties>(m, "MassProperties")
        .def_readonly("total_mass", &MassProperties::total_mass)
        .def_readonly("com", &MassProperties::com)
        .def_readonly("inertia_com", &MassProperties::inertia_com)
        .def_readonly("principal_moments", &MassProperties::principal_moments)
        .def_readonly("principal_axes", &MassProperties::principal_axes);
    m.def("mass_properties", &mass_properties, py::arg("model"));

    m.def(
        "load_model",
        [](const std::string& path) {
            LoadedModel lm = load_model(path);
            return py::make_tuple(lm.model, lm.basis ? py::cast(*lm.basis) : py::none());
        },
        py::arg("path"));
    m.def(
        "save_model",
        [](const std::string& path, const StructuralModel& model, py::object basis) {
            if (basis.is_none()) {
                save_model(path, model);
            } else {
                const ModalBasis b = basis.cast<ModalBasis>();
                save_model(path, model, &b);
            }
        },
        py::arg("path"), py::arg("model"), py::arg("basis") = py::none());

    // --- loads and configuration -------------------------------------------
    py::enum_<LoadFrame>(m, "LoadFrame")
        .value("GLOBAL_FIXED", LoadFrame::global_fixed)
        .value("BODY_FIXED", LoadFrame::body_fixed);

    py::class_<LoadEntry>(m, "LoadEntry")
        .def(py::init<>())
        .def_readwrite("node", &LoadEntry::node)
        .def_readwrite("direction", &LoadEntry::direction)
        .def_readwrite("frame", &LoadEntry::frame)
        .def_readwrite("magnitude", &LoadEntry::magnitude)
        .def("magnitude_at", &LoadEntry::magnitude_at);

    py::class_<LoadSpec>(m, "LoadSpec")
        .def(py::init<>())
        .def_readwrite("entries", &LoadSpec::entries);

    py::class_<SimulationConfig>(m, "SimulationConfig")
        .def(py::init<>())
        .def_readwrite("dt", &SimulationConfig::dt)
        .def_readwrite("t_end", &SimulationConfig::t_end)
        .def_readwrite("n_flex_modes", &SimulationConfig::n_flex_modes)
        .def_readwrite("damping_ratios", &SimulationConfig::damping_ratios)
        .def_readwrite("marker_ref", &SimulationConfig::marker_ref)
        .def_readwrite("marker_p", &SimulationConfig::marker_p)
        .def_readwrite("marker_q", &SimulationConfig::marker_q)
        .def_readwrite("loads", &SimulationConfig::loads)
        .def_readwrite("initial_modal_q", &SimulationConfig::initial_modal_q)
        .def_readwrite("initial_modal_qdot", &SimulationConfig::initial_modal_qdot)
        .def_readwrite("output_nodes", &SimulationConfig::output_nodes);

    // --- trajectories --------------------------------------------------------
    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("output_nodes", &Trajectory::output_nodes)
        .def_readonly("marker_consistency_warnings", &Trajectory::marker_consistency_warnings)
        .def_property_readonly("n_records",
                               [](const Trajectory& t) { return t.records.size(); })
        .def_property_readonly("times",
                               [](const Trajectory& t) {
                                   Eigen::VectorXd v(t.records.size());
                                   for (size_t i = 0; i < t.records.size(); ++i) {
                                       v(static_cast<Eigen::Index>(i)) = t.records[i].time;
                                   }
                                   return v;
                               })
        .def_property_readonly("omega_body",
                               [](const Trajectory& t) {
                                   return record_rows3(t, [](const TrajectoryRecord& r) {
                                       return r.omega_body;
                                   });
                               })
        .def_property_readonly("alpha_body",
                               [](const Trajectory& t) {
                                   return record_rows3(t, [](const TrajectoryRecord& r) {
                                       return r.alpha_body;
                                   });
                               })
        .def_property_readonly("origin",
                               [](const Trajectory& t) {
                                   return record_rows3(t, [](const TrajectoryRecord& r) {
                                       return r.origin;
                                   });
                               })
        .def_property_readonly("rotvec",
                               [](const Trajectory& t) {
                                   return record_rows3(t, [](const TrajectoryRecord& r) {
                                       return r.rotvec_total;
                                   });
                               })
        .def_property_readonly("modal_q", [](const Trajectory& t) {
            const Eigen::Index m = t.records.empty() ? 0 : t.records.front().modal_q.size();
            Eigen::MatrixXd out(t.records.size(), m);
            for (size_t i = 0; i < t.records.size(); ++i) {
                out.row(static_cast<Eigen::Index>(i)) = t.records[i].modal_q;
            }
            return out;
        });

    py::class_<PointSeries>(m, "PointSeries")
        .def_readonly("node", &PointSeries::node)
        .def_property_readonly("pos", [](const PointSeries& s) { return stack_vec3(s.pos); })
        .def_property_readonly("vel", [](const PointSeries& s) { return stack_vec3(s.vel); })
        .def_property_readonly("acc", [](const PointSeries& s) { return stack_vec3(s.acc); })
        .def_property_readonly("rbm_acc",
                               [](const PointSeries& s) { return stack_vec3(s.rbm_acc); });
    m.def("reconstruct_global", &reconstruct_global, py::arg("trajectory"), py::arg("model"),
          py::arg("query_nodes"));

    // --- solvers --------------------------------------------------------
    m.def("simulate", &simulate, py::arg("model"), py::arg("system"), py::arg("config"));
    m.def(
        "run_simulation",
        [](const StructuralModel& model, const SimulationConfig& config) {
            const ModalBasis basis = compute_modes(model, config.n_flex_modes);
            const ModalSystem system = build_modal_system(model, basis, config.damping_ratios);
            return simulate(model, system, config);
        },
        py::arg("model"), py::arg("config"),
        "compute modes, build the modal system, and run the flexible solver");

    py::class_<RigidBodyProps>(m, "RigidBodyProps")
        .def(py::init<>())
        .def_readwrite("mass", &RigidBodyProps::mass)
        .def_readwrite("inertia_principal", &RigidBodyProps::inertia_principal)
        .def_readwrite("com", &RigidBodyProps::com)
        .def_readwrite("principal_axes", &RigidBodyProps::principal_axes)
        .def_static("from_mass_properties", &RigidBodyProps::from_mass_properties)
        .def("validate", &RigidBodyProps::validate);

    py::class_<RigidState>(m, "RigidState")
        .def(py::init<>())
        .def_readwrite("com_pos", &RigidState::com_pos)
        .def_readwrite("com_vel", &RigidState::com_vel)
        .def_readwrite("omega_body", &RigidState::omega_body)
        .def_readwrite("base_rot", &RigidState::base_rot);

    m.def(
        "simulate_rigid",
        [](const RigidBodyProps& props, const Eigen::MatrixXd& node_coords,
           const LoadSpec& loads, double dt, double t_end, const RigidState& initial,
           const std::vector<int>& output_nodes) {
            std::vector<Eigen::Vector3d> coords;
            for (Eigen::Index i = 0; i < node_coords.rows(); ++i) {
                coords.emplace_back(node_coords.row(i).transpose());
            }
            return simulate_rigid(props, coords, loads, dt, t_end, initial, output_nodes);
        },
        py::arg("props"), py::arg("node_coords"), py::arg("loads"), py::arg("dt"),
        py::arg("t_end"), py::arg("initial"), py::arg("output_nodes"));
}
