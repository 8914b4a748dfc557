#include "fbdyn/model.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace fbdyn {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
    const double scale = std::max(1e-300, m.cwiseAbs().maxCoeff());
    Eigen::Index worst_i = 0, worst_j = 0;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
            const double d = std::abs(m(i, j) - m(j, i));
            if (d > worst) {
                worst = d;
                worst_i = i;
                worst_j = j;
            }
        }
    }
    if (worst > 1e-9 * scale) {
        throw ValidationError(std::string(what) + " matrix asymmetric: entry (" +
                              std::to_string(worst_i) + "," + std::to_string(worst_j) +
                              ") differs from its transpose by " + std::to_string(worst));
    }
}

// Nodal translational masses by row lumping, averaged over the three
// directions (exact for the lumped matrices the factory produces).
Eigen::VectorXd nodal_masses(const StructuralModel& model) {
    const int n = model.n_nodes();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int a = 0; a < 3; ++a) {
            for (int j = 0; j < n; ++j) s += model.mass_matrix(3 * i + a, 3 * j + a);
        }
        m(i) = s / 3.0;
    }
    return m;
}

Eigen::Vector3d mass_center(const StructuralModel& model) {
    const Eigen::VectorXd m = nodal_masses(model);
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (int i = 0; i < model.n_nodes(); ++i) c += m(i) * model.node_coords[i];
    return c / m.sum();
}
}  // namespace

void StructuralModel::validate() const {
    const int n = n_dofs();
    if (n == 0) throw ValidationError("model has no nodes");
    if (mass_matrix.rows() != n || mass_matrix.cols() != n) {
        throw ValidationError("mass matrix size does not match 3 x node count");
    }
    if (stiffness_matrix.rows() != n || stiffness_matrix.cols() != n) {
        throw ValidationError("stiffness matrix size does not match 3 x node count");
    }
    if (damping_matrix && (damping_matrix->rows() != n || damping_matrix->cols() != n)) {
        throw ValidationError("damping matrix size does not match 3 x node count");
    }
    check_symmetric(mass_matrix, "mass");
    check_symmetric(stiffness_matrix, "stiffness");
    if (damping_matrix) check_symmetric(*damping_matrix, "damping");
    Eigen::LLT<Eigen::MatrixXd> llt(mass_matrix);
    if (llt.info() != Eigen::Success) {
        throw ValidationError("mass matrix is not positive definite");
    }
}

ModalState::ModalState(Eigen::VectorXd packed) : packed_(std::move(packed)) {
    if (packed_.size() % 2 != 0) throw ValidationError("modal state vector length must be even");
}

ModalState ModalState::from_parts(const Eigen::VectorXd& coords, const Eigen::VectorXd& rates) {
    if (coords.size() != rates.size()) {
        throw ValidationError("modal coordinate and rate lengths differ");
    }
    Eigen::VectorXd packed(2 * coords.size());
    packed << coords, rates;
    return ModalState(std::move(packed));
}

namespace {
// Mass-orthonormalizes the raw rigid columns, dropping dependent ones.
// Returns the kept shapes and the 6 x rank coefficient matrix G with
// shapes = raw * G.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> orthonormalize_rigid(
    const Eigen::MatrixXd& raw, const Eigen::MatrixXd& mass) {
    const Eigen::Index n = raw.rows();
    Eigen::MatrixXd shapes(n, 6);
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(6, 6);
    int rank = 0;
    for (int j = 0; j < 6; ++j) {
        Eigen::VectorXd v = raw.col(j);
        Eigen::VectorXd g = Eigen::VectorXd::Unit(6, j);
        const double before = std::sqrt(v.dot(mass * v));
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i < rank; ++i) {
                const double c = shapes.col(i).dot(mass * v);
                v -= c * shapes.col(i);
                g -= c * coeffs.col(i);
            }
        }
        const double after = std::sqrt(v.dot(mass * v));
        if (before == 0.0 || after < 1e-7 * before) continue;  // dependent column
        shapes.col(rank) = v / after;
        coeffs.col(rank) = g / after;
        ++rank;
    }
    return {shapes.leftCols(rank), coeffs.leftCols(rank)};
}

// Raw rigid columns: unit translations, then rotations e_j x (r - com).
Eigen::MatrixXd raw_rigid_columns(const StructuralModel& model, const Eigen::Vector3d& com) {
    const int n = model.n_nodes();
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(3 * n, 6);
    for (int i = 0; i < n; ++i) {
        raw.block<3, 3>(3 * i, 0).setIdentity();
        const Eigen::Vector3d d = model.node_coords[i] - com;
        for (int j = 0; j < 3; ++j) {
            raw.block<3, 1>(3 * i, 3 + j) = Eigen::Vector3d::Unit(j).cross(d);
        }
    }
    return raw;
}
}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> rigid_modes_geometric(const StructuralModel& model) {
    model.validate();
    const Eigen::Vector3d com = mass_center(model);
    auto [shapes, coeffs] = orthonormalize_rigid(raw_rigid_columns(model, com), model.mass_matrix);
    if (shapes.cols() != 6) {
        throw ValidationError("rigid mode construction is rank deficient: geometry is collinear "
                              "or degenerate (" + std::to_string(shapes.cols()) +
                              " of 6 modes independent)");
    }
    return {shapes, coeffs};
}

Eigen::VectorXd eigen_frequencies(const StructuralModel& model) {
    model.validate();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.stiffness_matrix,
                                                                     model.mass_matrix);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("generalized eigen-solve failed");
    }
    return solver.eigenvalues().cwiseMax(0.0).cwiseSqrt() / kTwoPi;
}

ModalBasis compute_modes(const StructuralModel& model, int n_flex) {
    model.validate();
    if (n_flex < 0) throw ValidationError("n_flex must be non-negative");

    const Eigen::Vector3d com = mass_center(model);
    auto [rigid, coeffs] = orthonormalize_rigid(raw_rigid_columns(model, com), model.mass_matrix);
    const int n_rigid = static_cast<int>(rigid.cols());

    ModalBasis basis;
    basis.com = com;
    basis.n_rigid = n_rigid;
    basis.rigid_param_map = coeffs;
    basis.mass_normalized = true;

    if (n_flex == 0) {
        basis.shapes = rigid;
        basis.frequencies = Eigen::VectorXd::Zero(n_rigid);
        return basis;
    }
    if (n_rigid + n_flex > model.n_dofs()) {
        throw ValidationError("requested more modes than DOFs: " + std::to_string(n_rigid) +
                              " rigid + " + std::to_string(n_flex) + " flexible > " +
                              std::to_string(model.n_dofs()));
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.stiffness_matrix,
                                                                     model.mass_matrix);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("generalized eigen-solve failed");
    }
    const Eigen::VectorXd freqs = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt() / kTwoPi;

    // Zero-frequency classification against the highest frequency retained.
    const int retain = std::min<int>(n_rigid + n_flex, model.n_dofs());
    const double zero_tol = 1e-6 * freqs(retain - 1);
    std::vector<int> flexible;
    for (int i = 0; i < freqs.size(); ++i) {
        if (freqs(i) >= zero_tol && freqs(i) > 0.0) flexible.push_back(i);
    }
    if (static_cast<int>(flexible.size()) < n_flex) {
        throw ValidationError("model has only " + std::to_string(flexible.size()) +
                              " flexible modes, " + std::to_string(n_flex) + " requested");
    }

    basis.shapes.resize(model.n_dofs(), n_rigid + n_flex);
    basis.shapes.leftCols(n_rigid) = rigid;
    basis.frequencies = Eigen::VectorXd::Zero(n_rigid + n_flex);
    for (int k = 0; k < n_flex; ++k) {
        Eigen::VectorXd phi = solver.eigenvectors().col(flexible[k]);
        // Strip any rigid contamination, then renormalize in the mass norm.
        for (int pass = 0; pass < 2; ++pass) {
            phi -= rigid * (rigid.transpose() * (model.mass_matrix * phi));
        }
        const double nrm = std::sqrt(phi.dot(model.mass_matrix * phi));
        if (!(nrm > 0.0)) throw NumericalError("flexible mode degenerated during projection");
        phi /= nrm;
        basis.shapes.col(n_rigid + k) = phi;
        const double w2 = phi.dot(model.stiffness_matrix * phi);
        basis.frequencies(n_rigid + k) = std::sqrt(std::max(0.0, w2)) / kTwoPi;
    }
    return basis;
}

ModalSystem build_modal_system(const StructuralModel& model, const ModalBasis& basis,
                               const Eigen::VectorXd& damping_ratios) {
    model.validate();
    const int m = basis.n_modes();
    if (basis.shapes.rows() != model.n_dofs()) {
        throw ValidationError("modal basis does not match model dimension");
    }
    Eigen::VectorXd zeta;
    if (damping_ratios.size() == 0) {
        zeta = Eigen::VectorXd::Zero(m);
    } else if (damping_ratios.size() == 1) {
        zeta = Eigen::VectorXd::Constant(m, damping_ratios(0));
    } else if (damping_ratios.size() == m) {
        zeta = damping_ratios;
    } else {
        throw ValidationError("damping ratio list must be empty, scalar, or one per mode");
    }
    if ((zeta.array() < 0.0).any()) throw ValidationError("damping ratios must be non-negative");

    ModalSystem sys;
    sys.basis = basis;
    sys.modal_mass = basis.shapes.transpose() * model.mass_matrix * basis.shapes;
    sys.modal_stiffness = basis.shapes.transpose() * model.stiffness_matrix * basis.shapes;
    if (model.damping_matrix) {
        sys.modal_damping = basis.shapes.transpose() * (*model.damping_matrix) * basis.shapes;
    } else {
        sys.modal_damping = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            sys.modal_damping(i, i) = 2.0 * zeta(i) * kTwoPi * basis.frequencies(i);
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.modal_mass);
    if (!lu.isInvertible()) throw ValidationError("modal mass matrix is singular");
    sys.modal_mass_inv = lu.inverse();

    sys.state_matrix = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    sys.state_matrix.topRightCorner(m, m).setIdentity();
    sys.state_matrix.bottomLeftCorner(m, m) = -sys.modal_mass_inv * sys.modal_stiffness;
    sys.state_matrix.bottomRightCorner(m, m) = -sys.modal_mass_inv * sys.modal_damping;

    sys.projection = sys.modal_mass_inv * basis.shapes.transpose() * model.mass_matrix;
    return sys;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> modal_expand(const ModalBasis& basis,
                                                         const ModalState& state) {
    if (state.n_modes() != basis.n_modes()) {
        throw ValidationError("modal state length does not match basis");
    }
    return {basis.shapes * state.coords(), basis.shapes * state.rates()};
}

ModalState inverse_modal_expand(const ModalSystem& system, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& x_dot) {
    if (x.size() != system.projection.cols() || x_dot.size() != system.projection.cols()) {
        throw ValidationError("physical state length does not match model");
    }
    return ModalState::from_parts(system.projection * x, system.projection * x_dot);
}

Eigen::VectorXd project_force(const ModalBasis& basis, const Eigen::VectorXd& f_x) {
    if (f_x.size() != basis.shapes.rows()) {
        throw ValidationError("force vector length does not match model");
    }
    return basis.shapes.transpose() * f_x;
}

Eigen::VectorXd modal_state_derivative(const ModalSystem& system, const Eigen::VectorXd& eta,
                                       const Eigen::VectorXd& f_q) {
    const int m = system.n_modes();
    if (eta.size() != 2 * m || f_q.size() != m) {
        throw ValidationError("state or force length does not match modal system");
    }
    Eigen::VectorXd rate = system.state_matrix * eta;
    rate.tail(m) += system.modal_mass_inv * f_q;
    return rate;
}

}  // namespace fbdyn
