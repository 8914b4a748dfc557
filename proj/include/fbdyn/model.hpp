#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fbdyn/types.hpp"

namespace fbdyn {

// Discretized structural model over translational DOFs (3 per node).
// Units are mm-Mg-s-N throughout: mass in Mg, stiffness in N/mm,
// damping in N*s/mm, coordinates in mm. Node i owns DOFs 3i..3i+2.
struct StructuralModel {
    std::vector<Eigen::Vector3d> node_coords;
    Eigen::MatrixXd mass_matrix;
    Eigen::MatrixXd stiffness_matrix;
    std::optional<Eigen::MatrixXd> damping_matrix;
    std::string name;

    int n_nodes() const { return static_cast<int>(node_coords.size()); }
    int n_dofs() const { return 3 * n_nodes(); }

    // Checks dimensions, symmetry (1e-9 relative) and positive-definite mass.
    void validate() const;
};

// Mode-shape matrix with the rigid block first. rigid_param_map recovers the
// (translation; rotation about com) amplitudes of a rigid modal coordinate
// vector: [t; dphi] = rigid_param_map * q_R.
struct ModalBasis {
    Eigen::MatrixXd shapes;          // n_dofs x n_modes
    Eigen::VectorXd frequencies;     // Hz, first n_rigid entries are 0
    int n_rigid = 0;
    bool mass_normalized = true;
    Eigen::MatrixXd rigid_param_map; // 6 x n_rigid
    Eigen::Vector3d com = Eigen::Vector3d::Zero();

    int n_modes() const { return static_cast<int>(shapes.cols()); }
    Eigen::MatrixXd rigid_shapes() const { return shapes.leftCols(n_rigid); }
};

// Modal coordinates and rates packed as eta = [q; qdot].
class ModalState {
public:
    explicit ModalState(int n_modes) : packed_(Eigen::VectorXd::Zero(2 * n_modes)) {}
    explicit ModalState(Eigen::VectorXd packed);
    static ModalState from_parts(const Eigen::VectorXd& coords, const Eigen::VectorXd& rates);

    int n_modes() const { return static_cast<int>(packed_.size()) / 2; }
    const Eigen::VectorXd& packed() const { return packed_; }
    Eigen::VectorXd coords() const { return packed_.head(n_modes()); }
    Eigen::VectorXd rates() const { return packed_.tail(n_modes()); }

private:
    Eigen::VectorXd packed_;
};

// Reduced system: modal matrices, the state matrix
// H = [0 I; -Mq^-1 Kq, -Mq^-1 Cq], and the cached inverse-expansion operator
// projection = Mq^-1 Psi^T Mx.
struct ModalSystem {
    Eigen::MatrixXd modal_mass;
    Eigen::MatrixXd modal_stiffness;
    Eigen::MatrixXd modal_damping;
    Eigen::MatrixXd state_matrix;
    ModalBasis basis;
    Eigen::MatrixXd projection;
    Eigen::MatrixXd modal_mass_inv;

    int n_modes() const { return static_cast<int>(modal_mass.rows()); }
};

// Geometric rigid modes: three unit translations and three infinitesimal
// rotations about the center of mass, mass-orthonormalized. Requires at
// least three non-collinear nodes (throws ValidationError otherwise).
// The second return value maps rigid modal coordinates to raw
// (translation; rotation) amplitudes.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> rigid_modes_geometric(const StructuralModel& model);

// All generalized eigen-frequencies of (Kx, Mx) in Hz, ascending. Used for
// mode reports; compute_modes consumes the same solve internally.
Eigen::VectorXd eigen_frequencies(const StructuralModel& model);

// Mass-normalized basis: geometric rigid modes first (rank-adaptive for
// degenerate point sets), then the n_flex lowest flexible modes of
// Kx phi = omega^2 Mx phi, mass-orthogonalized against the rigid block.
ModalBasis compute_modes(const StructuralModel& model, int n_flex);

// Builds Mq, Kq, Cq and the state matrix. If the model carries no damping
// matrix, Cq is diagonal with entries 2*zeta_i*omega_i. damping_ratios may
// be empty (undamped), a single value (uniform) or one value per mode.
ModalSystem build_modal_system(const StructuralModel& model, const ModalBasis& basis,
                               const Eigen::VectorXd& damping_ratios);

// x = Psi q, xdot = Psi qdot.
std::pair<Eigen::VectorXd, Eigen::VectorXd> modal_expand(const ModalBasis& basis,
                                                         const ModalState& state);

// q = Mq^-1 Psi^T Mx x and likewise for rates; exact inverse on span(Psi),
// mass-weighted projection elsewhere.
ModalState inverse_modal_expand(const ModalSystem& system, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& x_dot);

// f_q = Psi^T f_x.
Eigen::VectorXd project_force(const ModalBasis& basis, const Eigen::VectorXd& f_x);

// etadot = H eta + [0; Mq^-1 f_q].
Eigen::VectorXd modal_state_derivative(const ModalSystem& system, const Eigen::VectorXd& eta,
                                       const Eigen::VectorXd& f_q);

}  // namespace fbdyn
