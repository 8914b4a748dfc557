#include "fbdyn/factory.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

namespace fbdyn {

namespace {

void add_axial_spring(Eigen::MatrixXd& k_mat, const std::vector<Eigen::Vector3d>& nodes,
                      const SpringSpec& s) {
    if (s.node_i < 0 || s.node_j < 0 || s.node_i >= static_cast<int>(nodes.size()) ||
        s.node_j >= static_cast<int>(nodes.size()) || s.node_i == s.node_j) {
        throw ValidationError("spring references invalid node pair (" +
                              std::to_string(s.node_i) + "," + std::to_string(s.node_j) + ")");
    }
    if (!(s.stiffness > 0.0)) throw ValidationError("spring stiffness must be positive");
    const Eigen::Vector3d d = nodes[s.node_j] - nodes[s.node_i];
    const double len = d.norm();
    if (!(len > 0.0)) throw ValidationError("spring between coincident nodes");
    const Eigen::Matrix3d block = s.stiffness * (d / len) * (d / len).transpose();
    const int a = 3 * s.node_i, b = 3 * s.node_j;
    k_mat.block<3, 3>(a, a) += block;
    k_mat.block<3, 3>(b, b) += block;
    k_mat.block<3, 3>(a, b) -= block;
    k_mat.block<3, 3>(b, a) -= block;
}

StructuralModel assemble(const std::vector<Eigen::Vector3d>& nodes,
                         const std::vector<double>& masses,
                         const std::vector<SpringSpec>& springs, const std::string& name) {
    if (nodes.size() != masses.size()) {
        throw ValidationError("node and mass counts differ");
    }
    StructuralModel model;
    model.name = name;
    model.node_coords = nodes;
    const int n = model.n_dofs();
    model.mass_matrix = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < model.n_nodes(); ++i) {
        if (!(masses[i] > 0.0)) throw ValidationError("node masses must be positive");
        model.mass_matrix.block<3, 3>(3 * i, 3 * i) =
            masses[i] * Eigen::Matrix3d::Identity();
    }
    model.stiffness_matrix = Eigen::MatrixXd::Zero(n, n);
    for (const auto& s : springs) add_axial_spring(model.stiffness_matrix, nodes, s);
    model.validate();
    return model;
}

// Counts near-zero stiffness eigenvalues; a braced free-free truss has six.
int stiffness_null_dim(const StructuralModel& model) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.stiffness_matrix);
    if (es.info() != Eigen::Success) throw NumericalError("stiffness eigen-solve failed");
    const double tol = 1e-9 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    return static_cast<int>((es.eigenvalues().array() < tol).count());
}

}  // namespace

StructuralModel make_point_set(const PointSetRecipe& recipe) {
    return assemble(recipe.nodes, recipe.masses, recipe.springs, recipe.name);
}

StructuralModel make_dumbbell(const DumbbellRecipe& recipe) {
    if (!(recipe.length > 0.0) || !(recipe.height > 0.0)) {
        throw ValidationError("dumbbell geometry must be positive");
    }
    PointSetRecipe ps;
    ps.name = recipe.name;
    ps.nodes = {{-recipe.length / 2.0, 0.0, 0.0},
                {recipe.length / 2.0, 0.0, 0.0},
                {0.0, recipe.height, 0.0}};
    ps.masses = {recipe.end_mass, recipe.end_mass, recipe.apex_mass};
    ps.springs = {{0, 1, recipe.stiffness}, {0, 2, recipe.stiffness}, {1, 2, recipe.stiffness}};
    return make_point_set(ps);
}

StructuralModel make_lumped_grid(const LumpedGridRecipe& recipe) {
    if (recipe.nx < 2 || recipe.ny < 1 || recipe.nz < 1) {
        throw ValidationError("grid must have nx >= 2 and positive ny, nz");
    }
    if (!(recipe.total_mass > 0.0)) throw ValidationError("grid total mass must be positive");

    std::vector<Eigen::Vector3d> nodes;
    const auto coord = [](int i, int count, double extent, bool centered) {
        if (count == 1) return centered ? 0.0 : extent / 2.0;
        const double step = extent / (count - 1);
        return (centered ? -extent / 2.0 : 0.0) + i * step;
    };
    for (int ix = 0; ix < recipe.nx; ++ix) {
        for (int iy = 0; iy < recipe.ny; ++iy) {
            for (int iz = 0; iz < recipe.nz; ++iz) {
                nodes.emplace_back(coord(ix, recipe.nx, recipe.lx, true),
                                   coord(iy, recipe.ny, recipe.ly, true),
                                   coord(iz, recipe.nz, recipe.lz, false));
            }
        }
    }

    double attached = 0.0;
    for (const auto& [node, m] : recipe.attached_masses) {
        if (node < 0 || node >= static_cast<int>(nodes.size())) {
            throw ValidationError("attached mass references unknown node " + std::to_string(node));
        }
        if (!(m > 0.0)) throw ValidationError("attached masses must be positive");
        attached += m;
    }
    const double grid_mass = recipe.total_mass - attached;
    if (!(grid_mass > 0.0)) {
        throw ValidationError("attached masses exceed the requested total mass");
    }
    std::vector<double> masses(nodes.size(), grid_mass / static_cast<double>(nodes.size()));
    for (const auto& [node, m] : recipe.attached_masses) masses[node] += m;

    // Springs between all pairs within one cell diagonal (edges, face and
    // body diagonals), which braces every cell.
    const double dx = recipe.nx > 1 ? recipe.lx / (recipe.nx - 1) : 0.0;
    const double dy = recipe.ny > 1 ? recipe.ly / (recipe.ny - 1) : 0.0;
    const double dz = recipe.nz > 1 ? recipe.lz / (recipe.nz - 1) : 0.0;
    const double cutoff = 1.0001 * std::sqrt(dx * dx + dy * dy + dz * dz);
    std::vector<SpringSpec> springs;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
        for (int j = i + 1; j < static_cast<int>(nodes.size()); ++j) {
            if ((nodes[j] - nodes[i]).norm() <= cutoff) {
                springs.push_back({i, j, recipe.stiffness});
            }
        }
    }

    StructuralModel model = assemble(nodes, masses, springs, recipe.name);
    const int null_dim = stiffness_null_dim(model);
    if (null_dim != 6) {
        throw ValidationError("grid stiffness null space has dimension " +
                              std::to_string(null_dim) +
                              " (expected 6): grid is disconnected or under-braced");
    }
    return model;
}

LumpedGridRecipe plate_surrogate_recipe(double stiffness) {
    LumpedGridRecipe r;
    r.nx = 5;
    r.ny = 3;
    r.nz = 2;
    r.lx = 1000.0;
    r.ly = 50.0;
    r.lz = 10.0;
    r.total_mass = 0.0093;
    r.stiffness = stiffness;
    r.name = "plate-surrogate";
    // 0.001 Mg at each of the eight plate corners.
    for (int ix : {0, 4}) {
        for (int iy : {0, 2}) {
            for (int iz : {0, 1}) {
                r.attached_masses.emplace_back(r.node_index(ix, iy, iz), 0.001);
            }
        }
    }
    return r;
}

MassProperties mass_properties(const StructuralModel& model) {
    model.validate();
    MassProperties props;
    const int n = model.n_nodes();
    Eigen::VectorXd m(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int a = 0; a < 3; ++a) {
            for (int j = 0; j < n; ++j) s += model.mass_matrix(3 * i + a, 3 * j + a);
        }
        m(i) = s / 3.0;
    }
    props.total_mass = m.sum();
    props.com.setZero();
    for (int i = 0; i < n; ++i) props.com += m(i) * model.node_coords[i];
    props.com /= props.total_mass;
    props.inertia_com.setZero();
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d d = model.node_coords[i] - props.com;
        props.inertia_com +=
            m(i) * (d.squaredNorm() * Eigen::Matrix3d::Identity() - d * d.transpose());
    }
    const double scale = std::max(1e-300, props.inertia_com.cwiseAbs().maxCoeff());
    Eigen::Matrix3d off = props.inertia_com;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() < 1e-10 * scale) {
        // Already diagonal: keep the material axes so component labels are
        // preserved (no eigen-sort reordering).
        props.principal_moments = props.inertia_com.diagonal();
        props.principal_axes.setIdentity();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(props.inertia_com);
        props.principal_moments = es.eigenvalues();
        props.principal_axes = es.eigenvectors().transpose();
        if (props.principal_axes.determinant() < 0.0) props.principal_axes.row(2) *= -1.0;
    }
    return props;
}

// ---------------------------------------------------------------------------
// Model file format (text, self-describing; see README).

namespace {

class TokenReader {
public:
    TokenReader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

    std::string next_token() {
        std::string tok;
        while (true) {
            skip_space_and_comments();
            if (!(in_ >> tok)) {
                throw ValidationError(origin_ + ":" + std::to_string(line_) +
                                      ": unexpected end of file");
            }
            return tok;
        }
    }

    bool try_token(std::string& tok) {
        skip_space_and_comments();
        return static_cast<bool>(in_ >> tok);
    }

    double next_number() {
        const std::string tok = next_token();
        try {
            size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw ValidationError(origin_ + ":" + std::to_string(line_) +
                                  ": expected a number, got '" + tok + "'");
        }
    }

    long next_int() {
        const double v = next_number();
        const long i = std::lround(v);
        if (static_cast<double>(i) != v) {
            throw ValidationError(origin_ + ":" + std::to_string(line_) +
                                  ": expected an integer");
        }
        return i;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError(origin_ + ":" + std::to_string(line_) + ": " + msg);
    }

private:
    void skip_space_and_comments() {
        int c;
        while ((c = in_.peek()) != EOF) {
            if (c == '\n') {
                ++line_;
                in_.get();
            } else if (std::isspace(c)) {
                in_.get();
            } else if (c == '#') {
                std::string rest;
                std::getline(in_, rest);
                ++line_;
            } else {
                break;
            }
        }
    }

    std::istream& in_;
    std::string origin_;
    long line_ = 1;
};

Eigen::MatrixXd read_matrix(TokenReader& r, int n_rows, int n_cols) {
    const std::string kind = r.next_token();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_rows, n_cols);
    if (kind == "dense") {
        for (int i = 0; i < n_rows; ++i) {
            for (int j = 0; j < n_cols; ++j) m(i, j) = r.next_number();
        }
    } else if (kind == "sparse") {
        const long nnz = r.next_int();
        for (long k = 0; k < nnz; ++k) {
            const long i = r.next_int();
            const long j = r.next_int();
            const double v = r.next_number();
            if (i < 0 || j < 0 || i >= n_rows || j >= n_cols) {
                r.fail("sparse entry (" + std::to_string(i) + "," + std::to_string(j) +
                       ") out of range");
            }
            m(i, j) += v;
        }
    } else {
        r.fail("expected 'dense' or 'sparse', got '" + kind + "'");
    }
    return m;
}

std::string format_num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    out << "dense\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << format_num(m(i, j)) << (j + 1 == m.cols() ? "\n" : " ");
        }
    }
}

}  // namespace

LoadedModel load_model_stream(std::istream& in, const std::string& origin) {
    TokenReader r(in, origin);
    if (r.next_token() != "fbdyn-model") r.fail("not an fbdyn model file (bad magic)");
    const long version = r.next_int();
    if (version != 1) r.fail("unsupported model file version " + std::to_string(version));

    LoadedModel result;
    StructuralModel& model = result.model;
    bool have_nodes = false, have_mass = false, have_stiffness = false;
    std::optional<int> n_modes;
    int n_rigid = 0;
    Eigen::VectorXd freqs;
    Eigen::MatrixXd shapes, rigid_map;
    Eigen::Vector3d com = Eigen::Vector3d::Zero();

    std::string tok;
    while (r.try_token(tok)) {
        if (tok == "units") {
            const std::string units = r.next_token();
            if (units != "mm-Mg-s-N") r.fail("unsupported unit system '" + units + "'");
        } else if (tok == "name") {
            model.name = r.next_token();
        } else if (tok == "nodes") {
            const long n = r.next_int();
            if (n <= 0) r.fail("node count must be positive");
            model.node_coords.resize(n);
            for (long i = 0; i < n; ++i) {
                model.node_coords[i] = {r.next_number(), r.next_number(), r.next_number()};
            }
            have_nodes = true;
        } else if (tok == "mass" || tok == "stiffness" || tok == "damping") {
            if (!have_nodes) r.fail("'" + tok + "' section before 'nodes'");
            Eigen::MatrixXd m = read_matrix(r, model.n_dofs(), model.n_dofs());
            if (tok == "mass") {
                model.mass_matrix = std::move(m);
                have_mass = true;
            } else if (tok == "stiffness") {
                model.stiffness_matrix = std::move(m);
                have_stiffness = true;
            } else {
                model.damping_matrix = std::move(m);
            }
        } else if (tok == "modes") {
            if (!have_nodes) r.fail("'modes' section before 'nodes'");
            n_modes = static_cast<int>(r.next_int());
            n_rigid = static_cast<int>(r.next_int());
            if (*n_modes <= 0 || n_rigid < 0 || n_rigid > *n_modes) {
                r.fail("invalid mode counts");
            }
            if (r.next_token() != "com") r.fail("expected 'com' in modes section");
            com = {r.next_number(), r.next_number(), r.next_number()};
            if (r.next_token() != "frequencies") r.fail("expected 'frequencies'");
            freqs.resize(*n_modes);
            for (int i = 0; i < *n_modes; ++i) freqs(i) = r.next_number();
            if (r.next_token() != "rigid_map") r.fail("expected 'rigid_map'");
            rigid_map = read_matrix(r, 6, n_rigid);
            if (r.next_token() != "shapes") r.fail("expected 'shapes'");
            shapes = read_matrix(r, model.n_dofs(), *n_modes);
        } else if (tok == "end") {
            break;
        } else {
            r.fail("unknown section '" + tok + "'");
        }
    }
    if (!have_nodes || !have_mass || !have_stiffness) {
        r.fail("model file is missing nodes, mass, or stiffness");
    }
    model.validate();

    if (n_modes) {
        ModalBasis basis;
        basis.shapes = std::move(shapes);
        basis.frequencies = std::move(freqs);
        basis.n_rigid = n_rigid;
        basis.rigid_param_map = std::move(rigid_map);
        basis.com = com;
        basis.mass_normalized = true;
        const Eigen::MatrixXd gram =
            basis.shapes.transpose() * model.mass_matrix * basis.shapes;
        const double err =
            (gram - Eigen::MatrixXd::Identity(*n_modes, *n_modes)).cwiseAbs().maxCoeff();
        if (err > 1e-8) {
            throw ValidationError(origin + ": stored modes are not mass-orthonormal (max "
                                  "Gram deviation " + std::to_string(err) + ")");
        }
        result.basis = std::move(basis);
    }
    return result;
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file '" + path + "'");
    return load_model_stream(in, path);
}

void save_model(const std::string& path, const StructuralModel& model, const ModalBasis* basis) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write model file '" + path + "'");
    out << "fbdyn-model 1\n";
    out << "units mm-Mg-s-N\n";
    if (!model.name.empty()) out << "name " << model.name << "\n";
    out << "nodes " << model.n_nodes() << "\n";
    for (const auto& p : model.node_coords) {
        out << format_num(p.x()) << " " << format_num(p.y()) << " " << format_num(p.z()) << "\n";
    }
    out << "mass ";
    write_matrix(out, model.mass_matrix);
    out << "stiffness ";
    write_matrix(out, model.stiffness_matrix);
    if (model.damping_matrix) {
        out << "damping ";
        write_matrix(out, *model.damping_matrix);
    }
    if (basis) {
        out << "modes " << basis->n_modes() << " " << basis->n_rigid << "\n";
        out << "com " << format_num(basis->com.x()) << " " << format_num(basis->com.y()) << " "
            << format_num(basis->com.z()) << "\n";
        out << "frequencies";
        for (int i = 0; i < basis->n_modes(); ++i) out << " " << format_num(basis->frequencies(i));
        out << "\nrigid_map ";
        write_matrix(out, basis->rigid_param_map);
        out << "shapes ";
        write_matrix(out, basis->shapes);
    }
    out << "end\n";
    if (!out) throw ValidationError("failed while writing '" + path + "'");
}

}  // namespace fbdyn
