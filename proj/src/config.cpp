#include "fbdyn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace fbdyn {

void SimulationConfig::validate(const StructuralModel& model) const {
    if (!(dt > 0.0)) throw ValidationError("simulation.dt must be positive");
    if (t_end < 0.0) throw ValidationError("simulation.t_end must be non-negative");
    if (n_flex_modes < 0) throw ValidationError("simulation.n_flex_modes must be non-negative");
    if ((damping_ratios.array() < 0.0).any()) {
        throw ValidationError("simulation.damping_ratio entries must be non-negative");
    }
    const int n = model.n_nodes();
    for (int id : {marker_ref, marker_p, marker_q}) {
        if (id < 0 || id >= n) {
            throw ValidationError("markers: node " + std::to_string(id) + " does not exist");
        }
    }
    if (marker_ref == marker_p || marker_ref == marker_q || marker_p == marker_q) {
        throw ValidationError("markers: ref, p, q must be distinct nodes");
    }
    marker_triad(model);  // collinearity check
    loads.validate(n, t_end);
    for (const auto& [node, v] : initial_displacements) {
        (void)v;
        if (node < 0 || node >= n) {
            throw ValidationError("initial.disp_node: node " + std::to_string(node) +
                                  " does not exist");
        }
    }
    for (const auto& [node, v] : initial_velocities) {
        (void)v;
        if (node < 0 || node >= n) {
            throw ValidationError("initial.vel_node: node " + std::to_string(node) +
                                  " does not exist");
        }
    }
    for (int node : output_nodes) {
        if (node < 0 || node >= n) {
            throw ValidationError("output.nodes: node " + std::to_string(node) +
                                  " does not exist");
        }
    }
}

MarkerTriad SimulationConfig::marker_triad(const StructuralModel& model) const {
    const Eigen::Vector3d r = model.node_coords.at(marker_ref);
    return MarkerTriad::from_offsets(model.node_coords.at(marker_p) - r,
                                     model.node_coords.at(marker_q) - r, marker_ref, marker_p,
                                     marker_q);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> SimulationConfig::initial_state(
    const StructuralModel& model, const ModalBasis& basis) const {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(model.n_dofs());
    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(model.n_dofs());
    for (const auto& [node, u] : initial_displacements) x0.segment<3>(3 * node) = u;
    for (const auto& [node, u] : initial_velocities) v0.segment<3>(3 * node) = u;
    Eigen::VectorXd q0 = Eigen::VectorXd::Zero(basis.n_modes());
    Eigen::VectorXd qd0 = Eigen::VectorXd::Zero(basis.n_modes());
    for (const auto& [mode, v] : initial_modal_q) {
        if (mode < 0 || mode >= basis.n_modes()) {
            throw ValidationError("initial.modal_q: mode " + std::to_string(mode) +
                                  " out of range");
        }
        q0(mode) = v;
    }
    for (const auto& [mode, v] : initial_modal_qdot) {
        if (mode < 0 || mode >= basis.n_modes()) {
            throw ValidationError("initial.modal_qdot: mode " + std::to_string(mode) +
                                  " out of range");
        }
        qd0(mode) = v;
    }
    x0 += basis.shapes * q0;
    v0 += basis.shapes * qd0;
    return {x0, v0};
}

// ---------------------------------------------------------------------------
// Scenario file: INI-style sections of key = value lines. Repeated [load]
// sections append load entries; repeated keys append where that makes sense.

namespace {

struct IniLine {
    std::string section;
    int section_count = 0;  // occurrence index of this section header
    std::string key;
    std::string value;
    long line_no = 0;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<IniLine> parse_ini(const std::string& text, const std::string& origin) {
    std::vector<IniLine> lines;
    std::istringstream in(text);
    std::string raw, section;
    int section_count = -1;
    std::map<std::string, int> section_seen;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find_first_of("#;");
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ValidationError(origin + ":" + std::to_string(line_no) +
                                      ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            section_count = section_seen[section]++;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(origin + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
        }
        IniLine entry;
        entry.section = section;
        entry.section_count = section_count;
        entry.key = trim(line.substr(0, eq));
        entry.value = trim(line.substr(eq + 1));
        entry.line_no = line_no;
        if (entry.key.empty()) {
            throw ValidationError(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        lines.push_back(std::move(entry));
    }
    return lines;
}

[[noreturn]] void fail_at(const std::string& origin, const IniLine& l, const std::string& msg) {
    throw ValidationError(origin + ":" + std::to_string(l.line_no) + ": " + msg);
}

double to_num(const std::string& origin, const IniLine& l, const std::string& tok) {
    try {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        fail_at(origin, l, "expected a number, got '" + tok + "'");
    }
}

int to_int(const std::string& origin, const IniLine& l, const std::string& tok) {
    const double v = to_num(origin, l, tok);
    const long i = std::lround(v);
    if (static_cast<double>(i) != v) fail_at(origin, l, "expected an integer, got '" + tok + "'");
    return static_cast<int>(i);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::vector<double> num_list(const std::string& origin, const IniLine& l) {
    std::vector<double> vals;
    for (const auto& tok : split_ws(l.value)) vals.push_back(to_num(origin, l, tok));
    return vals;
}

Eigen::Vector3d vec3_value(const std::string& origin, const IniLine& l) {
    const auto vals = num_list(origin, l);
    if (vals.size() != 3) fail_at(origin, l, "expected three numbers");
    return {vals[0], vals[1], vals[2]};
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
    Scenario sc;
    std::string model_kind;
    LumpedGridRecipe grid;
    DumbbellRecipe dumbbell;
    PointSetRecipe points;
    RigidPropsSpec rigid;
    bool saw_rigid = false;

    std::vector<LoadEntry> load_entries;
    int max_load_index = -1;
    auto load_at = [&](int idx) -> LoadEntry& {
        while (static_cast<int>(load_entries.size()) <= idx) load_entries.emplace_back();
        max_load_index = std::max(max_load_index, idx);
        return load_entries[idx];
    };

    for (const IniLine& l : parse_ini(text, origin)) {
        if (l.section == "model") {
            if (l.key == "kind") model_kind = l.value;
            else if (l.key == "file") sc.model_file = l.value;
            else if (l.key == "name") { grid.name = dumbbell.name = points.name = l.value; }
            else if (l.key == "nx") grid.nx = to_int(origin, l, l.value);
            else if (l.key == "ny") grid.ny = to_int(origin, l, l.value);
            else if (l.key == "nz") grid.nz = to_int(origin, l, l.value);
            else if (l.key == "lx") grid.lx = to_num(origin, l, l.value);
            else if (l.key == "ly") grid.ly = to_num(origin, l, l.value);
            else if (l.key == "lz") grid.lz = to_num(origin, l, l.value);
            else if (l.key == "total_mass") grid.total_mass = to_num(origin, l, l.value);
            else if (l.key == "stiffness") {
                const double k = to_num(origin, l, l.value);
                grid.stiffness = dumbbell.stiffness = k;
            } else if (l.key == "attached_mass") {
                const auto v = num_list(origin, l);
                if (v.size() != 2) fail_at(origin, l, "expected 'node mass'");
                grid.attached_masses.emplace_back(static_cast<int>(v[0]), v[1]);
            } else if (l.key == "length") dumbbell.length = to_num(origin, l, l.value);
            else if (l.key == "height") dumbbell.height = to_num(origin, l, l.value);
            else if (l.key == "end_mass") dumbbell.end_mass = to_num(origin, l, l.value);
            else if (l.key == "apex_mass") dumbbell.apex_mass = to_num(origin, l, l.value);
            else if (l.key == "node") {
                const auto v = num_list(origin, l);
                if (v.size() != 4) fail_at(origin, l, "expected 'x y z mass'");
                points.nodes.emplace_back(v[0], v[1], v[2]);
                points.masses.push_back(v[3]);
            } else if (l.key == "spring") {
                const auto v = num_list(origin, l);
                if (v.size() != 3) fail_at(origin, l, "expected 'i j stiffness'");
                points.springs.push_back(
                    {static_cast<int>(v[0]), static_cast<int>(v[1]), v[2]});
            } else {
                fail_at(origin, l, "unknown [model] key '" + l.key + "'");
            }
        } else if (l.section == "simulation") {
            if (l.key == "dt") sc.sim.dt = to_num(origin, l, l.value);
            else if (l.key == "t_end") sc.sim.t_end = to_num(origin, l, l.value);
            else if (l.key == "n_flex_modes") sc.sim.n_flex_modes = to_int(origin, l, l.value);
            else if (l.key == "damping_ratio" || l.key == "damping_ratios") {
                const auto v = num_list(origin, l);
                sc.sim.damping_ratios =
                    Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
            } else if (l.key == "seed") sc.sim.seed = static_cast<std::uint64_t>(
                to_num(origin, l, l.value));
            else fail_at(origin, l, "unknown [simulation] key '" + l.key + "'");
        } else if (l.section == "markers") {
            if (l.key == "ref") sc.sim.marker_ref = to_int(origin, l, l.value);
            else if (l.key == "p") sc.sim.marker_p = to_int(origin, l, l.value);
            else if (l.key == "q") sc.sim.marker_q = to_int(origin, l, l.value);
            else fail_at(origin, l, "unknown [markers] key '" + l.key + "'");
        } else if (l.section == "load") {
            LoadEntry& e = load_at(l.section_count);
            if (l.key == "node") e.node = to_int(origin, l, l.value);
            else if (l.key == "direction") {
                Eigen::Vector3d d = vec3_value(origin, l);
                const double n = d.norm();
                if (!(n > 0.0)) fail_at(origin, l, "zero load direction");
                if (std::abs(n - 1.0) > 1e-6) fail_at(origin, l, "direction is not unit length");
                e.direction = d / n;
            } else if (l.key == "frame") {
                if (l.value == "global") e.frame = LoadFrame::global_fixed;
                else if (l.value == "body") e.frame = LoadFrame::body_fixed;
                else fail_at(origin, l, "load frame must be 'global' or 'body'");
            } else if (l.key == "points") {
                const auto v = num_list(origin, l);
                if (v.size() < 2 || v.size() % 2 != 0) {
                    fail_at(origin, l, "expected 't0 f0 t1 f1 ...' pairs");
                }
                e.magnitude.clear();
                for (size_t i = 0; i < v.size(); i += 2) e.magnitude.emplace_back(v[i], v[i + 1]);
            } else {
                fail_at(origin, l, "unknown [load] key '" + l.key + "'");
            }
        } else if (l.section == "initial") {
            const auto v = num_list(origin, l);
            if (l.key == "modal_q" || l.key == "modal_qdot") {
                if (v.size() != 2) fail_at(origin, l, "expected 'mode value'");
                auto& dst = l.key == "modal_q" ? sc.sim.initial_modal_q
                                               : sc.sim.initial_modal_qdot;
                dst.emplace_back(static_cast<int>(v[0]), v[1]);
            } else if (l.key == "disp_node" || l.key == "vel_node") {
                if (v.size() != 4) fail_at(origin, l, "expected 'node x y z'");
                auto& dst = l.key == "disp_node" ? sc.sim.initial_displacements
                                                 : sc.sim.initial_velocities;
                dst.emplace_back(static_cast<int>(v[0]), Eigen::Vector3d(v[1], v[2], v[3]));
            } else {
                fail_at(origin, l, "unknown [initial] key '" + l.key + "'");
            }
        } else if (l.section == "output") {
            if (l.key == "nodes") {
                for (const auto& tok : split_ws(l.value)) {
                    sc.sim.output_nodes.push_back(to_int(origin, l, tok));
                }
            } else {
                fail_at(origin, l, "unknown [output] key '" + l.key + "'");
            }
        } else if (l.section == "rigid") {
            saw_rigid = true;
            if (l.key == "mass") rigid.mass = to_num(origin, l, l.value);
            else if (l.key == "inertia") rigid.inertia = vec3_value(origin, l);
            else if (l.key == "com") rigid.com = vec3_value(origin, l);
            else fail_at(origin, l, "unknown [rigid] key '" + l.key + "'");
        } else if (l.section.empty()) {
            fail_at(origin, l, "key outside any section");
        } else {
            fail_at(origin, l, "unknown section [" + l.section + "]");
        }
    }

    if (model_kind == "grid" || model_kind == "lumped-grid") sc.grid = grid;
    else if (model_kind == "plate-surrogate") {
        LumpedGridRecipe r = plate_surrogate_recipe(grid.stiffness);
        r.name = grid.name.empty() ? r.name : grid.name;
        sc.grid = r;
    } else if (model_kind == "dumbbell") sc.dumbbell = dumbbell;
    else if (model_kind == "points" || model_kind == "point-set") sc.points = points;
    else if (model_kind == "file") {
        if (!sc.model_file) throw ValidationError(origin + ": model.kind=file needs model.file");
    } else if (!model_kind.empty()) {
        throw ValidationError(origin + ": unknown model.kind '" + model_kind + "'");
    }
    if (saw_rigid) sc.rigid = rigid;
    for (const LoadEntry& e : load_entries) sc.sim.loads.entries.push_back(e);
    return sc;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path);
}

StructuralModel build_scenario_model(const Scenario& scenario) {
    if (scenario.model_file) return load_model(*scenario.model_file).model;
    if (scenario.grid) return make_lumped_grid(*scenario.grid);
    if (scenario.dumbbell) return make_dumbbell(*scenario.dumbbell);
    if (scenario.points) return make_point_set(*scenario.points);
    throw ValidationError("no model source: provide a [model] section or --model");
}

Scenario recipe_from_string(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::string body;
    if (colon != std::string::npos) {
        body = text.substr(colon + 1);
        std::replace(body.begin(), body.end(), ',', '\n');
    }
    return parse_scenario_text("[model]\nkind = " + kind + "\n" + body, "--recipe");
}

}  // namespace fbdyn
