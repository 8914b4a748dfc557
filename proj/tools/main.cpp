#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbdyn/config.hpp"
#include "fbdyn/factory.hpp"
#include "fbdyn/frame.hpp"
#include "fbdyn/model.hpp"
#include "fbdyn/rigid.hpp"
#include "fbdyn/trajectory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string model_path;
    std::string recipe;
    std::string config_path;
    std::string out_dir = ".";
    double dt_override = 0.0;
    double t_end_override = -1.0;
    bool quiet = false;
};

fbdyn::Scenario load_scenario(const CommonOpts& opts) {
    fbdyn::Scenario sc;
    if (!opts.config_path.empty()) sc = fbdyn::parse_scenario_file(opts.config_path);
    if (!opts.recipe.empty()) {
        fbdyn::Scenario r = fbdyn::recipe_from_string(opts.recipe);
        r.sim = sc.sim;
        r.rigid = sc.rigid;
        sc = r;
    }
    if (!opts.model_path.empty()) {
        sc.model_file = opts.model_path;
        sc.grid.reset();
        sc.dumbbell.reset();
        sc.points.reset();
    }
    if (opts.dt_override > 0.0) sc.sim.dt = opts.dt_override;
    if (opts.t_end_override >= 0.0) sc.sim.t_end = opts.t_end_override;
    return sc;
}

void default_outputs(fbdyn::SimulationConfig& sim) {
    if (sim.output_nodes.empty()) {
        sim.output_nodes = {sim.marker_ref, sim.marker_p, sim.marker_q};
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fbdyn::ValidationError("cannot write '" + path.string() + "'");
    out << content;
}

void write_trajectory_csvs(const fbdyn::Trajectory& traj, const fbdyn::StructuralModel& model,
                           const fs::path& dir, bool with_modal, const std::string& trailer) {
    fs::create_directories(dir);
    {
        std::ostringstream os;
        fbdyn::write_frame_csv(os, traj);
        os << trailer;
        write_file(dir / "frame.csv", os.str());
    }
    {
        std::ostringstream os;
        fbdyn::write_points_csv(os, traj, model);
        os << trailer;
        write_file(dir / "points.csv", os.str());
    }
    if (with_modal) {
        std::ostringstream os;
        fbdyn::write_modal_csv(os, traj);
        os << trailer;
        write_file(dir / "modal.csv", os.str());
    }
}

int cmd_modes(const CommonOpts& opts) {
    const fbdyn::Scenario sc = load_scenario(opts);
    const fbdyn::StructuralModel model = fbdyn::build_scenario_model(sc);
    const Eigen::VectorXd freqs = fbdyn::eigen_frequencies(model);
    const double zero_tol = 1e-6 * std::max(1e-300, freqs.maxCoeff());
    std::ostringstream os;
    os << "mode,frequency_hz,kind\n";
    for (Eigen::Index i = 0; i < freqs.size(); ++i) {
        os << (i + 1) << ',' << fbdyn::format_double(freqs(i)) << ','
           << (freqs(i) < zero_tol ? "rigid" : "flexible") << '\n';
    }
    if (!opts.quiet) std::cout << os.str();
    if (opts.out_dir != ".") {
        fs::create_directories(opts.out_dir);
        write_file(fs::path(opts.out_dir) / "modes.csv", os.str());
    }
    return 0;
}

int cmd_simulate(const CommonOpts& opts) {
    fbdyn::Scenario sc = load_scenario(opts);
    const fbdyn::StructuralModel model = fbdyn::build_scenario_model(sc);
    default_outputs(sc.sim);
    sc.sim.validate(model);
    const fbdyn::ModalBasis basis = fbdyn::compute_modes(model, sc.sim.n_flex_modes);
    const fbdyn::ModalSystem system =
        fbdyn::build_modal_system(model, basis, sc.sim.damping_ratios);
    try {
        const fbdyn::Trajectory traj = fbdyn::simulate(model, system, sc.sim);
        write_trajectory_csvs(traj, model, opts.out_dir, true, "");
        if (!opts.quiet) {
            std::cout << "simulated " << (traj.size() - 1) << " steps to t = "
                      << fbdyn::format_double(traj.records.back().time) << " s, wrote "
                      << opts.out_dir << "/{frame,points,modal}.csv\n";
            if (traj.marker_consistency_warnings > 0) {
                std::cout << "note: " << traj.marker_consistency_warnings
                          << " marker-velocity consistency warnings\n";
            }
        }
        return 0;
    } catch (const fbdyn::DivergenceError& e) {
        write_trajectory_csvs(e.partial_trajectory, model, opts.out_dir, true,
                              std::string("# diverged: ") + e.what() + "\n");
        std::cerr << "error: " << e.what() << " (partial output flushed)\n";
        return 1;
    }
}

int cmd_rigid(const CommonOpts& opts) {
    fbdyn::Scenario sc = load_scenario(opts);
    if (!sc.has_model()) {
        throw fbdyn::ValidationError(
            "rigid: a model is required for node coordinates (and derived mass properties)");
    }
    const fbdyn::StructuralModel model = fbdyn::build_scenario_model(sc);
    default_outputs(sc.sim);
    sc.sim.validate(model);

    fbdyn::RigidBodyProps props;
    if (sc.rigid) {
        props.mass = sc.rigid->mass;
        props.inertia_principal = sc.rigid->inertia;
        props.com = sc.rigid->com;
        props.validate();
    } else {
        props = fbdyn::RigidBodyProps::from_mass_properties(fbdyn::mass_properties(model));
    }

    fbdyn::RigidState initial;
    initial.base_rot = props.principal_axes;
    try {
        const fbdyn::Trajectory traj =
            fbdyn::simulate_rigid(props, model.node_coords, sc.sim.loads, sc.sim.dt,
                                  sc.sim.t_end, initial, sc.sim.output_nodes);
        write_trajectory_csvs(traj, model, opts.out_dir, false, "");
        if (!opts.quiet) {
            std::cout << "rigid run: " << (traj.size() - 1) << " steps to t = "
                      << fbdyn::format_double(traj.records.back().time) << " s, wrote "
                      << opts.out_dir << "/{frame,points}.csv\n";
        }
        return 0;
    } catch (const fbdyn::DivergenceError& e) {
        write_trajectory_csvs(e.partial_trajectory, model, opts.out_dir, false,
                              std::string("# diverged: ") + e.what() + "\n");
        std::cerr << "error: " << e.what() << " (partial output flushed)\n";
        return 1;
    }
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  // per column
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fbdyn::ValidationError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw fbdyn::ValidationError(path + ": empty file");
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(cell);
    table.data.resize(table.columns.size());
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col >= table.columns.size()) {
                throw fbdyn::ValidationError(path + ":" + std::to_string(row) +
                                             ": too many fields");
            }
            try {
                table.data[col].push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw fbdyn::ValidationError(path + ":" + std::to_string(row) +
                                             ": bad number '" + cell + "'");
            }
            ++col;
        }
        if (col != table.columns.size()) {
            throw fbdyn::ValidationError(path + ":" + std::to_string(row) +
                                         ": too few fields");
        }
    }
    return table;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& columns_arg, double rel_rms_tol, double max_abs_tol,
                const std::string& out_dir, bool quiet) {
    const CsvTable a = read_csv(path_a);
    const CsvTable b = read_csv(path_b);
    if (a.columns != b.columns) {
        std::string diff;
        for (const auto& c : a.columns) {
            if (std::find(b.columns.begin(), b.columns.end(), c) == b.columns.end()) {
                diff += " " + c;
            }
        }
        for (const auto& c : b.columns) {
            if (std::find(a.columns.begin(), a.columns.end(), c) == a.columns.end()) {
                diff += " " + c;
            }
        }
        throw fbdyn::ValidationError("CSV schemas differ; unmatched columns:" +
                                     (diff.empty() ? " (ordering)" : diff));
    }
    if (a.data.empty() || a.data[0].size() != b.data[0].size()) {
        throw fbdyn::ValidationError("CSV row counts differ");
    }
    for (size_t r = 0; r < a.data[0].size(); ++r) {
        const double ta = a.data[0][r], tb = b.data[0][r];
        if (std::abs(ta - tb) > 1e-12 * std::max(1.0, std::abs(tb))) {
            throw fbdyn::ValidationError("time grids differ at row " + std::to_string(r + 1));
        }
    }

    std::vector<std::string> selected;
    if (columns_arg.empty()) {
        selected.assign(a.columns.begin() + 1, a.columns.end());
    } else {
        std::stringstream ss(columns_arg);
        std::string c;
        while (std::getline(ss, c, ',')) {
            if (std::find(a.columns.begin(), a.columns.end(), c) == a.columns.end()) {
                throw fbdyn::ValidationError("unknown column '" + c + "'");
            }
            selected.push_back(c);
        }
    }

    json summary;
    summary["file_a"] = path_a;
    summary["file_b"] = path_b;
    summary["columns"] = json::array();
    bool all_pass = true;
    std::ostringstream table;
    table << "column,max_abs_diff,rel_rms_diff,pass\n";
    for (const std::string& name : selected) {
        const size_t idx = static_cast<size_t>(
            std::find(a.columns.begin(), a.columns.end(), name) - a.columns.begin());
        double max_abs = 0.0, sum_sq = 0.0, ref_sq = 0.0;
        for (size_t r = 0; r < a.data[idx].size(); ++r) {
            const double d = a.data[idx][r] - b.data[idx][r];
            max_abs = std::max(max_abs, std::abs(d));
            sum_sq += d * d;
            ref_sq += b.data[idx][r] * b.data[idx][r];
        }
        const double rel_rms = ref_sq > 0.0 ? std::sqrt(sum_sq / ref_sq)
                                            : std::sqrt(sum_sq);
        bool pass = true;
        if (rel_rms_tol >= 0.0 && rel_rms > rel_rms_tol) pass = false;
        if (max_abs_tol >= 0.0 && max_abs > max_abs_tol) pass = false;
        all_pass = all_pass && pass;
        table << name << ',' << fbdyn::format_double(max_abs) << ','
              << fbdyn::format_double(rel_rms) << ',' << (pass ? "yes" : "no") << '\n';
        summary["columns"].push_back({{"name", name},
                                      {"max_abs_diff", max_abs},
                                      {"rel_rms_diff", rel_rms},
                                      {"pass", pass}});
    }
    summary["pass"] = all_pass;
    if (!quiet) std::cout << table.str();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flexible body dynamics via incremental motions in reconfigured "
                 "inertial frames"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string cmp_a, cmp_b, cmp_columns, cmp_out;
    double cmp_rel_rms = -1.0, cmp_max_abs = -1.0;

    const auto add_common = [&](CLI::App* cmd, bool with_out = true) {
        cmd->add_option("--model", opts.model_path, "model file path");
        cmd->add_option("--recipe", opts.recipe,
                        "factory recipe, e.g. dumbbell:stiffness=1e4 or plate-surrogate");
        cmd->add_option("--config", opts.config_path, "scenario config file");
        if (with_out) cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--dt", opts.dt_override, "time step override (s)");
        cmd->add_option("--t-end", opts.t_end_override, "end time override (s)");
        cmd->add_flag("--quiet", opts.quiet, "suppress console output");
    };

    CLI::App* modes = app.add_subcommand("modes", "report model eigen-frequencies");
    add_common(modes);
    CLI::App* simulate = app.add_subcommand("simulate", "run the flexible-body solver");
    add_common(simulate);
    CLI::App* rigid = app.add_subcommand("rigid", "run the rigid-body reference solver");
    add_common(rigid);
    CLI::App* compare = app.add_subcommand("compare", "compare two trajectory CSV files");
    compare->add_option("a", cmp_a, "first CSV (subject)")->required();
    compare->add_option("b", cmp_b, "second CSV (reference)")->required();
    compare->add_option("--columns", cmp_columns, "comma-separated column subset");
    compare->add_option("--rel-rms-tol", cmp_rel_rms, "relative RMS threshold");
    compare->add_option("--max-abs-tol", cmp_max_abs, "max abs difference threshold");
    compare->add_option("--out", cmp_out, "directory for summary.json");
    compare->add_flag("--quiet", opts.quiet, "suppress console output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (modes->parsed()) return cmd_modes(opts);
        if (simulate->parsed()) return cmd_simulate(opts);
        if (rigid->parsed()) return cmd_rigid(opts);
        if (compare->parsed()) {
            return cmd_compare(cmp_a, cmp_b, cmp_columns, cmp_rel_rms, cmp_max_abs, cmp_out,
                               opts.quiet);
        }
    } catch (const fbdyn::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fbdyn::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
