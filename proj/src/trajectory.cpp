#include "fbdyn/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

namespace fbdyn {

std::vector<PointSeries> reconstruct_global(const Trajectory& trajectory,
                                            const StructuralModel& model,
                                            const std::vector<int>& query_nodes) {
    std::vector<PointSeries> out;
    out.reserve(query_nodes.size());
    for (int node : query_nodes) {
        const auto it =
            std::find(trajectory.output_nodes.begin(), trajectory.output_nodes.end(), node);
        if (it == trajectory.output_nodes.end()) {
            throw ValidationError("node " + std::to_string(node) +
                                  " was not recorded in the trajectory");
        }
        if (node < 0 || node >= model.n_nodes()) {
            throw ValidationError("node " + std::to_string(node) + " does not exist");
        }
        const size_t slot = static_cast<size_t>(it - trajectory.output_nodes.begin());
        PointSeries series;
        series.node = node;
        series.pos.reserve(trajectory.records.size());
        for (const TrajectoryRecord& rec : trajectory.records) {
            const Eigen::Matrix3d to_global = rec.a_total.transpose();
            const NodeFrameData& nd = rec.nodes[slot];
            series.pos.push_back(rec.origin + to_global * (model.node_coords[node] + nd.disp));
            series.vel.push_back(to_global * nd.vel);
            series.acc.push_back(to_global * nd.acc);
            series.rbm_acc.push_back(to_global * nd.rbm_acc);
        }
        out.push_back(std::move(series));
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {
void write_vec3(std::ostream& out, const Eigen::Vector3d& v) {
    out << ',' << format_double(v.x()) << ',' << format_double(v.y()) << ','
        << format_double(v.z());
}
}  // namespace

void write_frame_csv(std::ostream& out, const Trajectory& t) {
    out << "time_s";
    for (const char* q : {"origin_global", "rotvec_global", "omega_body", "alpha_body"}) {
        for (int a = 1; a <= 3; ++a) out << ',' << q << "_x" << a;
    }
    out << '\n';
    for (const TrajectoryRecord& rec : t.records) {
        out << format_double(rec.time);
        write_vec3(out, rec.origin);
        write_vec3(out, rec.rotvec_total);
        write_vec3(out, rec.omega_body);
        write_vec3(out, rec.alpha_body);
        out << '\n';
    }
}

void write_points_csv(std::ostream& out, const Trajectory& t, const StructuralModel& model) {
    const auto series = reconstruct_global(t, model, t.output_nodes);
    out << "time_s";
    for (const PointSeries& s : series) {
        for (const char* q : {"pos_global", "vel_global", "acc_global", "rbmacc_global"}) {
            for (int a = 1; a <= 3; ++a) out << ",n" << s.node << '_' << q << "_x" << a;
        }
    }
    out << '\n';
    for (size_t r = 0; r < t.records.size(); ++r) {
        out << format_double(t.records[r].time);
        for (const PointSeries& s : series) {
            write_vec3(out, s.pos[r]);
            write_vec3(out, s.vel[r]);
            write_vec3(out, s.acc[r]);
            write_vec3(out, s.rbm_acc[r]);
        }
        out << '\n';
    }
}

void write_modal_csv(std::ostream& out, const Trajectory& t) {
    const Eigen::Index m = t.records.empty() ? 0 : t.records.front().modal_q.size();
    out << "time_s";
    for (Eigen::Index i = 1; i <= m; ++i) out << ",q_modal_" << i;
    for (Eigen::Index i = 1; i <= m; ++i) out << ",qdot_modal_" << i;
    out << '\n';
    for (const TrajectoryRecord& rec : t.records) {
        out << format_double(rec.time);
        for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_double(rec.modal_q(i));
        for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_double(rec.modal_qdot(i));
        out << '\n';
    }
}

}  // namespace fbdyn
