#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fbdyn/model.hpp"

namespace fbdyn {

// Per-node kinematics in the frame the record was taken in.
struct NodeFrameData {
    Eigen::Vector3d disp = Eigen::Vector3d::Zero();     // elastic displacement, mm
    Eigen::Vector3d vel = Eigen::Vector3d::Zero();      // total velocity, mm/s
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();      // total acceleration, mm/s^2
    Eigen::Vector3d rbm_acc = Eigen::Vector3d::Zero();  // embedded-RBM acceleration
};

struct TrajectoryRecord {
    double time = 0.0;
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();       // frame origin, global, mm
    Eigen::Vector3d rotvec_total = Eigen::Vector3d::Zero(); // log of a_total
    Eigen::Matrix3d a_total = Eigen::Matrix3d::Identity();  // global -> body components
    Eigen::Vector3d omega_body = Eigen::Vector3d::Zero();   // rad/s
    Eigen::Vector3d alpha_body = Eigen::Vector3d::Zero();   // rad/s^2
    Eigen::VectorXd modal_q;
    Eigen::VectorXd modal_qdot;
    std::vector<NodeFrameData> nodes;  // aligned with Trajectory::output_nodes
};

struct Trajectory {
    std::vector<int> output_nodes;
    std::vector<TrajectoryRecord> records;
    // Counts steps where the integrated marker velocities drifted more than
    // 1e-6 (relative) from re-extraction out of the modal state. Monitoring
    // only; zero in well-resolved runs.
    long marker_consistency_warnings = 0;

    size_t size() const { return records.size(); }
};

// Divergence detected mid-run; carries the records accumulated so far so
// callers can flush partial output.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& msg, Trajectory partial)
        : NumericalError(msg), partial_trajectory(std::move(partial)) {}

    Trajectory partial_trajectory;
};

// Global-frame series for one node.
struct PointSeries {
    int node = 0;
    std::vector<Eigen::Vector3d> pos, vel, acc, rbm_acc;
};

// Maps recorded current-frame node data into the global analysis frame:
// pos = origin + A_total^T (material + disp), vectors by A_total^T.
// query_nodes must be among the trajectory's output nodes.
std::vector<PointSeries> reconstruct_global(const Trajectory& trajectory,
                                            const StructuralModel& model,
                                            const std::vector<int>& query_nodes);

// Shortest round-trip decimal formatting used for all CSV output.
std::string format_double(double v);

// CSV writers; one file per quantity group, columns named
// time_s,<quantity>_<frame>_<axis>,...
void write_frame_csv(std::ostream& out, const Trajectory& t);
void write_points_csv(std::ostream& out, const Trajectory& t, const StructuralModel& model);
void write_modal_csv(std::ostream& out, const Trajectory& t);

}  // namespace fbdyn
