#include "fbdyn/loads.hpp"

#include <cmath>
#include <string>

namespace fbdyn {

double LoadEntry::magnitude_at(double t) const {
    if (magnitude.empty()) return 0.0;
    if (t <= magnitude.front().first) return magnitude.front().second;
    if (t >= magnitude.back().first) return magnitude.back().second;
    for (size_t i = 1; i < magnitude.size(); ++i) {
        if (t <= magnitude[i].first) {
            const auto& [t0, v0] = magnitude[i - 1];
            const auto& [t1, v1] = magnitude[i];
            const double w = (t - t0) / (t1 - t0);
            return v0 + w * (v1 - v0);
        }
    }
    return magnitude.back().second;
}

void LoadSpec::validate(int n_nodes, double t_end) const {
    for (size_t k = 0; k < entries.size(); ++k) {
        const LoadEntry& e = entries[k];
        const std::string where = "load " + std::to_string(k);
        if (e.node < 0 || e.node >= n_nodes) {
            throw ValidationError(where + ": node " + std::to_string(e.node) + " out of range");
        }
        if (std::abs(e.direction.norm() - 1.0) > 1e-6) {
            throw ValidationError(where + ": direction is not unit length");
        }
        if (e.magnitude.empty()) {
            throw ValidationError(where + ": empty magnitude time series");
        }
        for (size_t i = 1; i < e.magnitude.size(); ++i) {
            if (e.magnitude[i].first <= e.magnitude[i - 1].first) {
                throw ValidationError(where + ": breakpoint times must increase");
            }
        }
        if (e.magnitude.front().first > 0.0 || e.magnitude.back().first < t_end) {
            throw ValidationError(where + ": time series does not cover [0, " +
                                  std::to_string(t_end) + "] s");
        }
    }
}

Eigen::VectorXd assemble_force(const LoadSpec& loads, double t, const Eigen::Matrix3d& a_total,
                               int n_dofs) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n_dofs);
    for (const LoadEntry& e : loads.entries) {
        const double mag = e.magnitude_at(t);
        if (mag == 0.0) continue;
        const Eigen::Vector3d dir =
            e.frame == LoadFrame::global_fixed ? (a_total * e.direction).eval() : e.direction;
        f.segment<3>(3 * e.node) += mag * dir;
    }
    return f;
}

}  // namespace fbdyn
