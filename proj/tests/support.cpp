#include "support.hpp"

#include <cmath>

#include "fbdyn/loads.hpp"

namespace testsup {

Eigen::Vector3d random_vec3(Rng& rng, double scale) {
    std::normal_distribution<double> n(0.0, scale);
    return {n(rng), n(rng), n(rng)};
}

Eigen::Vector3d random_unit(Rng& rng) {
    while (true) {
        const Eigen::Vector3d v = random_vec3(rng);
        const double n = v.norm();
        if (n > 1e-3) return v / n;
    }
}

fbdyn::MarkerTriad random_triad(Rng& rng) {
    std::uniform_real_distribution<double> len(0.5, 2.0);
    while (true) {
        const Eigen::Vector3d p = len(rng) * random_unit(rng);
        const Eigen::Vector3d q = len(rng) * random_unit(rng);
        if ((p / p.norm()).cross(q / q.norm()).norm() >= 0.2) {
            return fbdyn::MarkerTriad::from_offsets(p, q);
        }
    }
}

Eigen::Matrix3d expm_series(const Eigen::Matrix3d& m, int terms) {
    Eigen::Matrix3d sum = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d term = Eigen::Matrix3d::Identity();
    for (int k = 1; k <= terms; ++k) {
        term = (term * m) / static_cast<double>(k);
        sum += term;
    }
    return sum;
}

MarkerKinematics synthesize_marker_motion(const fbdyn::MarkerTriad& triad,
                                          const Eigen::Vector3d& omega,
                                          const Eigen::Vector3d& alpha) {
    MarkerKinematics mk;
    mk.v_pr = omega.cross(triad.p_vec);
    mk.v_qr = omega.cross(triad.q_vec);
    mk.a_pr = alpha.cross(triad.p_vec) + omega.cross(omega.cross(triad.p_vec));
    mk.a_qr = alpha.cross(triad.q_vec) + omega.cross(omega.cross(triad.q_vec));
    return mk;
}

FixedFrameRun run_fixed_frame(const fbdyn::ModalSystem& system, const fbdyn::LoadSpec& loads,
                              const Eigen::VectorXd& x0, const Eigen::VectorXd& v0, double dt,
                              double t_end) {
    const int m = system.n_modes();
    const int n_dofs = static_cast<int>(system.basis.shapes.rows());
    const Eigen::Matrix3d identity = Eigen::Matrix3d::Identity();

    Eigen::VectorXd eta(2 * m);
    eta.head(m) = system.projection * x0;
    eta.tail(m) = system.projection * v0;

    FixedFrameRun run;
    const long n_steps = std::llround(t_end / dt);
    double t = 0.0;
    const auto record = [&]() {
        run.times.push_back(t);
        run.x.push_back(system.basis.shapes * eta.head(m));
    };
    record();
    for (long step = 0; step < n_steps; ++step) {
        const Eigen::VectorXd f_q_n =
            system.basis.shapes.transpose() * fbdyn::assemble_force(loads, t, identity, n_dofs);
        const Eigen::VectorXd f_q_np1 =
            system.basis.shapes.transpose() *
            fbdyn::assemble_force(loads, t + dt, identity, n_dofs);
        const Eigen::VectorXd f_mid = 0.5 * (f_q_n + f_q_np1);
        const Eigen::VectorXd k1 = fbdyn::modal_state_derivative(system, eta, f_q_n);
        const Eigen::VectorXd k2 =
            fbdyn::modal_state_derivative(system, eta + 0.5 * dt * k1, f_mid);
        const Eigen::VectorXd k3 =
            fbdyn::modal_state_derivative(system, eta + 0.5 * dt * k2, f_mid);
        const Eigen::VectorXd k4 = fbdyn::modal_state_derivative(system, eta + dt * k3, f_q_np1);
        eta += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
        record();
    }
    return run;
}

std::vector<std::pair<double, double>> abs_peaks(const std::vector<double>& times,
                                                 const std::vector<double>& values) {
    std::vector<std::pair<double, double>> peaks;
    for (size_t i = 1; i + 1 < values.size(); ++i) {
        const double a = std::abs(values[i - 1]);
        const double b = std::abs(values[i]);
        const double c = std::abs(values[i + 1]);
        if (b >= a && b > c) {
            // Parabolic refinement through the three samples.
            const double denom = a - 2.0 * b + c;
            double shift = 0.0;
            if (denom != 0.0) shift = 0.5 * (a - c) / denom;
            const double dt = times[i + 1] - times[i];
            const double peak = b - 0.25 * (a - c) * shift;
            peaks.emplace_back(times[i] + shift * dt, peak);
        }
    }
    return peaks;
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testsup
