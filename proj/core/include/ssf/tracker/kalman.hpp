#pragma once

#include <Eigen/Dense>

#include "ssf/tracker/box.hpp"

namespace ssf::tracker {

/// Constant-velocity filter over [cx, cy, s, r, vx, vy, vs]:
/// box center, scale (area), aspect ratio, and their velocities (r constant).
struct KalmanParams {
  double meas_noise_pos = 1.0;     // R diagonal for cx, cy
  double meas_noise_scale = 10.0;  // R diagonal for s, r
  double process_noise_pos = 1.0;  // Q diagonal for cx, cy, s, r
  double process_noise_vel = 0.01;       // Q diagonal for vx, vy
  double process_noise_scale_vel = 1e-4; // Q diagonal for vs
  double init_cov_pos = 10.0;      // P0 diagonal for observed components
  double init_cov_vel = 1e4;       // P0 diagonal for unobserved velocities
};

struct KalmanState {
  Eigen::Matrix<double, 7, 1> x = Eigen::Matrix<double, 7, 1>::Zero();
  Eigen::Matrix<double, 7, 7> P = Eigen::Matrix<double, 7, 7>::Zero();
};

Eigen::Vector4d box_to_measurement(const Box& box);
Box measurement_to_box(const Eigen::Vector4d& z);

KalmanState kf_init(const Box& box, const KalmanParams& params = {});
KalmanState kf_predict(const KalmanState& state, const KalmanParams& params = {});
KalmanState kf_update(const KalmanState& state, const Box& measurement,
                      const KalmanParams& params = {});

Box state_box(const KalmanState& state);

/// Symmetric to tol and eigenvalues >= -tol.
bool covariance_psd(const KalmanState& state, double tol = 1e-9);

}  // namespace ssf::tracker
