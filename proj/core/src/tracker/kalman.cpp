#include "ssf/tracker/kalman.hpp"

namespace ssf::tracker {

namespace {

constexpr double kMinScale = 1e-6;

Eigen::Matrix<double, 7, 7> transition() {
  Eigen::Matrix<double, 7, 7> f = Eigen::Matrix<double, 7, 7>::Identity();
  f(0, 4) = 1;
  f(1, 5) = 1;
  f(2, 6) = 1;
  return f;
}

Eigen::Matrix<double, 4, 7> measurement_model() {
  Eigen::Matrix<double, 4, 7> h = Eigen::Matrix<double, 4, 7>::Zero();
  h(0, 0) = 1;
  h(1, 1) = 1;
  h(2, 2) = 1;
  h(3, 3) = 1;
  return h;
}

Eigen::Matrix<double, 7, 7> process_noise(const KalmanParams& p) {
  Eigen::Matrix<double, 7, 7> q = Eigen::Matrix<double, 7, 7>::Zero();
  q.diagonal() << p.process_noise_pos, p.process_noise_pos, p.process_noise_pos,
      p.process_noise_pos, p.process_noise_vel, p.process_noise_vel, p.process_noise_scale_vel;
  return q;
}

Eigen::Matrix4d measurement_noise(const KalmanParams& p) {
  Eigen::Matrix4d r = Eigen::Matrix4d::Zero();
  r.diagonal() << p.meas_noise_pos, p.meas_noise_pos, p.meas_noise_scale, p.meas_noise_scale;
  return r;
}

}  // namespace

Eigen::Vector4d box_to_measurement(const Box& box) {
  Eigen::Vector4d z;
  z << box.x + box.w / 2.0, box.y + box.h / 2.0, box.w * box.h, box.w / box.h;
  return z;
}

Box measurement_to_box(const Eigen::Vector4d& z) {
  double s = std::max(z(2), kMinScale);
  double r = std::max(z(3), kMinScale);
  double w = std::sqrt(s * r);
  double h = s / w;
  return Box{z(0) - w / 2.0, z(1) - h / 2.0, w, h};
}

KalmanState kf_init(const Box& box, const KalmanParams& params) {
  KalmanState st;
  st.x.head<4>() = box_to_measurement(box);
  st.P.diagonal() << params.init_cov_pos, params.init_cov_pos, params.init_cov_pos,
      params.init_cov_pos, params.init_cov_vel, params.init_cov_vel, params.init_cov_vel;
  return st;
}

KalmanState kf_predict(const KalmanState& state, const KalmanParams& params) {
  static const Eigen::Matrix<double, 7, 7> f = transition();
  KalmanState out;
  out.x = f * state.x;
  out.P = f * state.P * f.transpose() + process_noise(params);
  if (out.x(2) <= 0) {  // degenerate scale: clamp and stop shrinking
    out.x(2) = kMinScale;
    out.x(6) = 0;
  }
  return out;
}

KalmanState kf_update(const KalmanState& state, const Box& measurement,
                      const KalmanParams& params) {
  static const Eigen::Matrix<double, 4, 7> h = measurement_model();
  const Eigen::Matrix4d r = measurement_noise(params);
  const Eigen::Vector4d z = box_to_measurement(measurement);

  const Eigen::Vector4d innovation = z - h * state.x;
  const Eigen::Matrix4d s = h * state.P * h.transpose() + r;
  const Eigen::Matrix<double, 7, 4> k = state.P * h.transpose() * s.inverse();

  KalmanState out;
  out.x = state.x + k * innovation;
  // Joseph form keeps P symmetric positive semi-definite.
  const Eigen::Matrix<double, 7, 7> ikh = Eigen::Matrix<double, 7, 7>::Identity() - k * h;
  out.P = ikh * state.P * ikh.transpose() + k * r * k.transpose();
  if (out.x(2) <= 0) out.x(2) = kMinScale;
  if (out.x(3) <= 0) out.x(3) = kMinScale;
  return out;
}

Box state_box(const KalmanState& state) { return measurement_to_box(state.x.head<4>()); }

bool covariance_psd(const KalmanState& state, double tol) {
  if (((state.P - state.P.transpose()).cwiseAbs().maxCoeff()) > tol) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 7, 7>> solver(state.P);
  return solver.eigenvalues().minCoeff() >= -tol;
}

}  // namespace ssf::tracker
