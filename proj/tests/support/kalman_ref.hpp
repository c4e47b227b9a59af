#pragma once

// Reference constant-velocity filter over [cx, cy, s, r, vx, vy, vs], written
// against the standard predict/correct equations with plain C arrays. Kept
// deliberately independent of the production implementation; the two must
// agree to 1e-9.

#include <array>
#include <cmath>

namespace kalman_ref {

using Vec7 = std::array<double, 7>;
using Mat7 = std::array<std::array<double, 7>, 7>;

struct Params {
  double r_pos = 1.0;
  double r_scale = 10.0;
  double q_pos = 1.0;
  double q_vel = 0.01;
  double q_scale_vel = 1e-4;
  double p0_pos = 10.0;
  double p0_vel = 1e4;
};

struct State {
  Vec7 x{};
  Mat7 p{};
};

inline State init(double bx, double by, double bw, double bh, const Params& prm = {}) {
  State st;
  st.x = {bx + bw / 2.0, by + bh / 2.0, bw * bh, bw / bh, 0.0, 0.0, 0.0};
  double diag[7] = {prm.p0_pos, prm.p0_pos, prm.p0_pos, prm.p0_pos,
                    prm.p0_vel, prm.p0_vel, prm.p0_vel};
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) st.p[i][j] = i == j ? diag[i] : 0.0;
  return st;
}

inline State predict(const State& in, const Params& prm = {}) {
  // x' = F x with F = I plus position<-velocity couplings.
  double f[7][7] = {};
  for (int i = 0; i < 7; ++i) f[i][i] = 1.0;
  f[0][4] = f[1][5] = f[2][6] = 1.0;

  State out;
  for (int i = 0; i < 7; ++i) {
    out.x[i] = 0;
    for (int j = 0; j < 7; ++j) out.x[i] += f[i][j] * in.x[j];
  }
  // P' = F P F^T + Q
  double fp[7][7] = {};
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      fp[i][j] = 0;
      for (int k = 0; k < 7; ++k) fp[i][j] += f[i][k] * in.p[k][j];
    }
  double q[7] = {prm.q_pos, prm.q_pos, prm.q_pos, prm.q_pos,
                 prm.q_vel, prm.q_vel, prm.q_scale_vel};
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      out.p[i][j] = 0;
      for (int k = 0; k < 7; ++k) out.p[i][j] += fp[i][k] * f[j][k];
      if (i == j) out.p[i][j] += q[i];
    }
  if (out.x[2] <= 0) {
    out.x[2] = 1e-6;
    out.x[6] = 0;
  }
  return out;
}

inline State update(const State& in, double bx, double by, double bw, double bh,
                    const Params& prm = {}) {
  // Measurement z = (cx, cy, s, r); H selects the first four components.
  double z[4] = {bx + bw / 2.0, by + bh / 2.0, bw * bh, bw / bh};
  double r[4] = {prm.r_pos, prm.r_pos, prm.r_scale, prm.r_scale};

  // Innovation covariance S = P[0..3][0..3] + R, inverted by Gauss-Jordan.
  double s[4][8] = {};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) s[i][j] = in.p[i][j];
    s[i][i] += r[i];
    s[i][4 + i] = 1.0;
  }
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 4; ++row)
      if (std::fabs(s[row][col]) > std::fabs(s[pivot][col])) pivot = row;
    for (int j = 0; j < 8; ++j) std::swap(s[col][j], s[pivot][j]);
    double d = s[col][col];
    for (int j = 0; j < 8; ++j) s[col][j] /= d;
    for (int row = 0; row < 4; ++row) {
      if (row == col) continue;
      double m = s[row][col];
      for (int j = 0; j < 8; ++j) s[row][j] -= m * s[col][j];
    }
  }
  double sinv[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) sinv[i][j] = s[i][4 + j];

  // K = P H^T S^-1  (H^T picks the first four columns of P).
  double k[7][4];
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 4; ++j) {
      k[i][j] = 0;
      for (int m = 0; m < 4; ++m) k[i][j] += in.p[i][m] * sinv[m][j];
    }

  double innovation[4];
  for (int i = 0; i < 4; ++i) innovation[i] = z[i] - in.x[i];

  State out;
  for (int i = 0; i < 7; ++i) {
    out.x[i] = in.x[i];
    for (int j = 0; j < 4; ++j) out.x[i] += k[i][j] * innovation[j];
  }

  // Joseph form: P' = (I - KH) P (I - KH)^T + K R K^T.
  double ikh[7][7] = {};
  for (int i = 0; i < 7; ++i) ikh[i][i] = 1.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 4; ++j) ikh[i][j] -= k[i][j];
  double tmp[7][7];
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      tmp[i][j] = 0;
      for (int m = 0; m < 7; ++m) tmp[i][j] += ikh[i][m] * in.p[m][j];
    }
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      out.p[i][j] = 0;
      for (int m = 0; m < 7; ++m) out.p[i][j] += tmp[i][m] * ikh[j][m];
      for (int a = 0; a < 4; ++a) out.p[i][j] += k[i][a] * r[a] * k[j][a];
    }
  if (out.x[2] <= 0) out.x[2] = 1e-6;
  if (out.x[3] <= 0) out.x[3] = 1e-6;
  return out;
}

}  // namespace kalman_ref
