#pragma once

#include "fwis/types.hpp"

namespace fwis {

// Kinematic map q_dot = J(q) v. Columns 2 and 3 select the steering rows.
Mat63 jacobian(const ConfigState& q, const RobotParams& p);

// Pfaffian rolling constraint matrix; A(q) J(q) = 0.
Mat36 constraint_matrix(const ConfigState& q, const RobotParams& p);

Mat6 mass_matrix_full(const RobotParams& p);

double m_tilde_11(double delta_f, double delta_r, const RobotParams& p);
double c_tilde_11(double delta_f, double delta_r, double delta_dot_f, double delta_dot_r,
                  const RobotParams& p);
double b_tilde_11(double delta_f, double delta_r, const RobotParams& p);

Mat3 m_tilde(const ConfigState& q, const RobotParams& p);
Mat3 c_tilde(const ConfigState& q, double delta_dot_f, double delta_dot_r, const RobotParams& p);
Mat3 b_tilde(const ConfigState& q, const RobotParams& p);

// Reduced generalized force J(q)^T f.
Vec3 f_tilde_project(const ConfigState& q, const Vec6& f_full, const RobotParams& p);

}  // namespace fwis
