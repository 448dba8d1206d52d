// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "suturekit/kinematics.hpp"

namespace suturekit {

/// 1.5 deg on revolute joints, 0.1 mm on the prismatic joint.
JointVector defaultDisturbance();

struct PlantModel {
  JointVector bias = JointVector::Zero();  ///< dq = q_act - q_msr, hidden from the controller
  JointVector disturbance = defaultDisturbance();
  double beta = 0.8;

  /// Throws kInvalidArgument unless beta lies in (0, 1].
  void validate() const;
};

/// Biased joint servo with a first-order lag. The low-level loop tracks its
/// own measurement: q_msr <- q_msr + beta (u - d - q_msr), with
/// q_act = q_msr + bias.
class Plant {
 public:
  Plant(const PlantModel& model, const JointVector& q_act);

  /// Advances one step under command u and returns the new measurement.
  JointVector step(const JointVector& u);

  const JointVector& actual() const { return q_act_; }
  JointVector measured() const { return q_act_ - model_.bias; }
  const PlantModel& model() const { return model_; }

 private:
  PlantModel model_;
  JointVector q_act_;
};

struct PiGains {
  JointVector kp = JointVector::Constant(0.5);
  JointVector ki = JointVector::Constant(0.2);
  /// 20 deg per revolute joint; the prismatic clamp is 20 deg over the
  /// default 10 rad/m scale.
  JointVector integrator_clamp = defaultClamp();

  static JointVector defaultClamp();
  static PiGains off();
  /// Throws kInvalidArgument on negative gains or a non-positive clamp.
  void validate() const;
};

class PiController {
 public:
  explicit PiController(const PiGains& gains);

  /// e = q_des - q_msr_comp; integrator += e (clamped);
  /// u = q_des + kp e + ki integrator.
  JointVector step(const JointVector& q_des, const JointVector& q_msr_comp);
  void reset() { integrator_.setZero(); }

  const JointVector& integrator() const { return integrator_; }
  const PiGains& gains() const { return gains_; }

 private:
  PiGains gains_;
  JointVector integrator_ = JointVector::Zero();
};

struct Compensated {
  JointVector q_msr_comp;  ///< q_msr + dq_hat, the estimate of the actual position
  JointVector q_ref;       ///< reference handed to the PI, q_des
};

Compensated compensate(const JointVector& q_msr, const JointVector& q_des, const JointVector& dq_hat);

/// Command actually sent to the plant for PI output u.
inline JointVector plantCommand(const JointVector& u, const JointVector& dq_hat) { return u - dq_hat; }

struct ServoStep {
  JointVector q_des;
  JointVector q_cmd;  ///< sent to the plant
  JointVector q_act;
  JointVector q_msr;
  JointVector q_msr_comp;
  JointVector err;  ///< q_des - q_msr_comp after the step
};

struct ServoTrace {
  std::vector<ServoStep> steps;
  bool converged = false;
};

/// Closed loop until every |q_des - q_msr_comp| < tol or max_steps plant
/// steps. A run that hits max_steps comes back with converged = false.
ServoTrace servoTo(Plant& plant, PiController& controller, const JointVector& dq_hat,
                   const JointVector& q_des, int max_steps, const JointVector& tol);

}  // namespace suturekit
