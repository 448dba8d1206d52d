// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "suturekit/control.hpp"

#include "suturekit/errors.hpp"

namespace suturekit {

JointVector defaultDisturbance() {
  JointVector d = JointVector::Constant(1.5 * kDegToRad);
  d(kPrismaticJoint) = 0.0001;
  return d;
}

void PlantModel::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "beta must lie in (0, 1]");
  if (!bias.allFinite() || !disturbance.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "plant bias and disturbance must be finite");
  }
}

Plant::Plant(const PlantModel& model, const JointVector& q_act) : model_(model), q_act_(q_act) {
  model_.validate();
}

JointVector Plant::step(const JointVector& u) {
  const JointVector q_msr = measured();
  q_act_ = q_msr + model_.beta * (u - model_.disturbance - q_msr) + model_.bias;
  return measured();
}

JointVector PiGains::defaultClamp() {
  JointVector c = JointVector::Constant(20.0 * kDegToRad);
  c(kPrismaticJoint) = 20.0 * kDegToRad / 10.0;
  return c;
}

PiGains PiGains::off() {
  PiGains g;
  g.kp.setZero();
  g.ki.setZero();
  return g;
}

void PiGains::validate() const {
  if (!(kp.array() >= 0.0).all() || !(ki.array() >= 0.0).all()) {
    throw Error(ErrorCode::kInvalidArgument, "PI gains must be >= 0");
  }
  if (!(integrator_clamp.array() > 0.0).all()) {
    throw Error(ErrorCode::kInvalidArgument, "integrator clamp must be > 0");
  }
}

PiController::PiController(const PiGains& gains) : gains_(gains) { gains_.validate(); }

JointVector PiController::step(const JointVector& q_des, const JointVector& q_msr_comp) {
  const JointVector e = q_des - q_msr_comp;
  integrator_ = (integrator_ + e).cwiseMax(-gains_.integrator_clamp).cwiseMin(gains_.integrator_clamp);
  return q_des + gains_.kp.cwiseProduct(e) + gains_.ki.cwiseProduct(integrator_);
}

Compensated compensate(const JointVector& q_msr, const JointVector& q_des, const JointVector& dq_hat) {
  return {q_msr + dq_hat, q_des};
}

ServoTrace servoTo(Plant& plant, PiController& controller, const JointVector& dq_hat,
                   const JointVector& q_des, int max_steps, const JointVector& tol) {
  ServoTrace trace;
  Compensated c = compensate(plant.measured(), q_des, dq_hat);
  if (((c.q_ref - c.q_msr_comp).cwiseAbs().array() < tol.array()).all()) {
    trace.converged = true;
    return trace;
  }
  for (int k = 0; k < max_steps; ++k) {
    const JointVector u = controller.step(c.q_ref, c.q_msr_comp);
    const JointVector cmd = plantCommand(u, dq_hat);
    const JointVector q_msr = plant.step(cmd);
    c = compensate(q_msr, q_des, dq_hat);
    ServoStep s{q_des, cmd, plant.actual(), q_msr, c.q_msr_comp, q_des - c.q_msr_comp};
    trace.steps.push_back(s);
    if ((s.err.cwiseAbs().array() < tol.array()).all()) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

}  // namespace suturekit
