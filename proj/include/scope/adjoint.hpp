#pragma once

#include <string>
#include <utility>

#include "scope/common.hpp"
#include "scope/transform.hpp"
#include "scope/wrench.hpp"

namespace scope {

// Wrench map between frames. For an input transform (R, p) the 6x6 block
// matrix is
//
//     [ R^T       0   ]
//     [ -R^T hat(p)  R^T ]
//
// acting on stacked (force, moment). Given the pose of frame B expressed in
// frame A it carries wrenches written in A into frame B; to map a contact
// wrench into the end-effector frame, pass the EE pose expressed in the
// contact frame (the inverse of the contact pose in the EE frame).
// Composition satisfies adjoint(T1 * T2) == adjoint(T2) * adjoint(T1).
struct ContactAdjoint {
  Mat6 matrix = Mat6::Identity();
  std::string source;  // frame the input wrench must be tagged with
  std::string target;  // frame the output wrench is tagged with
};

inline ContactAdjoint contact_adjoint(const RigidTransform& contact_in_ee,
                                      std::string source = "contact",
                                      std::string target = "ee") {
  contact_in_ee.check("contact_adjoint");
  const Mat3 rt = contact_in_ee.rotation.transpose();
  ContactAdjoint adj;
  adj.matrix.topLeftCorner<3, 3>() = rt;
  adj.matrix.topRightCorner<3, 3>().setZero();
  adj.matrix.bottomLeftCorner<3, 3>() = -rt * hat(contact_in_ee.translation);
  adj.matrix.bottomRightCorner<3, 3>() = rt;
  adj.source = std::move(source);
  adj.target = std::move(target);
  return adj;
}

inline Wrench transform_wrench(const ContactAdjoint& adj, const Wrench& w) {
  if (w.frame != adj.source)
    throw FrameError("transform_wrench: wrench frame '" + w.frame +
                     "' does not match adjoint source '" + adj.source + "'");
  return Wrench::from_stacked(adj.matrix * w.stacked(), adj.target);
}

}  // namespace scope
