#pragma once

#include <string>
#include <utility>

#include "scope/common.hpp"

namespace scope {

// Force + moment with an explicit frame tag. Frame tags are plain strings;
// operations that combine wrenches insist the tags match rather than
// guessing.
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
  std::string frame;

  Wrench() = default;
  Wrench(const Vec3& f, const Vec3& m, std::string fr)
      : force(f), moment(m), frame(std::move(fr)) {
    if (!force.allFinite() || !moment.allFinite())
      throw InputError("Wrench: non-finite components");
  }

  Vec6 stacked() const {
    Vec6 v;
    v << force, moment;
    return v;
  }

  static Wrench from_stacked(const Vec6& v, std::string frame) {
    return Wrench(v.head<3>(), v.tail<3>(), std::move(frame));
  }
};

}  // namespace scope
