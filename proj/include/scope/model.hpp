#pragma once

// Preprocessed object bundle: voxel occupancy, SDF and surface model for
// one rigid object, with the metadata the estimators need alongside.

#include <string>

#include "scope/common.hpp"
#include "scope/grasp.hpp"
#include "scope/mesh.hpp"
#include "scope/sdf.hpp"
#include "scope/surface.hpp"
#include "scope/voxelize.hpp"

namespace scope {

struct ObjectModel {
  std::string name;
  VoxelGrid grid;
  SignedDistanceField sdf;
  SurfaceModel surface;
  double radius_of_gyration_cm = 5.0;  // for the aggregate error metric
};

inline ObjectModel preprocess_model(const std::string& name,
                                    const TriangleMesh& mesh,
                                    double voxel_size, double eps = -1.0,
                                    int axis_cap = 256) {
  ObjectModel model;
  model.name = name;
  model.grid = voxelize(mesh, voxel_size, axis_cap);
  model.sdf = compute_sdf(model.grid);
  model.surface = extract_surface(model.sdf, eps);
  return model;
}

// Gripper whose finger center sits exactly on the surface model, at the
// surface point nearest to the nominal grasp point (object origin by
// convention). Guarantees the identity pose is grasp-valid regardless of
// how voxel centers fell relative to the mesh.
inline GripperSpec snapped_gripper(const ObjectModel& model,
                                   const Vec3& nominal_point = Vec3::Zero(),
                                   double tolerance = 1e-3) {
  const SurfaceIndex index(model.surface);
  GripperSpec gripper;
  gripper.finger_center = index.nearest_point(nominal_point).position;
  gripper.tolerance = tolerance;
  return gripper;
}

}  // namespace scope
