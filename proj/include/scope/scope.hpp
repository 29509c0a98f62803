#pragma once

// Umbrella header for the whole library.

#include "scope/adjoint.hpp"
#include "scope/common.hpp"
#include "scope/contact_qp.hpp"
#include "scope/cpf.hpp"
#include "scope/friction_cone.hpp"
#include "scope/grasp.hpp"
#include "scope/losses.hpp"
#include "scope/mesh.hpp"
#include "scope/mesh_io.hpp"
#include "scope/metrics.hpp"
#include "scope/model.hpp"
#include "scope/models.hpp"
#include "scope/nnls.hpp"
#include "scope/records.hpp"
#include "scope/resample.hpp"
#include "scope/rng.hpp"
#include "scope/scenario.hpp"
#include "scope/scope_filter.hpp"
#include "scope/scvx_io.hpp"
#include "scope/sdf.hpp"
#include "scope/sensor_noise.hpp"
#include "scope/surface.hpp"
#include "scope/transform.hpp"
#include "scope/voxelize.hpp"
#include "scope/wrench.hpp"
#include "scope/wrench_log.hpp"
