#include "psrl/planner/cem.hpp"

#include "psrl/planner/sampled_model.hpp"

namespace psrl::planner {

static_assert(PlannerModel<SampledModel>,
              "SampledModel must satisfy the planner model concept");

}  // namespace psrl::planner
