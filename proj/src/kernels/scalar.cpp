#include <algorithm>
#include <cfloat>
#include <cmath>

#include "privsub/kernels.hpp"

namespace privsub::kernels::scalar {

#include "kyle_lane.inl"

void kyle_step_post(const KyleStep& s, const KyleLanes& l, const double* z_u, const double* z_eps,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) kyle_lane<true>(s, l, z_u[i], z_eps[i], i);
}

void kyle_step_pre(const KyleStep& s, const KyleLanes& l, const double* z_u, const double* z_eps,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) kyle_lane<false>(s, l, z_u[i], z_eps[i], i);
}

void lvr_step(const LvrStep& s, const LvrLanes& l, const double* growth, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) lvr_lane(s, l, growth[i], i);
}

}  // namespace privsub::kernels::scalar
