#pragma once

#include "msde/geometry/model.hpp"
#include "msde/report.hpp"

namespace msde::geometry {

// Samples the working region and checks the uniformly-regular-atlas
// properties: shrunk-chart cover, overlap multiplicity against the declared
// bound, metric eigenvalues within [1/K, K], and boundedness of the
// transition maps on overlaps (measured sup norms; the regularity constants
// c(k) have no pinned threshold beyond finiteness).
VerificationReport verify_uniform_atlas(const ManifoldModel& model, int n_samples, uint64_t seed);

// Sampled sup of |R|_g and |nabla R|_g plus the model's closed-form
// injectivity radius.
VerificationReport bounded_geometry_report(const ManifoldModel& model, int n_samples,
                                           uint64_t seed, int k_max = 1);

}  // namespace msde::geometry
