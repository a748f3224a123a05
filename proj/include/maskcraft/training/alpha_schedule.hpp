#pragma once

#include <cstdint>

namespace maskcraft::training {

/// Mask-loss multiplier: alpha_early while step < switch_fraction * total_steps,
/// 1 afterwards.
double alpha_schedule(std::int64_t step, std::int64_t total_steps, double alpha_early = 1.5,
                      double switch_fraction = 0.5);

}  // namespace maskcraft::training
