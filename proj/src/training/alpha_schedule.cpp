#include "maskcraft/training/alpha_schedule.hpp"

#include "maskcraft/errors.hpp"

namespace maskcraft::training {

double alpha_schedule(std::int64_t step, std::int64_t total_steps, double alpha_early, double switch_fraction) {
  if (step < 0 || step > total_steps) throw ArgumentError("alpha_schedule: step outside [0, total_steps]");
  return static_cast<double>(step) < switch_fraction * static_cast<double>(total_steps) ? alpha_early : 1.0;
}

}  // namespace maskcraft::training
