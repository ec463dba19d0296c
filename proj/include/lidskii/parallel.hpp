#pragma once

namespace lidskii {

// Thread count resolution: LIDSKII_EVOLVE_THREADS caps OpenMP threads when set
// (<=0 or unset leaves the OpenMP default). No-op without OpenMP.
void apply_thread_cap_from_env();
int active_thread_count();

}  // namespace lidskii
