#pragma once

namespace irt {

// Worker-thread cap shared by all parallel kernels. Resolution order:
// explicit set_thread_count(), then the IRT_ARENA_THREADS environment
// variable, then the OpenMP default. Always >= 1.
//
// Kernels are written so results are bit-identical for any thread count:
// every output cell is accumulated by exactly one thread in a fixed
// iteration order.
int thread_count();
void set_thread_count(int n);

} // namespace irt
