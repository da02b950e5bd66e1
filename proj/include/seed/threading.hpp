#pragma once

namespace seed {

// Worker count for parallel kernels: all available cores, capped by the
// SEED_THREADS environment variable when set. Read on every call so tests can
// change the cap between runs.
int worker_count();

}  // namespace seed
