#pragma once

namespace lagmcf {

/// Caps the worker count used inside library kernels. Values < 1 restore the
/// default (hardware parallelism). Results do not depend on this setting.
void set_max_threads(int n);

/// Applies LAGMCF_THREADS from the environment, if set and parseable.
void apply_thread_env();

[[nodiscard]] int max_threads();

}  // namespace lagmcf
