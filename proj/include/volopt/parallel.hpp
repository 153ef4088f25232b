#pragma once

namespace volopt {

// Process-wide switch between the OpenMP kernels and their serial reference
// paths.  Results are required to be bitwise identical either way; tests and
// the benchmark flip this to compare the two implementations.
bool parallel_enabled();
void set_parallel_enabled(bool enabled);

struct SerialGuard {
  bool previous;
  SerialGuard();
  ~SerialGuard();
};

}  // namespace volopt
