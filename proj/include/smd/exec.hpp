#pragma once

namespace smd {

// Execution policy for the data-parallel kernels. `serial` is the reference
// path; `parallel` runs the same kernel under OpenMP and must produce
// bit-identical results (every work item writes its own slot).
enum class Exec { serial, parallel };

}  // namespace smd
