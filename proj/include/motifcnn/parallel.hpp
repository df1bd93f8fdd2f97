#pragma once

namespace motifcnn {

/// Number of worker threads used by kernels and enumeration. Results never
/// depend on this value.
void set_num_threads(int threads);
int num_threads();

}  // namespace motifcnn
