#pragma once

#include "sublab/heisenberg.hpp"

#include <string>

namespace sublab {

// Text layout:
//   # sublab-kernel v1
//   d,<d>
//   counts,<n_1>,...,<n_{2d+1}>
//   lower,<a_1>,...
//   spacing,<h_1>,...
//   <re>,<im>            one line per grid value, row-major, z fastest
// Binary layout (little endian): "SLKERNEL", int32 version = 1, int32 d,
// int32 counts[2d+1], float64 lower[2d+1], float64 spacing[2d+1],
// then interleaved float64 (re, im) per value in the same order.

SampledKernel load_kernel_csv(const std::string& path);
void save_kernel_csv(const SampledKernel& kernel, const std::string& path);
SampledKernel load_kernel_binary(const std::string& path);
void save_kernel_binary(const SampledKernel& kernel, const std::string& path);

}  // namespace sublab
