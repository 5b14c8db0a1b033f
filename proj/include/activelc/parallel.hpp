#pragma once

// Process-wide worker pool with static partitioning. Work items are
// independent rows of a grid, so results of elementwise loops do not depend
// on the thread count. Reductions have two modes: Deterministic (per-item
// partials combined by fixed-order pairwise summation, identical for any
// thread count) and PerThread (faster, order depends on the thread count).

#include <cstddef>
#include <functional>
#include <span>

namespace activelc::parallel {

enum class ReductionMode { Deterministic, PerThread };

void set_num_threads(int n);
[[nodiscard]] int num_threads();

void set_reduction_mode(ReductionMode mode);
[[nodiscard]] ReductionMode reduction_mode();

/// Calls fn(begin, end) on disjoint contiguous slices covering [0, n).
void for_range(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Sum of item(i) for i in [0, n) under the active reduction mode.
[[nodiscard]] double sum(std::size_t n, const std::function<double(std::size_t)>& item);

/// Maximum of item(i); exact in any order.
[[nodiscard]] double max(std::size_t n, const std::function<double(std::size_t)>& item);
[[nodiscard]] double min(std::size_t n, const std::function<double(std::size_t)>& item);

/// Recursive pairwise summation with a fixed split order.
[[nodiscard]] double pairwise_sum(std::span<const double> v);

}  // namespace activelc::parallel
