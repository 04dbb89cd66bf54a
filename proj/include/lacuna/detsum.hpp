#pragma once

// Deterministic reductions.
//
// Every sum is accumulated over fixed-size tiles: each tile is summed
// serially in index order, then the per-tile partials are folded in tile
// order. The parallel version distributes tiles across OpenMP workers but
// performs the exact same floating point operations, so results are
// bit-identical for any worker count and identical to the serial reference.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <vector>

#include <omp.h>

namespace lacuna {

inline constexpr std::size_t tile_size = 4096;

// Worker count: LACUNA_THREADS env var if set, else the OpenMP default.
inline int worker_count() {
  if (const char* s = std::getenv("LACUNA_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end != s && v >= 1) return static_cast<int>(std::min(v, 256L));
  }
  return omp_get_max_threads();
}

template <class F>
double serial_sum(std::size_t n, F&& term) {
  const std::size_t ntiles = (n + tile_size - 1) / tile_size;
  double total = 0.0;
  for (std::size_t t = 0; t < ntiles; ++t) {
    const std::size_t lo = t * tile_size;
    const std::size_t hi = std::min(n, lo + tile_size);
    double part = 0.0;
    for (std::size_t i = lo; i < hi; ++i) part += term(i);
    total += part;
  }
  return total;
}

template <class F>
double tiled_sum(std::size_t n, F&& term) {
  const std::size_t ntiles = (n + tile_size - 1) / tile_size;
  if (ntiles <= 1) return serial_sum(n, term);
  std::vector<double> part(ntiles, 0.0);
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(ntiles); ++t) {
    const std::size_t lo = static_cast<std::size_t>(t) * tile_size;
    const std::size_t hi = std::min(n, lo + tile_size);
    double p = 0.0;
    for (std::size_t i = lo; i < hi; ++i) p += term(i);
    part[static_cast<std::size_t>(t)] = p;
  }
  double total = 0.0;
  for (double p : part) total += p;
  return total;
}

template <class F>
double serial_max(std::size_t n, F&& term) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) best = std::max(best, term(i));
  return best;
}

// max is exactly associative, so a plain reduction suffices for determinism
template <class F>
double tiled_max(std::size_t n, F&& term) {
  const std::size_t ntiles = (n + tile_size - 1) / tile_size;
  if (ntiles <= 1) return serial_max(n, term);
  std::vector<double> part(ntiles, -std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(ntiles); ++t) {
    const std::size_t lo = static_cast<std::size_t>(t) * tile_size;
    const std::size_t hi = std::min(n, lo + tile_size);
    double p = -std::numeric_limits<double>::infinity();
    for (std::size_t i = lo; i < hi; ++i) p = std::max(p, term(i));
    part[static_cast<std::size_t>(t)] = p;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (double p : part) best = std::max(best, p);
  return best;
}

}  // namespace lacuna
