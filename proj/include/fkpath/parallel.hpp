#pragma once

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fkpath/estimate.hpp"

namespace fkpath {

/// How an ensemble reduction is executed.
///
/// Parallel mode splits the sample range into fixed chunks of kChunkSize,
/// reduces each chunk in index order and merges chunk partials in chunk order;
/// the result is bit-identical for every worker count. Serial mode is the
/// plain single-accumulator reference loop kept for cross-checking: it agrees
/// with the parallel result to rounding, not bitwise.
struct Exec {
  enum class Mode { parallel, serial_reference };
  int workers = 1;
  Mode mode = Mode::parallel;

  static Exec serial() { return {1, Mode::serial_reference}; }
  static Exec with_workers(int n) { return {n, Mode::parallel}; }
};

inline constexpr std::size_t kChunkSize = 256;

/// Reduce `n_samples` samples of width `width` into a MomentAccumulator.
///
/// `make_worker()` is called once per chunk (or once in serial mode) and must
/// return a callable `bool(std::size_t index, std::span<double> out)` that
/// writes sample `index` into `out` and returns false to reject the sample.
/// Workers own their scratch space; the factory itself must be thread-safe.
template <class WorkerFactory>
MomentAccumulator reduce_samples(std::size_t n_samples, std::size_t width, const Exec& exec,
                                 WorkerFactory&& make_worker) {
  if (exec.mode == Exec::Mode::serial_reference) {
    MomentAccumulator acc(width);
    auto worker = make_worker();
    std::vector<double> buf(width);
    for (std::size_t i = 0; i < n_samples; ++i) {
      if (worker(i, std::span<double>(buf)))
        acc.add(buf);
      else
        acc.reject();
    }
    return acc;
  }

  const std::size_t n_chunks = (n_samples + kChunkSize - 1) / kChunkSize;
  std::vector<MomentAccumulator> partial(n_chunks, MomentAccumulator(width));
  std::vector<std::exception_ptr> errors(n_chunks);
  const int workers = exec.workers < 1 ? 1 : exec.workers;

#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
    try {
      auto worker = make_worker();
      std::vector<double> buf(width);
      const std::size_t begin = static_cast<std::size_t>(c) * kChunkSize;
      const std::size_t end = std::min(n_samples, begin + kChunkSize);
      for (std::size_t i = begin; i < end; ++i) {
        if (worker(i, std::span<double>(buf)))
          partial[c].add(buf);
        else
          partial[c].reject();
      }
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  MomentAccumulator total(width);
  for (const auto& p : partial) total.merge(p);
  return total;
}

}  // namespace fkpath
