#pragma once

#include <complex>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qidlab {

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Failure category carried by every library exception.
enum class ErrorKind {
  input,            ///< malformed or out-of-contract arguments
  refinement,       ///< step too coarse for the requested evaluation
  branch_tracking,  ///< distinguished logarithm hit a (near-)zero
  plateau,          ///< tail plateau not reached, extend the grid
  horizon,          ///< averaging horizon insufficient
  resolution,       ///< frequency gap below averaging resolution
  inversion,        ///< Wiener-algebra inversion did not converge
  extraction,       ///< triplet extraction stage failed
  embedding,        ///< off-lattice location
  divergence,       ///< series dominance condition violated
  io,               ///< file or parse failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

/// Worker cap: hardware concurrency clipped by the QIDLAB_THREADS
/// environment variable. Always at least 1.
inline int max_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("QIDLAB_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1 && cap < hw) hw = static_cast<int>(cap);
  }
  return hw;
}

/// Chunked parallel loop. body(i) must only touch slot i of its outputs;
/// reductions are merged by the caller in index order so results do not
/// depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& body) {
  int workers = max_threads();
  if (workers <= 1 || n < 1024) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  if (static_cast<std::size_t>(workers) > n) workers = static_cast<int>(n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::size_t lo = static_cast<std::size_t>(w) * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace qidlab
