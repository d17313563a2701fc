#include "conelab/parallel.hpp"

#include <stdexcept>

namespace conelab {

namespace {
std::atomic<int> thread_count{1};
}

void set_threads(int n) {
  if (n < 1) throw std::invalid_argument("threads must be >= 1");
  thread_count = n;
}

int threads() { return thread_count; }

}  // namespace conelab
