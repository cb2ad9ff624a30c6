#include "vair/threading.hpp"

#include <algorithm>

namespace vair {

namespace {
int g_threads = int(std::max(1u, std::thread::hardware_concurrency()));
}

int thread_count() { return g_threads; }

void set_thread_count(int n) { g_threads = std::max(1, n); }

}  // namespace vair
