#include "cvqec/parallel.hpp"

#include <atomic>

namespace cvqec {

namespace {
std::atomic<unsigned> g_default_threads{0};
}

void set_default_threads(unsigned threads) { g_default_threads.store(threads); }

unsigned default_threads() {
    const unsigned t = g_default_threads.load();
    if (t != 0) return t;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace cvqec
