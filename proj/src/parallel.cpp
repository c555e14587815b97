#include "simrf/parallel.hpp"

#include <algorithm>

namespace simrf {

std::size_t resolve_threads(std::size_t requested, std::size_t tasks) {
    std::size_t n = requested;
    if (n == 0) n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(n, tasks));
}

}  // namespace simrf
