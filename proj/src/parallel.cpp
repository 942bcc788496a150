#include "ubmlab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace ubmlab::parallel {

namespace {
std::atomic<int> g_override{0};
}

int worker_count() {
    if (int w = g_override.load(); w > 0) return w;
    if (const char* env = std::getenv("UBMLAB_WORKERS")) {
        try {
            int w = std::stoi(env);
            if (w > 0) return w;
        } catch (...) {
        }
    }
    return omp_get_max_threads();
}

void set_worker_count(int workers) { g_override.store(workers > 0 ? workers : 0); }

double tree_sum(std::span<const double> values) {
    if (values.empty()) return 0.0;
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return tree_sum(values.first(half)) + tree_sum(values.subspan(half));
}

}  // namespace ubmlab::parallel
