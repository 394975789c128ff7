#include "imtl/nn/forward_cache.hpp"

#include <cmath>

namespace imtl::nn {

void ForwardCache::append(std::string layer, Matrix output) {
    entries_.push_back({std::move(layer), std::move(output)});
}

const Matrix* ForwardCache::find(const std::string& layer) const {
    for (const auto& e : entries_) {
        if (e.layer == layer) return &e.output;
    }
    return nullptr;
}

double energy_of(const Matrix& output) {
    double sum = 0.0;
    for (double v : output.values()) sum += std::fabs(v);
    return sum;
}

double energy_of(const ForwardCache& cache) {
    double sum = 0.0;
    for (const auto& e : cache.entries()) sum += energy_of(e.output);
    return sum;
}

}  // namespace imtl::nn
