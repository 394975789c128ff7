#pragma once

#include <string>
#include <vector>

#include "imtl/nn/matrix.hpp"

namespace imtl::nn {

struct CacheEntry {
    std::string layer;
    Matrix output;  // post-activation
};

/// Post-activation outputs of one forward pass, in forward order.
class ForwardCache {
public:
    void append(std::string layer, Matrix output);
    void clear() { entries_.clear(); }

    const std::vector<CacheEntry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    const Matrix* find(const std::string& layer) const;

private:
    std::vector<CacheEntry> entries_;
};

/// Activation energy: sum over entries of the sum of |output| elements.
double energy_of(const ForwardCache& cache);
double energy_of(const Matrix& output);

}  // namespace imtl::nn
