#pragma once

#include <functional>
#include <span>
#include <vector>

namespace imtl::nn {

/// Central differences (f(p + h) - f(p - h)) / 2h for every coordinate of `params`.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> params, double h);

/// In-place variant: perturbs each coordinate of each span, calls `f`, restores it.
/// Result is the concatenation in span order.
std::vector<double> finite_diff_grad(const std::function<double()>& f,
                                     const std::vector<std::span<double>>& params, double h);

/// |a - n| / (|n| + 1e-8), maximised over coordinates.
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric);

}  // namespace imtl::nn
