#include "imtl/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "imtl/errors.hpp"

namespace imtl::nn {

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> params, double h) {
    if (!(h > 0.0)) throw ConfigError("finite difference step must be > 0");
    std::vector<double> p(params.begin(), params.end());
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double orig = p[i];
        p[i] = orig + h;
        const double up = f(p);
        p[i] = orig - h;
        const double down = f(p);
        p[i] = orig;
        out[i] = (up - down) / (2.0 * h);
    }
    return out;
}

std::vector<double> finite_diff_grad(const std::function<double()>& f,
                                     const std::vector<std::span<double>>& params, double h) {
    if (!(h > 0.0)) throw ConfigError("finite difference step must be > 0");
    std::vector<double> out;
    for (auto span : params) {
        for (double& x : span) {
            const double orig = x;
            x = orig + h;
            const double up = f();
            x = orig - h;
            const double down = f();
            x = orig;
            out.push_back((up - down) / (2.0 * h));
        }
    }
    return out;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
    if (analytic.size() != numeric.size()) throw InternalError("gradient size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        worst = std::max(worst, std::fabs(analytic[i] - numeric[i]) / (std::fabs(numeric[i]) + 1e-8));
    }
    return worst;
}

}  // namespace imtl::nn
