#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "auricle/rng.hpp"
#include "auricle/tensor.hpp"

namespace auricle {

// Central-difference gradient verification. Callers run it on the double
// instantiation of a kernel; float rounding would drown the signal at the
// step sizes involved.

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::int64_t worst_index = -1;
    std::int64_t checked = 0;
};

inline double rel_err(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    return std::fabs(analytic - numeric) / denom;
}

// Perturbs entries of `param` in place (restoring each one), recomputing
// `loss` twice per entry. Large tensors are subsampled to `max_entries`
// random positions; everything is checked when the tensor is small enough.
template <typename LossFn>
GradCheckReport check_gradient(LossFn&& loss, TensorOf<double>& param,
                               const TensorOf<double>& analytic, double step = 1e-5,
                               std::int64_t max_entries = 64, std::uint64_t seed = 0) {
    if (!param.same_shape(analytic)) {
        throw ShapeError("gradcheck: analytic gradient shape " +
                         TensorOf<double>::shape_string(analytic.shape()) +
                         " does not match parameter " +
                         TensorOf<double>::shape_string(param.shape()));
    }
    std::vector<std::int64_t> order(param.numel());
    std::iota(order.begin(), order.end(), 0);
    if (param.numel() > max_entries) {
        Rng rng = Rng::derive(seed, {Rng::tag("gradcheck")});
        rng.shuffle(order.begin(), order.end());
        order.resize(max_entries);
    }

    GradCheckReport report;
    for (const std::int64_t i : order) {
        const double saved = param[i];
        param[i] = saved + step;
        const double up = loss();
        param[i] = saved - step;
        const double down = loss();
        param[i] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double err = rel_err(analytic[i], numeric);
        if (err > report.max_rel_err) {
            report.max_rel_err = err;
            report.worst_index = i;
        }
        ++report.checked;
    }
    return report;
}

}  // namespace auricle
