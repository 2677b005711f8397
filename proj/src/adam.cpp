#include "gridslam/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace gridslam {

void adam_step(std::span<double> values, std::span<const double> grad, AdamState& state,
               double lr, const AdamParams& p) {
    if (values.size() != grad.size()) throw std::runtime_error("adam: values/grad length mismatch");
    if (state.m.empty() && state.v.empty()) state.reset(values.size());
    if (state.m.size() != values.size())
        throw std::runtime_error("adam: state length mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(p.beta1, state.t);
    const double bc2 = 1.0 - std::pow(p.beta2, state.t);
    for (size_t i = 0; i < values.size(); ++i) {
        state.m[i] = p.beta1 * state.m[i] + (1.0 - p.beta1) * grad[i];
        state.v[i] = p.beta2 * state.v[i] + (1.0 - p.beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        values[i] -= lr * mhat / (std::sqrt(vhat) + p.eps);
    }
}

} // namespace gridslam
