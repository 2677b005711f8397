#include "gridslam/mlp.hpp"

#include <cmath>

namespace gridslam {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

Mlp::Mlp(int in_dim, int hidden_dim, int out_dim, OutputActivation act)
    : in_(in_dim), hidden_(hidden_dim), out_(out_dim), act_(act) {
    params_.assign(b3() + out_, 0.0);
}

void Mlp::init_weights(Rng& rng) {
    auto fill = [&rng, this](size_t offset, size_t count, int fan_in) {
        const double bound = 1.0 / std::sqrt(double(fan_in));
        for (size_t i = 0; i < count; ++i) params_[offset + i] = rng.uniform(-bound, bound);
    };
    fill(w1(), size_t(hidden_) * in_, in_);
    fill(w2(), size_t(hidden_) * hidden_, hidden_);
    fill(w3(), size_t(out_) * hidden_, hidden_);
    // Biases stay zero so a fresh field decodes to the activation midpoint.
}

void Mlp::forward(const double* in, double* out, Workspace& ws) const {
    ws.input.assign(in, in + in_);
    ws.z1.resize(hidden_);
    ws.h1.resize(hidden_);
    ws.z2.resize(hidden_);
    ws.h2.resize(hidden_);
    ws.zout.resize(out_);
    const double* p = params_.data();
    for (int i = 0; i < hidden_; ++i) {
        double acc = p[b1() + i];
        const double* row = p + w1() + size_t(i) * in_;
        for (int j = 0; j < in_; ++j) acc += row[j] * in[j];
        ws.z1[i] = acc;
        ws.h1[i] = acc > 0.0 ? acc : 0.0;
    }
    for (int i = 0; i < hidden_; ++i) {
        double acc = p[b2() + i];
        const double* row = p + w2() + size_t(i) * hidden_;
        for (int j = 0; j < hidden_; ++j) acc += row[j] * ws.h1[j];
        ws.z2[i] = acc;
        ws.h2[i] = acc > 0.0 ? acc : 0.0;
    }
    for (int i = 0; i < out_; ++i) {
        double acc = p[b3() + i];
        const double* row = p + w3() + size_t(i) * hidden_;
        for (int j = 0; j < hidden_; ++j) acc += row[j] * ws.h2[j];
        ws.zout[i] = acc;
        out[i] = act_ == OutputActivation::tanh_out ? std::tanh(acc) : sigmoid(acc);
    }
}

void Mlp::backward(const Workspace& ws, const double* d_out, std::span<double> grad_params,
                   double* d_in) const {
    const double* p = params_.data();
    const bool want_params = !grad_params.empty();

    std::vector<double> dz_out(out_), dh2(hidden_, 0.0), dh1(hidden_, 0.0);
    for (int i = 0; i < out_; ++i) {
        double da;
        if (act_ == OutputActivation::tanh_out) {
            const double t = std::tanh(ws.zout[i]);
            da = 1.0 - t * t;
        } else {
            const double s = sigmoid(ws.zout[i]);
            da = s * (1.0 - s);
        }
        dz_out[i] = d_out[i] * da;
    }
    for (int i = 0; i < out_; ++i) {
        const double g = dz_out[i];
        const double* row = p + w3() + size_t(i) * hidden_;
        if (want_params) {
            double* grow = grad_params.data() + w3() + size_t(i) * hidden_;
            for (int j = 0; j < hidden_; ++j) grow[j] += g * ws.h2[j];
            grad_params[b3() + i] += g;
        }
        for (int j = 0; j < hidden_; ++j) dh2[j] += g * row[j];
    }
    for (int i = 0; i < hidden_; ++i) {
        const double g = ws.z2[i] > 0.0 ? dh2[i] : 0.0;
        if (g == 0.0) continue;
        const double* row = p + w2() + size_t(i) * hidden_;
        if (want_params) {
            double* grow = grad_params.data() + w2() + size_t(i) * hidden_;
            for (int j = 0; j < hidden_; ++j) grow[j] += g * ws.h1[j];
            grad_params[b2() + i] += g;
        }
        for (int j = 0; j < hidden_; ++j) dh1[j] += g * row[j];
    }
    for (int i = 0; i < hidden_; ++i) {
        const double g = ws.z1[i] > 0.0 ? dh1[i] : 0.0;
        if (g == 0.0) continue;
        const double* row = p + w1() + size_t(i) * in_;
        if (want_params) {
            double* grow = grad_params.data() + w1() + size_t(i) * in_;
            for (int j = 0; j < in_; ++j) grow[j] += g * ws.input[j];
            grad_params[b1() + i] += g;
        }
        if (d_in)
            for (int j = 0; j < in_; ++j) d_in[j] += g * row[j];
    }
}

} // namespace gridslam
