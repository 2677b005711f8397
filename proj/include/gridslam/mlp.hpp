#pragma once

#include <span>
#include <vector>

#include "gridslam/rng.hpp"

namespace gridslam {

enum class OutputActivation { tanh_out, sigmoid_out };

// Two-hidden-layer perceptron with ReLU hidden activations. Weights are a
// single flat parameter vector so the optimizer can treat the decoder as one
// block. Biases start at zero, weights symmetric uniform scaled by fan-in.
class Mlp {
public:
    Mlp() = default;
    Mlp(int in_dim, int hidden_dim, int out_dim, OutputActivation act);

    void init_weights(Rng& rng);

    int in_dim() const { return in_; }
    int out_dim() const { return out_; }
    int hidden_dim() const { return hidden_; }
    size_t param_count() const { return params_.size(); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    // Scratch for one forward evaluation; reusable across calls.
    struct Workspace {
        std::vector<double> input;   // cached input
        std::vector<double> h1, h2;  // post-ReLU activations
        std::vector<double> z1, z2;  // pre-activations
        std::vector<double> zout;    // output pre-activation
    };

    void forward(const double* in, double* out, Workspace& ws) const;

    // Backward for the forward stored in ws. Adds parameter gradients into
    // grad_params (ignored when empty) and input gradients into d_in
    // (ignored when null).
    void backward(const Workspace& ws, const double* d_out, std::span<double> grad_params,
                  double* d_in) const;

private:
    // Flat layout: W1[h*in], b1[h], W2[h*h], b2[h], W3[out*h], b3[out].
    size_t w1() const { return 0; }
    size_t b1() const { return size_t(hidden_) * in_; }
    size_t w2() const { return b1() + hidden_; }
    size_t b2() const { return w2() + size_t(hidden_) * hidden_; }
    size_t w3() const { return b2() + hidden_; }
    size_t b3() const { return w3() + size_t(out_) * hidden_; }

    int in_ = 0, hidden_ = 0, out_ = 0;
    OutputActivation act_ = OutputActivation::tanh_out;
    std::vector<double> params_;
};

} // namespace gridslam
