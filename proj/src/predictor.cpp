#include "fairtp/predictor.hpp"

#include "fairtp/numeric.hpp"

#include <cmath>
#include <random>

namespace fairtp {

namespace {

void fill_uniform(std::mt19937_64& rng, Scalar bound, Matrix& dest) {
    for (Eigen::Index i = 0; i < dest.rows(); ++i)
        for (Eigen::Index j = 0; j < dest.cols(); ++j)
            dest(i, j) = bound * (2.0 * uniform01(rng) - 1.0);
}

void fill_uniform(std::mt19937_64& rng, Scalar bound, Vector& dest) {
    for (Eigen::Index i = 0; i < dest.size(); ++i)
        dest(i) = bound * (2.0 * uniform01(rng) - 1.0);
}

}  // namespace

ReferencePredictor::ReferencePredictor(int lookback, int horizon, int hidden_dim)
    : lookback_(lookback), horizon_(horizon), hidden_(hidden_dim) {
    if (lookback_ < 1 || horizon_ < 1 || hidden_ < 1)
        throw invalid_input("ReferencePredictor: lookback, horizon, hidden_dim must be positive");
    w_in = Matrix::Zero(hidden_, lookback_);
    b_in = Vector::Zero(hidden_);
    w_out = Matrix::Zero(horizon_, hidden_);
    b_out = Vector::Zero(horizon_);
}

ReferencePredictor ReferencePredictor::seeded(int lookback, int horizon, int hidden_dim,
                                              std::uint64_t seed) {
    ReferencePredictor model(lookback, horizon, hidden_dim);
    std::mt19937_64 rng(seed);
    const Scalar in_bound = 1.0 / std::sqrt(static_cast<Scalar>(lookback));
    const Scalar out_bound = 1.0 / std::sqrt(static_cast<Scalar>(hidden_dim));
    fill_uniform(rng, in_bound, model.w_in);
    fill_uniform(rng, in_bound, model.b_in);
    fill_uniform(rng, out_bound, model.w_out);
    fill_uniform(rng, out_bound, model.b_out);
    return model;
}

long ReferencePredictor::parameter_count() const {
    return static_cast<long>(w_in.size()) + static_cast<long>(b_in.size()) +
           static_cast<long>(w_out.size()) + static_cast<long>(b_out.size());
}

ForwardPass ReferencePredictor::forward(const Matrix& inputs) const {
    if (inputs.rows() != lookback_ || inputs.cols() < 1)
        throw invalid_input("forward: inputs must be lookback x (windows * sensors)");
    ForwardPass pass;
    pass.hidden = ((w_in * inputs).colwise() + b_in).array().tanh();
    pass.outputs = (w_out * pass.hidden).colwise() + b_out;
    return pass;
}

void ReferencePredictor::train_step(const Matrix& inputs, const ForwardPass& pass,
                                    const Matrix& output_grad, const Matrix& hidden_grad,
                                    Scalar learning_rate, Scalar clip_norm) {
    const ReferenceGradients grads =
        reference_backward(*this, inputs, pass, output_grad, hidden_grad);
    apply_gradients(*this, grads, learning_rate, clip_norm);
}

std::unique_ptr<Predictor> ReferencePredictor::clone() const {
    return std::make_unique<ReferencePredictor>(*this);
}

Scalar ReferenceGradients::global_norm() const {
    return std::sqrt(w_in.squaredNorm() + b_in.squaredNorm() + w_out.squaredNorm() +
                     b_out.squaredNorm());
}

ReferenceGradients reference_backward(const ReferencePredictor& model, const Matrix& inputs,
                                      const ForwardPass& pass, const Matrix& output_grad,
                                      const Matrix& hidden_grad) {
    if (output_grad.rows() != model.horizon() || output_grad.cols() != inputs.cols() ||
        hidden_grad.rows() != model.hidden_dim() || hidden_grad.cols() != inputs.cols())
        throw invalid_input("reference_backward: gradient shapes do not match the pass");

    ReferenceGradients g;
    g.w_out = output_grad * pass.hidden.transpose();
    g.b_out = output_grad.rowwise().sum();

    Matrix at_hidden = model.w_out.transpose() * output_grad + hidden_grad;
    Matrix at_preact = at_hidden.array() * (1.0 - pass.hidden.array().square());
    g.w_in = at_preact * inputs.transpose();
    g.b_in = at_preact.rowwise().sum();
    return g;
}

void apply_gradients(ReferencePredictor& model, const ReferenceGradients& grads,
                     Scalar learning_rate, Scalar clip_norm) {
    if (!(clip_norm > 0.0)) throw invalid_input("apply_gradients: clip_norm must be positive");
    Scalar scale = 1.0;
    const Scalar norm = grads.global_norm();
    if (!std::isfinite(norm)) throw divergence_error("apply_gradients: non-finite gradient");
    if (norm > clip_norm) scale = clip_norm / norm;

    const Scalar step = learning_rate * scale;
    model.w_in -= step * grads.w_in;
    model.b_in -= step * grads.b_in;
    model.w_out -= step * grads.w_out;
    model.b_out -= step * grads.b_out;
}

}  // namespace fairtp
