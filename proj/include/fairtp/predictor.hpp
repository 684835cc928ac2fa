#pragma once

#include "fairtp/types.hpp"

#include <cstdint>
#include <memory>

namespace fairtp {

/// Activations of one forward pass. Columns are window-major: column
/// b*S + i holds window b of the i-th requested sensor.
struct ForwardPass {
    Matrix outputs;  // horizon x (windows * sensors)
    Matrix hidden;   // hidden_dim x (windows * sensors)
};

/// Trainable sequence model mapping a lookback window of one sensor to a
/// horizon of future values. Implementations expose their hidden layer so the
/// state discriminator and fairness losses can reach it.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual int lookback() const = 0;
    virtual int horizon() const = 0;
    virtual int hidden_dim() const = 0;
    virtual long parameter_count() const = 0;

    /// Forward over a batch of windows; inputs is lookback x (windows * sensors).
    virtual ForwardPass forward(const Matrix& inputs) const = 0;

    /// One descent step given loss gradients w.r.t. outputs and hidden
    /// activations. Gradients are clipped to `clip_norm` in global norm.
    virtual void train_step(const Matrix& inputs, const ForwardPass& pass,
                            const Matrix& output_grad, const Matrix& hidden_grad,
                            Scalar learning_rate, Scalar clip_norm) = 0;

    virtual std::unique_ptr<Predictor> clone() const = 0;
};

/// Single-hidden-layer model shared across sensors:
///   h = tanh(W_in x + b_in),  y = W_out h + b_out.
class ReferencePredictor final : public Predictor {
public:
    ReferencePredictor(int lookback, int horizon, int hidden_dim);

    /// Uniform init in (-1/sqrt(fan_in), 1/sqrt(fan_in)) per layer, drawn in a
    /// fixed order so a seed pins every weight.
    static ReferencePredictor seeded(int lookback, int horizon, int hidden_dim,
                                     std::uint64_t seed);

    int lookback() const override { return lookback_; }
    int horizon() const override { return horizon_; }
    int hidden_dim() const override { return hidden_; }
    long parameter_count() const override;

    ForwardPass forward(const Matrix& inputs) const override;
    void train_step(const Matrix& inputs, const ForwardPass& pass, const Matrix& output_grad,
                    const Matrix& hidden_grad, Scalar learning_rate, Scalar clip_norm) override;
    std::unique_ptr<Predictor> clone() const override;

    Matrix w_in;   // hidden_dim x lookback
    Vector b_in;   // hidden_dim
    Matrix w_out;  // horizon x hidden_dim
    Vector b_out;  // horizon

private:
    int lookback_ = 0;
    int horizon_ = 0;
    int hidden_ = 0;
};

struct ReferenceGradients {
    Matrix w_in;
    Vector b_in;
    Matrix w_out;
    Vector b_out;

    Scalar global_norm() const;
};

/// Analytic gradients of a scalar loss with the given output/hidden
/// gradients, for the reference model.
ReferenceGradients reference_backward(const ReferencePredictor& model, const Matrix& inputs,
                                      const ForwardPass& pass, const Matrix& output_grad,
                                      const Matrix& hidden_grad);

/// Descent step with global-norm clipping: if the joint gradient norm exceeds
/// `clip_norm` the whole bundle is rescaled to that norm first.
void apply_gradients(ReferencePredictor& model, const ReferenceGradients& grads,
                     Scalar learning_rate, Scalar clip_norm);

}  // namespace fairtp
