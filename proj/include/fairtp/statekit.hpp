#pragma once

#include "fairtp/types.hpp"

#include <vector>

namespace fairtp {

/// Per-epoch MAPE thresholds recorded from a reference run of the bare
/// predictor. Label "benefit" (1) when a sensor's epoch MAPE is strictly
/// below the epoch's entry.
class ThresholdSchedule {
public:
    ThresholdSchedule() = default;
    explicit ThresholdSchedule(std::vector<Scalar> per_epoch);

    const std::vector<Scalar>& per_epoch() const { return per_epoch_; }
    int size() const { return static_cast<int>(per_epoch_.size()); }

    /// Entry for a given epoch; shorter schedules repeat the last entry.
    Scalar at(int epoch) const;

private:
    std::vector<Scalar> per_epoch_;
};

/// Trainable logistic unit mapping a hidden representation to a state
/// prediction in (0,1).
struct Discriminator {
    Vector weights;  // hidden_dim
    Scalar bias = 0.0;
    Scalar learning_rate = 0.1;

    static Discriminator zeros(int hidden_dim, Scalar learning_rate);
};

/// 1 ("benefit") where mape < threshold, else 0 ("sacrifice"); a tie is a
/// sacrifice.
std::vector<int> label_states(const Vector& per_sensor_mape, Scalar threshold);

/// State prediction for one hidden vector: logistic(weights . hidden + bias).
Scalar discriminate(const Discriminator& disc, const Vector& hidden);

/// Row-wise state predictions for a batch of hidden vectors (rows = items).
Vector discriminate_batch(const Discriminator& disc, const Matrix& hidden_rows);

/// Binary cross-entropy of prediction d against label Y, with d clipped into
/// [prob_epsilon, 1 - prob_epsilon] before the logs.
Scalar discriminator_loss(Scalar d, int label, Scalar prob_epsilon);

/// One gradient-descent step on the mean discriminator loss over a batch.
/// Analytic gradient: (d - Y) * hidden for weights, (d - Y) for the bias.
void discriminator_step(Discriminator& disc, const Matrix& hidden_rows,
                        const std::vector<int>& labels);

}  // namespace fairtp
