#include "fairtp/statekit.hpp"

#include "fairtp/numeric.hpp"

#include <cmath>

namespace fairtp {

ThresholdSchedule::ThresholdSchedule(std::vector<Scalar> per_epoch)
    : per_epoch_(std::move(per_epoch)) {
    if (per_epoch_.empty()) throw invalid_input("ThresholdSchedule: empty schedule");
    for (Scalar t : per_epoch_)
        if (!std::isfinite(t) || t <= 0.0)
            throw invalid_input("ThresholdSchedule: entries must be finite and positive");
}

Scalar ThresholdSchedule::at(int epoch) const {
    if (epoch < 0) throw invalid_input("ThresholdSchedule: negative epoch");
    const size_t i = std::min(static_cast<size_t>(epoch), per_epoch_.size() - 1);
    return per_epoch_[i];
}

Discriminator Discriminator::zeros(int hidden_dim, Scalar learning_rate) {
    if (hidden_dim < 1) throw invalid_input("Discriminator: hidden_dim must be positive");
    Discriminator d;
    d.weights = Vector::Zero(hidden_dim);
    d.learning_rate = learning_rate;
    return d;
}

std::vector<int> label_states(const Vector& per_sensor_mape, Scalar threshold) {
    std::vector<int> labels(static_cast<size_t>(per_sensor_mape.size()));
    for (Eigen::Index i = 0; i < per_sensor_mape.size(); ++i)
        labels[static_cast<size_t>(i)] = per_sensor_mape(i) < threshold ? 1 : 0;
    return labels;
}

Scalar discriminate(const Discriminator& disc, const Vector& hidden) {
    if (hidden.size() != disc.weights.size())
        throw invalid_input("discriminate: hidden dimension mismatch");
    return logistic(disc.weights.dot(hidden) + disc.bias);
}

Vector discriminate_batch(const Discriminator& disc, const Matrix& hidden_rows) {
    if (hidden_rows.cols() != disc.weights.size())
        throw invalid_input("discriminate_batch: hidden dimension mismatch");
    Vector out(hidden_rows.rows());
    for (Eigen::Index i = 0; i < hidden_rows.rows(); ++i)
        out(i) = logistic(hidden_rows.row(i).dot(disc.weights) + disc.bias);
    return out;
}

Scalar discriminator_loss(Scalar d, int label, Scalar prob_epsilon) {
    const Scalar p = clip_probability(d, prob_epsilon);
    return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

void discriminator_step(Discriminator& disc, const Matrix& hidden_rows,
                        const std::vector<int>& labels) {
    const Eigen::Index n = hidden_rows.rows();
    if (n == 0) throw invalid_input("discriminator_step: empty batch");
    if (static_cast<size_t>(n) != labels.size())
        throw invalid_input("discriminator_step: labels do not match batch");

    const Vector d = discriminate_batch(disc, hidden_rows);
    Vector residual(n);
    for (Eigen::Index i = 0; i < n; ++i)
        residual(i) = d(i) - static_cast<Scalar>(labels[static_cast<size_t>(i)]);

    const Scalar inv = 1.0 / static_cast<Scalar>(n);
    const Vector grad_w = hidden_rows.transpose() * residual * inv;
    const Scalar grad_b = residual.sum() * inv;
    disc.weights -= disc.learning_rate * grad_w;
    disc.bias -= disc.learning_rate * grad_b;
}

}  // namespace fairtp
