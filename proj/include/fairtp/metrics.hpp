#pragma once

#include "fairtp/numeric.hpp"
#include "fairtp/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

namespace fairtp {

/// Accuracy of one prediction stream. `mape` is a fraction, not a percent;
/// `masked_count` counts entries skipped by the MAPE near-zero-truth mask.
struct AccuracySummary {
    Scalar mae = 0.0;
    Scalar rmse = 0.0;
    Scalar mape = 0.0;
    long masked_count = 0;
};

/// Fairness and accuracy digest of one run segment.
struct LossComponents {
    Scalar l_acc = 0.0;
    Scalar l_rsf = 0.0;
    Scalar l_sdf = 0.0;
    Scalar l_dis = 0.0;
    Scalar total = 0.0;
};

struct FairnessReport {
    std::map<RegionId, AccuracySummary> per_region;
    std::map<SensorId, AccuracySummary> per_sensor;
    Scalar rsf_loss = 0.0;
    Scalar sdf_loss = 0.0;
    LossComponents loss_components;
};

template <typename D1, typename D2>
Scalar mae(const Eigen::DenseBase<D1>& pred, const Eigen::DenseBase<D2>& truth) {
    if (pred.size() == 0 || pred.size() != truth.size())
        throw invalid_input("mae: inputs empty or mismatched");
    return (pred.derived().array() - truth.derived().array()).abs().mean();
}

template <typename D1, typename D2>
Scalar rmse(const Eigen::DenseBase<D1>& pred, const Eigen::DenseBase<D2>& truth) {
    if (pred.size() == 0 || pred.size() != truth.size())
        throw invalid_input("rmse: inputs empty or mismatched");
    return std::sqrt((pred.derived().array() - truth.derived().array()).square().mean());
}

/// Mean absolute percentage error over entries whose truth magnitude is at
/// least `mask_epsilon`. Masked entries are excluded, not clamped; if all
/// entries are masked the MAPE is 0 with a full masked count.
template <typename D1, typename D2>
std::pair<Scalar, long> mape(const Eigen::DenseBase<D1>& pred, const Eigen::DenseBase<D2>& truth,
                             Scalar mask_epsilon) {
    if (pred.size() == 0 || pred.size() != truth.size())
        throw invalid_input("mape: inputs empty or mismatched");
    Scalar sum = 0.0;
    long kept = 0, masked = 0;
    const auto& p = pred.derived();
    const auto& t = truth.derived();
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            const Scalar tv = t(i, j);
            if (std::abs(tv) < mask_epsilon) {
                ++masked;
                continue;
            }
            sum += std::abs(p(i, j) - tv) / std::abs(tv);
            ++kept;
        }
    }
    if (kept == 0) return {0.0, masked};
    return {sum / static_cast<Scalar>(kept), masked};
}

template <typename D1, typename D2>
AccuracySummary accuracy_summary(const Eigen::DenseBase<D1>& pred,
                                 const Eigen::DenseBase<D2>& truth, Scalar mask_epsilon) {
    AccuracySummary s;
    s.mae = mae(pred, truth);
    s.rmse = rmse(pred, truth);
    std::tie(s.mape, s.masked_count) = mape(pred, truth, mask_epsilon);
    return s;
}

/// Static fairness between two regions: absolute gap of their MAPEs.
inline Scalar rsf_pair(Scalar mape_p, Scalar mape_q) { return std::abs(mape_p - mape_q); }

/// Dynamic fairness between two sensors: absolute gap of their accumulated
/// window states.
inline Scalar sdf_pair(Scalar accumulated_i, Scalar accumulated_j) {
    return std::abs(accumulated_i - accumulated_j);
}

/// Mean absolute difference over all unordered pairs, O(n^2) form.
/// This is the differentiable route used for training gradients.
template <typename Derived>
Scalar mean_pairwise_abs_diff_quadratic(const Eigen::DenseBase<Derived>& values) {
    const Eigen::Index n = values.size();
    if (n < 2) throw invalid_input("mean_pairwise_abs_diff: need at least 2 values");
    const auto& v = values.derived();
    Scalar sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) sum += std::abs(v(i) - v(j));
    return sum * 2.0 / (static_cast<Scalar>(n) * static_cast<Scalar>(n - 1));
}

/// Same quantity via sorting: sum_{i<j} |v_i - v_j| = sum_k (2k - n + 1) v_(k)
/// with 0-based ranks over the sorted values. O(n log n), evaluation path.
template <typename Derived>
Scalar mean_pairwise_abs_diff_sorted(const Eigen::DenseBase<Derived>& values) {
    const Eigen::Index n = values.size();
    if (n < 2) throw invalid_input("mean_pairwise_abs_diff: need at least 2 values");
    std::vector<Scalar> sorted(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<size_t>(i)] = values.derived()(i);
    std::sort(sorted.begin(), sorted.end());
    Scalar sum = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
        sum += static_cast<Scalar>(2 * k - n + 1) * sorted[static_cast<size_t>(k)];
    return sum * 2.0 / (static_cast<Scalar>(n) * static_cast<Scalar>(n - 1));
}

/// Subgradient of mean_pairwise_abs_diff w.r.t. each value, with the
/// sign(0) = 0 convention: g_i = (2/(n(n-1))) * sum_j sign(v_i - v_j).
template <typename Derived>
Vector mean_pairwise_abs_diff_grad(const Eigen::DenseBase<Derived>& values) {
    const Eigen::Index n = values.size();
    if (n < 2) throw invalid_input("mean_pairwise_abs_diff_grad: need at least 2 values");
    const auto& v = values.derived();
    Vector g = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Scalar s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (v(i) > v(j))
                s += 1.0;
            else if (v(i) < v(j))
                s -= 1.0;
        }
        g(i) = s * 2.0 / (static_cast<Scalar>(n) * static_cast<Scalar>(n - 1));
    }
    return g;
}

/// Region-based static fairness loss: mean RSF over all unordered region
/// pairs (the 2/(m(m-1)) normalization is exactly the pair mean).
template <typename Derived>
Scalar rsf_loss(const Eigen::DenseBase<Derived>& region_mapes) {
    if (region_mapes.size() < 2) throw invalid_input("rsf_loss: need at least 2 regions");
    return mean_pairwise_abs_diff_quadratic(region_mapes);
}

/// Sensor-based dynamic fairness loss: mean SDF over all unordered sensor
/// pairs of the window's accumulated states. Sort-based fast path.
template <typename Derived>
Scalar sdf_loss(const Eigen::DenseBase<Derived>& accumulated) {
    if (accumulated.size() < 2) throw invalid_input("sdf_loss: need at least 2 sensors");
    return mean_pairwise_abs_diff_sorted(accumulated);
}

}  // namespace fairtp
