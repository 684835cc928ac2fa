#pragma once

// Slow, obviously-correct re-implementations the tests score the library
// against. Everything here is written in the most literal form possible and
// shares no code with the library internals.

#include "fairtp/predictor.hpp"
#include "fairtp/road_network.hpp"
#include "fairtp/types.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using fairtp::Matrix;
using fairtp::Scalar;
using fairtp::Vector;

// Mean |v_i - v_j| over all unordered pairs, plain double loop.
inline Scalar pair_mean(const std::vector<Scalar>& v) {
    const size_t n = v.size();
    Scalar sum = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            sum += std::abs(v[i] - v[j]);
            ++pairs;
        }
    return sum / static_cast<Scalar>(pairs);
}

// Masked MAPE over a single prediction/truth stream.
inline Scalar masked_mape(const std::vector<Scalar>& pred, const std::vector<Scalar>& truth,
                          Scalar eps) {
    Scalar sum = 0.0;
    long kept = 0;
    for (size_t k = 0; k < pred.size(); ++k) {
        if (std::abs(truth[k]) < eps) continue;
        sum += std::abs(pred[k] - truth[k]) / std::abs(truth[k]);
        ++kept;
    }
    return kept == 0 ? 0.0 : sum / static_cast<Scalar>(kept);
}

// Column means restricted to the listed sensor columns of one region.
inline std::vector<Scalar> region_stream(const Matrix& values,
                                         const std::vector<fairtp::SensorId>& columns) {
    std::vector<Scalar> out;
    for (Eigen::Index t = 0; t < values.rows(); ++t) {
        Scalar sum = 0.0;
        for (fairtp::SensorId c : columns) sum += values(t, c);
        out.push_back(sum / static_cast<Scalar>(columns.size()));
    }
    return out;
}

// Forward pass of the two-layer reference model written as scalar loops.
inline Matrix forward_by_hand(const fairtp::ReferencePredictor& model, const Matrix& inputs) {
    Matrix out(model.horizon(), inputs.cols());
    for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
        std::vector<Scalar> h(static_cast<size_t>(model.hidden_dim()));
        for (int i = 0; i < model.hidden_dim(); ++i) {
            Scalar z = model.b_in(i);
            for (int k = 0; k < model.lookback(); ++k) z += model.w_in(i, k) * inputs(k, c);
            h[static_cast<size_t>(i)] = std::tanh(z);
        }
        for (int o = 0; o < model.horizon(); ++o) {
            Scalar z = model.b_out(o);
            for (int i = 0; i < model.hidden_dim(); ++i)
                z += model.w_out(o, i) * h[static_cast<size_t>(i)];
            out(o, c) = z;
        }
    }
    return out;
}

// Central finite difference of `loss` w.r.t. one coordinate accessed through
// get/set closures.
inline Scalar central_difference(const std::function<Scalar()>& loss,
                                 const std::function<Scalar()>& get,
                                 const std::function<void(Scalar)>& set, Scalar h) {
    const Scalar original = get();
    set(original + h);
    const Scalar up = loss();
    set(original - h);
    const Scalar down = loss();
    set(original);
    return (up - down) / (2.0 * h);
}

inline Scalar relative_gap(Scalar got, Scalar expected) {
    const Scalar scale = std::max<Scalar>(std::abs(expected), 1.0);
    return std::abs(got - expected) / scale;
}

}  // namespace oracle
