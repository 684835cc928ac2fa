#pragma once

#include "fairtp/metrics.hpp"
#include "fairtp/road_network.hpp"
#include "fairtp/sampler.hpp"
#include "fairtp/statekit.hpp"
#include "fairtp/types.hpp"

#include <vector>

namespace fairtp {

struct LossSettings {
    Scalar lambda_rsf = 0.01;
    Scalar lambda_sdf = 0.1;
    /// The dynamic-fairness term only enters on batches that complete a
    /// ledger window; the harness sets this flag on those batches.
    bool include_sdf = false;
    /// Route the discriminator loss gradient into the predictor's hidden
    /// layer on top of training the discriminator itself.
    bool dis_to_predictor = false;
    /// Use hard 0/1 labels as states instead of discriminator outputs. Hard
    /// states carry no gradient back to the predictor.
    bool binarize_states = false;
    Scalar mask_epsilon = 1e-3;
    Scalar prob_epsilon = 1e-7;
};

/// One batch's loss stack. `probs` are raw discriminator outputs per sampled
/// sensor; `states` are the clipped (or binarized) values the ledger records.
struct BatchLoss {
    LossComponents components;
    Vector probs;
    Vector states;
};

struct BatchGradients {
    Matrix pred;    // d loss / d predictions
    Matrix hidden;  // d loss / d hidden activations (final window only)
};

/// Composite training loss over one batch of the sampled sub-dataset.
///
/// `pred`, `truth` are horizon x (windows * S) in window-major column order;
/// `hidden` matches with hidden_dim rows, and the discriminator reads the
/// final window's columns. `prior` holds the ledger entries accumulated since
/// the last selection round, excluding this batch. Components:
///   l_acc   mean absolute error over every entry,
///   l_rsf   mean pairwise gap of region MAPEs (regions averaged over the
///           sampled members, predictions and truth alike),
///   l_sdf   mean pairwise gap of accumulated states over the window's
///           sampled union including this batch (0 unless include_sdf),
///   l_dis   mean binary cross-entropy of discriminator outputs vs labels,
///   total   l_acc + lambda_rsf * l_rsf + lambda_sdf * l_sdf.
BatchLoss batch_loss(const Matrix& pred, const Matrix& truth, const Matrix& hidden,
                     const RoadNetwork& network, const std::vector<SensorId>& sampled,
                     const StateLedger& prior, const Discriminator& disc,
                     const std::vector<int>& labels, const LossSettings& settings);

/// Analytic gradients of the batch objective w.r.t. predictions and hidden
/// activations. The objective is `total`, plus l_dis when dis_to_predictor
/// is set. Absolute values use the sign(0) = 0 subgradient; clipped
/// probabilities pass no gradient.
BatchGradients batch_loss_gradients(const Matrix& pred, const Matrix& truth, const Matrix& hidden,
                                    const RoadNetwork& network,
                                    const std::vector<SensorId>& sampled,
                                    const StateLedger& prior, const Discriminator& disc,
                                    const std::vector<int>& labels, const LossSettings& settings);

}  // namespace fairtp
