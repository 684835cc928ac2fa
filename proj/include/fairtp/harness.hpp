#pragma once

#include "fairtp/dataio.hpp"
#include "fairtp/loss.hpp"
#include "fairtp/metrics.hpp"
#include "fairtp/predictor.hpp"
#include "fairtp/sampler.hpp"
#include "fairtp/statekit.hpp"
#include "fairtp/types.hpp"

#include <cstdint>
#include <vector>

namespace fairtp {

struct TrainingConfig {
    int n_sam = 200;
    int t_d = 3;
    Scalar lambda1 = 0.01;  // weight of the region-fairness term
    Scalar lambda2 = 0.1;   // weight of the dynamic-fairness term
    int epochs = 20;
    int batch_size = 32;
    Scalar learning_rate = 0.01;
    Scalar disc_learning_rate = 0.1;
    std::uint64_t seed = 1;
    Scalar mask_epsilon = 1e-3;
    Scalar prob_epsilon = 1e-7;
    bool no_static = false;    // drop the region-fairness term from the objective
    bool no_dynamic = false;   // drop the dynamic-fairness term from the objective
    bool no_adaptive = false;  // keep the stratified sample for the whole run
    bool binarize_states = false;
    RegionCountsSource counts_source = RegionCountsSource::in_progress;
    int lookback = 12;
    int horizon = 12;
    int hidden_dim = 16;
    Scalar grad_clip = 5.0;
    bool dis_to_predictor = false;

    void validate() const;  // throws config_error naming the bad field
};

/// First and second draws of the run's master generator. The predictor takes
/// the first so a bare reference run and a full run start from identical
/// weights; the stratified draw takes the second.
std::uint64_t predictor_seed(std::uint64_t run_seed);
std::uint64_t sampling_seed(std::uint64_t run_seed);

/// Global affine transform fitted on the training split; models train on
/// (x - mean) / std and predictions are mapped back before any metric.
struct Normalization {
    Scalar mean = 0.0;
    Scalar std = 1.0;
};

Normalization fit_normalization(const TrafficSeries& train);

struct ReferenceRunResult {
    ThresholdSchedule schedule;     // mean training MAPE per epoch, floored at 1e-12
    std::vector<Scalar> train_mae;  // mean training MAE per epoch
    ReferencePredictor predictor;   // final weights
};

/// Accuracy-only training of a fresh reference predictor on every sensor.
/// Its per-epoch training MAPE curve becomes the threshold schedule for the
/// fairness run. Raises divergence_error naming the epoch if the loss leaves
/// the finite range.
ReferenceRunResult reference_run(const TrafficSeries& train, const RoadNetwork& network,
                                 const Normalization& norm, const TrainingConfig& config);

struct EpochRecord {
    int epoch = 0;
    Scalar threshold = 0.0;
    /// Batch means; l_sdf averages only the batches carrying the term.
    LossComponents train_loss;
    FairnessReport validation;
};

struct SamplingTrace {
    int round_index = 0;
    long batch_index = 0;  // global batch count when the set was installed
    std::vector<SensorId> sampled;
    IntVector region_counts;
};

struct RunRecord {
    ThresholdSchedule schedule;
    std::vector<EpochRecord> epochs;
    std::vector<SamplingTrace> rounds;  // round 0 is the stratified draw
    std::vector<long> sdf_batches;      // global batch indices carrying the SDF term
    Discriminator discriminator;
    std::vector<SensorId> sampled;  // final sampled set
    double duration_seconds = 0.0;
};

/// The balanced-sampling training loop. Per batch: forward the sampled
/// sub-dataset, label sensor states against the epoch's threshold, step the
/// discriminator, then step the predictor on the composite loss with the
/// discriminator frozen, and record states in the ledger. Every t_d batches
/// the loss carries the dynamic-fairness term, a new sampled set is selected
/// (unless no_adaptive) and the ledger window resets. Validation is
/// evaluated after every epoch. The model must arrive initialized (see
/// predictor_seed); it is trained in place.
RunRecord train_fairtp(const TrafficSeries& train, const TrafficSeries& validation,
                       const RoadNetwork& network, const ThresholdSchedule& schedule,
                       const Normalization& norm, Predictor& model, const TrainingConfig& config);

/// Held-out evaluation over windows tiled at horizon stride. Per-sensor
/// summaries cover the sampled set; regional predictions average the sampled
/// members while regional truth averages every sensor. The dynamic-fairness
/// figure accumulates discriminator states over full t_d-window chunks and
/// averages the chunk losses; the discriminator loss is scored against
/// labels from `threshold`.
FairnessReport evaluate(const Predictor& model, const Discriminator& disc,
                        const std::vector<SensorId>& sampled, const TrafficSeries& split,
                        const RoadNetwork& network, const Normalization& norm, Scalar threshold,
                        const TrainingConfig& config);

enum class SweepParam { t_d, n_sam };

struct SweepRow {
    int value = 0;
    std::uint64_t seed = 0;
    FairnessReport test;
};

/// Independent full runs (reference run, training, test evaluation) per
/// value; run k uses seed base.seed + k.
std::vector<SweepRow> sweep(SweepParam param, const std::vector<int>& values,
                            const SplitSeries& splits, const RoadNetwork& network,
                            const TrainingConfig& base);

}  // namespace fairtp
