#pragma once

#include "fairtp/road_network.hpp"
#include "fairtp/types.hpp"

#include <cstdint>
#include <deque>
#include <vector>

namespace fairtp {

/// Rolling record of centered per-batch sensor states over the most recent
/// window of batches: a sampled sensor contributes state - 0.5, an unsampled
/// sensor contributes 0 for that batch. Older batches are evicted once the
/// window holds `window_length` entries.
class StateLedger {
public:
    StateLedger(int window_length, int sensor_count);

    int window_length() const { return window_length_; }
    int sensor_count() const { return sensor_count_; }
    int entry_count() const { return static_cast<int>(entries_.size()); }
    bool window_full() const { return entry_count() == window_length_; }

    /// Accumulated state D per sensor over the current window (never-sampled
    /// sensors sit at 0).
    Vector accumulated() const;

    /// Sensors sampled in at least one batch of the current window, ascending.
    std::vector<SensorId> sampled_union() const;

    void clear();

    struct Entry {
        Vector contribution;             // sensor_count; 0 where unsampled
        std::vector<char> sampled_mask;  // sensor_count
    };
    const std::deque<Entry>& entries() const { return entries_; }

private:
    friend void accumulate(StateLedger&, const std::vector<SensorId>&, const Vector&);
    int window_length_ = 0;
    int sensor_count_ = 0;
    std::deque<Entry> entries_;
};

/// Append one batch of states. `sampled` lists the batch's sampled sensors in
/// ascending order; `states` holds the matching state values in [0,1].
void accumulate(StateLedger& ledger, const std::vector<SensorId>& sampled, const Vector& states);

/// One round of sensor selection and the probability maps that produced it.
struct SamplingRound {
    int round_index = 0;
    std::vector<SensorId> sampled;  // ascending, size N_sam
    Vector sensor_probs;            // per sensor, logistic(D)
    Vector region_probs;            // per region, sums to 1
    IntVector region_counts;        // sampled sensors per region
    Scalar target_per_region = 0.0;  // C_a = N_sam / m
};

/// Proportional-quota stratified initialization: largest-remainder quotas
/// with a floor of one sensor per region, then a uniform seeded draw inside
/// each region.
SamplingRound stratified_init(const RoadNetwork& network, int n_sam, std::uint64_t seed);

/// Largest-remainder quotas alone (exposed for the hand-executable cases).
std::vector<int> stratified_quotas(const RoadNetwork& network, int n_sam);

/// Sampling probability per sensor: logistic of the accumulated state, 0.5
/// for sensors never sampled inside the window.
Vector sensor_probs(const StateLedger& ledger);

/// Region sampling probabilities: softmax over counts centered at
/// C_a = N_sam / m (real-valued).
Vector region_probs(const IntVector& region_counts, int n_sam, int region_count);

/// Broadcast each region's probability onto its member sensors and multiply
/// with the per-sensor probabilities.
Vector fuse_probs(const Vector& region_probabilities, const Vector& sensor_probabilities,
                  const RoadNetwork& network);

enum class RegionCountsSource {
    in_progress,     // recompute region probabilities after every pick
    previous_round,  // fix them once from the prior round's final counts
};

struct GreedyOptions {
    RegionCountsSource counts_source = RegionCountsSource::in_progress;
    /// Final counts of the prior round; required for previous_round.
    const IntVector* previous_counts = nullptr;
};

/// Iterative greedy selection of the N_sam sensors with the lowest fused
/// probabilities, ties broken by lowest sensor id. Guarantees at least one
/// sensor per region (repairing by swap if the loop left a region empty).
SamplingRound greedy_select(const StateLedger& ledger, const RoadNetwork& network, int n_sam,
                            const GreedyOptions& options = {});

}  // namespace fairtp
