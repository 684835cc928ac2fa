#include "fairtp/sampler.hpp"

#include "fairtp/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fairtp {

StateLedger::StateLedger(int window_length, int sensor_count)
    : window_length_(window_length), sensor_count_(sensor_count) {
    if (window_length_ < 1) throw invalid_input("StateLedger: window length must be positive");
    if (sensor_count_ < 1) throw invalid_input("StateLedger: sensor count must be positive");
}

Vector StateLedger::accumulated() const {
    Vector total = Vector::Zero(sensor_count_);
    for (const Entry& e : entries_) total += e.contribution;
    return total;
}

std::vector<SensorId> StateLedger::sampled_union() const {
    std::vector<char> seen(static_cast<size_t>(sensor_count_), 0);
    for (const Entry& e : entries_)
        for (int v = 0; v < sensor_count_; ++v)
            if (e.sampled_mask[static_cast<size_t>(v)]) seen[static_cast<size_t>(v)] = 1;
    std::vector<SensorId> out;
    for (int v = 0; v < sensor_count_; ++v)
        if (seen[static_cast<size_t>(v)]) out.push_back(v);
    return out;
}

void StateLedger::clear() { entries_.clear(); }

void accumulate(StateLedger& ledger, const std::vector<SensorId>& sampled, const Vector& states) {
    if (static_cast<Eigen::Index>(sampled.size()) != states.size())
        throw invalid_input("accumulate: states must be defined exactly on the sampled set");
    StateLedger::Entry entry;
    entry.contribution = Vector::Zero(ledger.sensor_count());
    entry.sampled_mask.assign(static_cast<size_t>(ledger.sensor_count()), 0);
    SensorId prev = -1;
    for (size_t i = 0; i < sampled.size(); ++i) {
        const SensorId v = sampled[i];
        if (v < 0 || v >= ledger.sensor_count())
            throw invalid_input("accumulate: state for unknown sensor " + std::to_string(v));
        if (v <= prev) throw invalid_input("accumulate: sampled ids must be strictly ascending");
        prev = v;
        const Scalar d = states(static_cast<Eigen::Index>(i));
        if (!(d >= 0.0 && d <= 1.0))
            throw invalid_input("accumulate: state outside [0,1] for sensor " + std::to_string(v));
        entry.contribution(v) = d - 0.5;
        entry.sampled_mask[static_cast<size_t>(v)] = 1;
    }
    ledger.entries_.push_back(std::move(entry));
    while (static_cast<int>(ledger.entries_.size()) > ledger.window_length())
        ledger.entries_.pop_front();
}

std::vector<int> stratified_quotas(const RoadNetwork& network, int n_sam) {
    const int m = network.region_count();
    const int total = network.sensor_count();
    if (n_sam < m)
        throw invalid_input("stratified sampling: N_sam below region count, coverage impossible");
    if (n_sam > total) throw invalid_input("stratified sampling: N_sam exceeds sensor count");

    std::vector<int> quota(static_cast<size_t>(m));
    std::vector<Scalar> remainder(static_cast<size_t>(m));
    int assigned = 0;
    for (RegionId r = 0; r < m; ++r) {
        const Scalar raw =
            static_cast<Scalar>(n_sam) * network.region_size(r) / static_cast<Scalar>(total);
        quota[static_cast<size_t>(r)] = static_cast<int>(std::floor(raw));
        remainder[static_cast<size_t>(r)] = raw - std::floor(raw);
        assigned += quota[static_cast<size_t>(r)];
    }

    // Leftover seats by largest remainder, skipping regions at capacity.
    std::vector<RegionId> order(static_cast<size_t>(m));
    for (RegionId r = 0; r < m; ++r) order[static_cast<size_t>(r)] = r;
    std::stable_sort(order.begin(), order.end(), [&](RegionId a, RegionId b) {
        return remainder[static_cast<size_t>(a)] > remainder[static_cast<size_t>(b)];
    });
    int leftover = n_sam - assigned;
    while (leftover > 0) {
        bool granted = false;
        for (RegionId r : order) {
            if (leftover == 0) break;
            if (quota[static_cast<size_t>(r)] < network.region_size(r)) {
                ++quota[static_cast<size_t>(r)];
                --leftover;
                granted = true;
            }
        }
        if (!granted) throw invalid_input("stratified sampling: could not place all seats");
    }

    // Floor of one per region: pull a seat from the largest quota.
    for (RegionId r = 0; r < m; ++r) {
        while (quota[static_cast<size_t>(r)] == 0) {
            RegionId donor = -1;
            for (RegionId q = 0; q < m; ++q)
                if (quota[static_cast<size_t>(q)] > 1 &&
                    (donor < 0 || quota[static_cast<size_t>(q)] > quota[static_cast<size_t>(donor)]))
                    donor = q;
            if (donor < 0) throw invalid_input("stratified sampling: cannot guarantee coverage");
            --quota[static_cast<size_t>(donor)];
            ++quota[static_cast<size_t>(r)];
        }
    }
    return quota;
}

SamplingRound stratified_init(const RoadNetwork& network, int n_sam, std::uint64_t seed) {
    const std::vector<int> quota = stratified_quotas(network, n_sam);
    std::mt19937_64 rng(seed);

    SamplingRound round;
    round.round_index = 0;
    round.region_counts = IntVector::Zero(network.region_count());
    for (RegionId r = 0; r < network.region_count(); ++r) {
        std::vector<SensorId> pool = network.members(r);
        const int take = quota[static_cast<size_t>(r)];
        // Partial Fisher-Yates draw of `take` members.
        for (int i = 0; i < take; ++i) {
            const auto j = static_cast<size_t>(i) +
                           static_cast<size_t>(uniform_index(rng, pool.size() - static_cast<size_t>(i)));
            std::swap(pool[static_cast<size_t>(i)], pool[j]);
            round.sampled.push_back(pool[static_cast<size_t>(i)]);
        }
        round.region_counts(r) = take;
    }
    std::sort(round.sampled.begin(), round.sampled.end());

    round.sensor_probs = Vector::Constant(network.sensor_count(), 0.5);
    round.region_probs = region_probs(round.region_counts, n_sam, network.region_count());
    round.target_per_region = static_cast<Scalar>(n_sam) / network.region_count();
    return round;
}

Vector sensor_probs(const StateLedger& ledger) {
    if (ledger.entry_count() == 0) throw invalid_input("sensor_probs: empty ledger window");
    Vector p = ledger.accumulated();
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = logistic(p(i));
    return p;
}

Vector region_probs(const IntVector& region_counts, int n_sam, int region_count) {
    if (region_count < 1 || region_counts.size() != region_count)
        throw invalid_input("region_probs: bad region count");
    if (region_counts.minCoeff() < 0) throw invalid_input("region_probs: negative count");
    const Scalar target = static_cast<Scalar>(n_sam) / static_cast<Scalar>(region_count);
    Vector centered = region_counts.cast<Scalar>().array() - target;
    return softmax(centered);
}

Vector fuse_probs(const Vector& region_probabilities, const Vector& sensor_probabilities,
                  const RoadNetwork& network) {
    if (region_probabilities.size() != network.region_count() ||
        sensor_probabilities.size() != network.sensor_count())
        throw invalid_input("fuse_probs: probability maps do not cover the network");
    Vector fused(network.sensor_count());
    for (SensorId v = 0; v < network.sensor_count(); ++v)
        fused(v) = region_probabilities(network.region_of(v)) * sensor_probabilities(v);
    return fused;
}

SamplingRound greedy_select(const StateLedger& ledger, const RoadNetwork& network, int n_sam,
                            const GreedyOptions& options) {
    const int m = network.region_count();
    const int total = network.sensor_count();
    if (ledger.sensor_count() != total)
        throw invalid_input("greedy_select: ledger does not match the network");
    if (n_sam < m || n_sam > total) throw invalid_input("greedy_select: N_sam outside [m, |V|]");
    if (!ledger.window_full()) throw invalid_input("greedy_select: ledger window not full");
    if (options.counts_source == RegionCountsSource::previous_round &&
        (options.previous_counts == nullptr || options.previous_counts->size() != m))
        throw invalid_input("greedy_select: previous_round requires the prior round's counts");

    const Vector sensor_p = sensor_probs(ledger);
    IntVector counts = IntVector::Zero(m);
    std::vector<char> selected(static_cast<size_t>(total), 0);

    Vector fixed_region_p;
    if (options.counts_source == RegionCountsSource::previous_round)
        fixed_region_p = region_probs(*options.previous_counts, n_sam, m);

    SamplingRound round;
    for (int pick = 0; pick < n_sam; ++pick) {
        const Vector region_p = options.counts_source == RegionCountsSource::in_progress
                                    ? region_probs(counts, n_sam, m)
                                    : fixed_region_p;
        const Vector fused = fuse_probs(region_p, sensor_p, network);
        SensorId best = -1;
        for (SensorId v = 0; v < total; ++v) {
            if (selected[static_cast<size_t>(v)]) continue;
            if (best < 0 || fused(v) < fused(best)) best = v;
        }
        selected[static_cast<size_t>(best)] = 1;
        round.sampled.push_back(best);
        ++counts(network.region_of(best));
    }

    // Coverage repair: fill any region the loop left empty by swapping out the
    // highest-probability pick from an over-represented region.
    for (RegionId r = 0; r < m; ++r) {
        if (counts(r) > 0) continue;
        SensorId incoming = -1;
        for (SensorId v : network.members(r))
            if (!selected[static_cast<size_t>(v)] &&
                (incoming < 0 || sensor_p(v) < sensor_p(incoming)))
                incoming = v;

        const Vector region_p = options.counts_source == RegionCountsSource::in_progress
                                    ? region_probs(counts, n_sam, m)
                                    : fixed_region_p;
        const Vector fused = fuse_probs(region_p, sensor_p, network);
        SensorId outgoing = -1;
        for (SensorId v : round.sampled)
            if (counts(network.region_of(v)) > 1 && (outgoing < 0 || fused(v) > fused(outgoing)))
                outgoing = v;
        if (incoming < 0 || outgoing < 0)
            throw invalid_input("greedy_select: coverage repair failed");

        selected[static_cast<size_t>(incoming)] = 1;
        selected[static_cast<size_t>(outgoing)] = 0;
        std::replace(round.sampled.begin(), round.sampled.end(), outgoing, incoming);
        ++counts(r);
        --counts(network.region_of(outgoing));
    }

    std::sort(round.sampled.begin(), round.sampled.end());
    round.sensor_probs = sensor_p;
    round.region_probs = options.counts_source == RegionCountsSource::in_progress
                             ? region_probs(counts, n_sam, m)
                             : fixed_region_p;
    round.region_counts = counts;
    round.target_per_region = static_cast<Scalar>(n_sam) / static_cast<Scalar>(m);
    return round;
}

}  // namespace fairtp
