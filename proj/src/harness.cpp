#include "fairtp/harness.hpp"

#include "fairtp/numeric.hpp"
#include "fairtp/series.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

namespace fairtp {

namespace {

void require(bool ok, const char* field) {
    if (!ok) throw config_error(std::string("invalid config field: ") + field);
}

struct WindowPlan {
    std::vector<int> starts;  // input start steps, stride 1, chronological
};

WindowPlan training_windows(const TrafficSeries& series, const TrainingConfig& config) {
    const int span = config.lookback + config.horizon;
    if (series.step_count() < span)
        throw invalid_input("training split is shorter than one window");
    const int window_count = series.step_count() - span + 1;
    if (window_count < config.batch_size)
        throw invalid_input("training split is too short for one full batch");
    WindowPlan plan;
    plan.starts.resize(static_cast<size_t>(window_count));
    std::iota(plan.starts.begin(), plan.starts.end(), 0);
    return plan;
}

Matrix gather_windows(const Matrix& values, const std::vector<int>& starts, size_t first,
                      size_t count, const std::vector<SensorId>& sensors, int offset, int rows) {
    const auto subset = static_cast<Eigen::Index>(sensors.size());
    Matrix out(rows, static_cast<Eigen::Index>(count) * subset);
    for (size_t w = 0; w < count; ++w) {
        const int start = starts[first + w] + offset;
        for (Eigen::Index i = 0; i < subset; ++i)
            out.col(static_cast<Eigen::Index>(w) * subset + i) =
                values.block(start, sensors[static_cast<size_t>(i)], rows, 1);
    }
    return out;
}

Matrix gather_inputs(const Matrix& values, const std::vector<int>& starts, size_t first,
                     size_t count, const std::vector<SensorId>& sensors,
                     const TrainingConfig& config, const Normalization& norm) {
    Matrix x = gather_windows(values, starts, first, count, sensors, 0, config.lookback);
    return ((x.array() - norm.mean) / norm.std).matrix();
}

Matrix gather_targets(const Matrix& values, const std::vector<int>& starts, size_t first,
                      size_t count, const std::vector<SensorId>& sensors,
                      const TrainingConfig& config) {
    return gather_windows(values, starts, first, count, sensors, config.lookback, config.horizon);
}

// One column stream (all windows of one subset position) out of a
// window-major block.
Matrix sensor_stream(const Matrix& block, Eigen::Index subset, Eigen::Index i) {
    const Eigen::Index windows = block.cols() / subset;
    Matrix out(block.rows(), windows);
    for (Eigen::Index w = 0; w < windows; ++w) out.col(w) = block.col(w * subset + i);
    return out;
}

Vector per_sensor_mape(const Matrix& pred, const Matrix& truth, Eigen::Index subset,
                       Scalar mask_epsilon) {
    const Eigen::Index windows = pred.cols() / subset;
    Vector out(subset);
    for (Eigen::Index i = 0; i < subset; ++i) {
        Scalar sum = 0.0;
        long kept = 0;
        for (Eigen::Index w = 0; w < windows; ++w) {
            for (Eigen::Index t = 0; t < pred.rows(); ++t) {
                const Scalar tv = truth(t, w * subset + i);
                if (std::abs(tv) < mask_epsilon) continue;
                sum += std::abs(pred(t, w * subset + i) - tv) / std::abs(tv);
                ++kept;
            }
        }
        out(i) = kept ? sum / static_cast<Scalar>(kept) : 0.0;
    }
    return out;
}

void check_sampled(const std::vector<SensorId>& sampled, const RoadNetwork& network,
                   const char* who) {
    if (sampled.empty()) throw invalid_input(std::string(who) + ": empty sampled set");
    for (size_t i = 0; i < sampled.size(); ++i) {
        if (sampled[i] < 0 || sampled[i] >= network.sensor_count())
            throw invalid_input(std::string(who) + ": sampled id out of range");
        if (i > 0 && sampled[i] <= sampled[i - 1])
            throw invalid_input(std::string(who) + ": sampled ids must be strictly ascending");
    }
}

}  // namespace

void TrainingConfig::validate() const {
    require(n_sam >= 1, "N_sam");
    require(t_d >= 1, "T_d");
    require(std::isfinite(lambda1) && lambda1 >= 0.0, "lambda1");
    require(std::isfinite(lambda2) && lambda2 >= 0.0, "lambda2");
    require(epochs >= 1, "epochs");
    require(batch_size >= 1, "batch_size");
    require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate");
    require(std::isfinite(disc_learning_rate) && disc_learning_rate > 0.0, "disc_learning_rate");
    require(std::isfinite(mask_epsilon) && mask_epsilon > 0.0, "mask_epsilon");
    require(std::isfinite(prob_epsilon) && prob_epsilon > 0.0 && prob_epsilon < 0.5,
            "prob_epsilon");
    require(lookback >= 1, "lookback");
    require(horizon >= 1, "horizon");
    require(hidden_dim >= 1, "hidden_dim");
    require(std::isfinite(grad_clip) && grad_clip > 0.0, "grad_clip");
}

std::uint64_t predictor_seed(std::uint64_t run_seed) {
    std::mt19937_64 master(run_seed);
    return master();
}

std::uint64_t sampling_seed(std::uint64_t run_seed) {
    std::mt19937_64 master(run_seed);
    master();
    return master();
}

Normalization fit_normalization(const TrafficSeries& train) {
    const Matrix& v = train.values();
    Normalization norm;
    norm.mean = v.mean();
    norm.std = std::max(std::sqrt((v.array() - norm.mean).square().mean()), 1e-8);
    return norm;
}

ReferenceRunResult reference_run(const TrafficSeries& train, const RoadNetwork& network,
                                 const Normalization& norm, const TrainingConfig& config) {
    config.validate();
    if (train.sensor_count() != network.sensor_count())
        throw invalid_input("reference_run: series does not match the network");
    const WindowPlan plan = training_windows(train, config);
    const size_t per_epoch = plan.starts.size() / static_cast<size_t>(config.batch_size);

    std::vector<SensorId> all(static_cast<size_t>(network.sensor_count()));
    std::iota(all.begin(), all.end(), 0);

    ReferencePredictor model = ReferencePredictor::seeded(config.lookback, config.horizon,
                                                          config.hidden_dim,
                                                          predictor_seed(config.seed));
    const Matrix no_hidden_grad =
        Matrix::Zero(config.hidden_dim,
                     static_cast<Eigen::Index>(config.batch_size) * network.sensor_count());

    std::vector<Scalar> schedule_entries, mae_curve;
    for (int e = 0; e < config.epochs; ++e) {
        Scalar mape_sum = 0.0, mae_sum = 0.0;
        for (size_t b = 0; b < per_epoch; ++b) {
            const size_t first = b * static_cast<size_t>(config.batch_size);
            const Matrix x = gather_inputs(train.values(), plan.starts, first,
                                           static_cast<size_t>(config.batch_size), all, config,
                                           norm);
            const Matrix y = gather_targets(train.values(), plan.starts, first,
                                            static_cast<size_t>(config.batch_size), all, config);
            const ForwardPass pass = model.forward(x);
            const Matrix pred = (pass.outputs.array() * norm.std + norm.mean).matrix();
            const Scalar batch_mae = mae(pred, y);
            if (!std::isfinite(batch_mae))
                throw divergence_error("reference run diverged at epoch " + std::to_string(e));
            mae_sum += batch_mae;
            mape_sum += mape(pred, y, config.mask_epsilon).first;

            const Matrix g_real =
                ((pred - y).array().sign() / static_cast<Scalar>(pred.size())).matrix();
            const Matrix g_out = (g_real.array() * norm.std).matrix();
            model.train_step(x, pass, g_out, no_hidden_grad, config.learning_rate,
                             config.grad_clip);
        }
        schedule_entries.push_back(
            std::max<Scalar>(mape_sum / static_cast<Scalar>(per_epoch), 1e-12));
        mae_curve.push_back(mae_sum / static_cast<Scalar>(per_epoch));
    }
    return ReferenceRunResult{ThresholdSchedule(std::move(schedule_entries)),
                              std::move(mae_curve), std::move(model)};
}

RunRecord train_fairtp(const TrafficSeries& train, const TrafficSeries& validation,
                       const RoadNetwork& network, const ThresholdSchedule& schedule,
                       const Normalization& norm, Predictor& model,
                       const TrainingConfig& config) {
    config.validate();
    if (schedule.size() == 0) throw invalid_input("train_fairtp: empty threshold schedule");
    if (train.sensor_count() != network.sensor_count())
        throw invalid_input("train_fairtp: series does not match the network");
    if (model.lookback() != config.lookback || model.horizon() != config.horizon ||
        model.hidden_dim() != config.hidden_dim)
        throw invalid_input("train_fairtp: model shape does not match the config");

    const auto started = std::chrono::steady_clock::now();
    const WindowPlan plan = training_windows(train, config);
    const size_t per_epoch = plan.starts.size() / static_cast<size_t>(config.batch_size);

    RunRecord record;
    record.schedule = schedule;

    const SamplingRound init =
        stratified_init(network, config.n_sam, sampling_seed(config.seed));
    std::vector<SensorId> sampled = init.sampled;
    IntVector counts = init.region_counts;
    record.rounds.push_back(SamplingTrace{0, 0, sampled, counts});

    StateLedger ledger(config.t_d, network.sensor_count());
    Discriminator disc = Discriminator::zeros(config.hidden_dim, config.disc_learning_rate);

    long global_batch = 0;
    int round_index = 0;
    for (int e = 0; e < config.epochs; ++e) {
        const Scalar threshold = schedule.at(e);
        LossComponents sums;
        long sdf_count = 0;
        for (size_t b = 0; b < per_epoch; ++b) {
            ++global_batch;
            const size_t first = b * static_cast<size_t>(config.batch_size);
            const Matrix x = gather_inputs(train.values(), plan.starts, first,
                                           static_cast<size_t>(config.batch_size), sampled,
                                           config, norm);
            const Matrix y = gather_targets(train.values(), plan.starts, first,
                                            static_cast<size_t>(config.batch_size), sampled,
                                            config);
            const ForwardPass pass = model.forward(x);
            const Matrix pred = (pass.outputs.array() * norm.std + norm.mean).matrix();

            const auto subset = static_cast<Eigen::Index>(sampled.size());
            const Vector sensor_mape = per_sensor_mape(pred, y, subset, config.mask_epsilon);
            const std::vector<int> labels = label_states(sensor_mape, threshold);

            // Discriminator steps first; the predictor sees it frozen.
            const Eigen::Index last = (pred.cols() / subset - 1) * subset;
            Matrix hidden_rows(subset, config.hidden_dim);
            for (Eigen::Index i = 0; i < subset; ++i)
                hidden_rows.row(i) = pass.hidden.col(last + i).transpose();
            discriminator_step(disc, hidden_rows, labels);

            LossSettings settings;
            settings.lambda_rsf = config.no_static ? 0.0 : config.lambda1;
            settings.lambda_sdf = config.no_dynamic ? 0.0 : config.lambda2;
            settings.include_sdf = global_batch % config.t_d == 0;
            settings.dis_to_predictor = config.dis_to_predictor;
            settings.binarize_states = config.binarize_states;
            settings.mask_epsilon = config.mask_epsilon;
            settings.prob_epsilon = config.prob_epsilon;

            const BatchLoss loss = batch_loss(pred, y, pass.hidden, network, sampled, ledger,
                                              disc, labels, settings);
            if (!std::isfinite(loss.components.total))
                throw divergence_error("training diverged at epoch " + std::to_string(e) +
                                       ", batch " + std::to_string(b));
            const BatchGradients grads = batch_loss_gradients(pred, y, pass.hidden, network,
                                                              sampled, ledger, disc, labels,
                                                              settings);
            const Matrix g_out = (grads.pred.array() * norm.std).matrix();
            model.train_step(x, pass, g_out, grads.hidden, config.learning_rate,
                             config.grad_clip);

            accumulate(ledger, sampled, loss.states);

            sums.l_acc += loss.components.l_acc;
            sums.l_rsf += loss.components.l_rsf;
            sums.l_dis += loss.components.l_dis;
            sums.total += loss.components.total;
            if (settings.include_sdf) {
                sums.l_sdf += loss.components.l_sdf;
                ++sdf_count;
                record.sdf_batches.push_back(global_batch);
            }

            if (global_batch % config.t_d == 0) {
                if (!config.no_adaptive) {
                    GreedyOptions options;
                    options.counts_source = config.counts_source;
                    options.previous_counts = &counts;
                    const SamplingRound next =
                        greedy_select(ledger, network, config.n_sam, options);
                    sampled = next.sampled;
                    counts = next.region_counts;
                }
                ++round_index;
                record.rounds.push_back(
                    SamplingTrace{round_index, global_batch, sampled, counts});
                ledger.clear();
            }
        }

        EpochRecord epoch;
        epoch.epoch = e;
        epoch.threshold = threshold;
        const auto denom = static_cast<Scalar>(per_epoch);
        epoch.train_loss.l_acc = sums.l_acc / denom;
        epoch.train_loss.l_rsf = sums.l_rsf / denom;
        epoch.train_loss.l_dis = sums.l_dis / denom;
        epoch.train_loss.total = sums.total / denom;
        epoch.train_loss.l_sdf = sdf_count ? sums.l_sdf / static_cast<Scalar>(sdf_count) : 0.0;
        epoch.validation =
            evaluate(model, disc, sampled, validation, network, norm, threshold, config);
        record.epochs.push_back(std::move(epoch));
    }

    record.discriminator = std::move(disc);
    record.sampled = std::move(sampled);
    record.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return record;
}

FairnessReport evaluate(const Predictor& model, const Discriminator& disc,
                        const std::vector<SensorId>& sampled, const TrafficSeries& split,
                        const RoadNetwork& network, const Normalization& norm, Scalar threshold,
                        const TrainingConfig& config) {
    config.validate();
    check_sampled(sampled, network, "evaluate");
    if (split.sensor_count() != network.sensor_count())
        throw invalid_input("evaluate: series does not match the network");
    const int span = config.lookback + config.horizon;
    if (split.step_count() < span) throw invalid_input("evaluate: split shorter than one window");
    const int window_count = (split.step_count() - span) / config.horizon + 1;

    std::vector<int> starts(static_cast<size_t>(window_count));
    for (size_t w = 0; w < starts.size(); ++w)
        starts[w] = static_cast<int>(w) * config.horizon;

    const Matrix x = gather_inputs(split.values(), starts, 0, starts.size(), sampled, config,
                                   norm);
    const Matrix y = gather_targets(split.values(), starts, 0, starts.size(), sampled, config);
    const ForwardPass pass = model.forward(x);
    const Matrix pred = (pass.outputs.array() * norm.std + norm.mean).matrix();
    const auto subset = static_cast<Eigen::Index>(sampled.size());

    FairnessReport report;
    for (Eigen::Index i = 0; i < subset; ++i)
        report.per_sensor[sampled[static_cast<size_t>(i)]] =
            accuracy_summary(sensor_stream(pred, subset, i), sensor_stream(y, subset, i),
                             config.mask_epsilon);

    // Regional streams: predictions average the sampled members, truth
    // averages every sensor in the region.
    const int regions = network.region_count();
    std::vector<SensorId> all(static_cast<size_t>(network.sensor_count()));
    std::iota(all.begin(), all.end(), 0);
    std::vector<Matrix> region_pred(static_cast<size_t>(regions),
                                    Matrix(config.horizon, window_count));
    std::vector<Matrix> region_truth(static_cast<size_t>(regions),
                                     Matrix(config.horizon, window_count));
    for (int w = 0; w < window_count; ++w) {
        const Matrix pw = region_means(pred.middleCols(w * subset, subset), network, sampled);
        const Matrix tw = region_means(
            split.values().block(starts[static_cast<size_t>(w)] + config.lookback, 0,
                                 config.horizon, network.sensor_count()),
            network, all);
        for (int r = 0; r < regions; ++r) {
            region_pred[static_cast<size_t>(r)].col(w) = pw.col(r);
            region_truth[static_cast<size_t>(r)].col(w) = tw.col(r);
        }
    }
    Vector region_mapes(regions);
    for (int r = 0; r < regions; ++r) {
        const AccuracySummary summary =
            accuracy_summary(region_pred[static_cast<size_t>(r)],
                             region_truth[static_cast<size_t>(r)], config.mask_epsilon);
        report.per_region[r] = summary;
        region_mapes(r) = summary.mape;
    }
    report.rsf_loss = regions >= 2 ? rsf_loss(region_mapes) : 0.0;

    // Discriminator states over the evaluation stream.
    Matrix probs(subset, window_count);
    for (int w = 0; w < window_count; ++w)
        for (Eigen::Index i = 0; i < subset; ++i)
            probs(i, w) = discriminate(disc, pass.hidden.col(w * subset + i));

    const int chunks = window_count / config.t_d;
    Scalar sdf_sum = 0.0;
    for (int c = 0; c < chunks; ++c) {
        Vector accumulated = Vector::Zero(subset);
        for (int w = c * config.t_d; w < (c + 1) * config.t_d; ++w)
            for (Eigen::Index i = 0; i < subset; ++i)
                accumulated(i) += clip_probability(probs(i, w), config.prob_epsilon) - 0.5;
        if (subset >= 2) sdf_sum += sdf_loss(accumulated);
    }
    report.sdf_loss = chunks > 0 ? sdf_sum / static_cast<Scalar>(chunks) : 0.0;

    Scalar dis_sum = 0.0;
    for (int w = 0; w < window_count; ++w) {
        for (Eigen::Index i = 0; i < subset; ++i) {
            Scalar sum = 0.0;
            long kept = 0;
            for (int t = 0; t < config.horizon; ++t) {
                const Scalar tv = y(t, w * subset + i);
                if (std::abs(tv) < config.mask_epsilon) continue;
                sum += std::abs(pred(t, w * subset + i) - tv) / std::abs(tv);
                ++kept;
            }
            const Scalar window_mape = kept ? sum / static_cast<Scalar>(kept) : 0.0;
            const int label = window_mape < threshold ? 1 : 0;
            dis_sum += discriminator_loss(probs(i, w), label, config.prob_epsilon);
        }
    }

    LossComponents& c = report.loss_components;
    c.l_acc = mae(pred, y);
    c.l_rsf = report.rsf_loss;
    c.l_sdf = report.sdf_loss;
    c.l_dis = dis_sum / static_cast<Scalar>(subset * window_count);
    const Scalar l1 = config.no_static ? 0.0 : config.lambda1;
    const Scalar l2 = config.no_dynamic ? 0.0 : config.lambda2;
    c.total = c.l_acc + l1 * c.l_rsf + l2 * c.l_sdf;
    return report;
}

std::vector<SweepRow> sweep(SweepParam param, const std::vector<int>& values,
                            const SplitSeries& splits, const RoadNetwork& network,
                            const TrainingConfig& base) {
    if (values.empty()) throw invalid_input("sweep: empty value list");
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (size_t k = 0; k < values.size(); ++k) {
        TrainingConfig config = base;
        config.seed = base.seed + k;
        if (param == SweepParam::t_d)
            config.t_d = values[k];
        else
            config.n_sam = values[k];
        config.validate();

        const Normalization norm = fit_normalization(splits.train);
        const ReferenceRunResult reference =
            reference_run(splits.train, network, norm, config);
        ReferencePredictor model = ReferencePredictor::seeded(
            config.lookback, config.horizon, config.hidden_dim, predictor_seed(config.seed));
        const RunRecord record = train_fairtp(splits.train, splits.validation, network,
                                              reference.schedule, norm, model, config);
        const FairnessReport test =
            evaluate(model, record.discriminator, record.sampled, splits.test, network, norm,
                     record.schedule.at(config.epochs - 1), config);
        rows.push_back(SweepRow{values[k], config.seed, test});
    }
    return rows;
}

}  // namespace fairtp
