#include "fairtp/loss.hpp"

#include "fairtp/numeric.hpp"
#include "fairtp/series.hpp"

#include <cmath>
#include <string>

namespace fairtp {

namespace {

// Everything both the loss and its gradients need, computed once so the two
// entry points cannot drift apart.
struct BatchContext {
    Eigen::Index subset = 0;   // S, sampled sensors per window
    Eigen::Index windows = 0;  // B
    int regions = 0;
    std::vector<std::vector<int>> positions;  // per region, indices into sampled
    std::vector<Matrix> region_pred;          // per region, horizon x windows
    std::vector<Matrix> region_truth;
    Vector region_mapes;
    std::vector<long> region_kept;
    Vector probs;            // raw discriminator outputs, per sampled sensor
    Vector states;           // clipped or binarized
    std::vector<char> pass;  // 1 where the clip passes gradient through
    std::vector<SensorId> union_ids;
    Vector union_d;
    std::vector<int> union_pos;  // per sampled sensor, index into union_ids
    LossComponents components;
};

BatchContext analyze(const Matrix& pred, const Matrix& truth, const Matrix& hidden,
                     const RoadNetwork& network, const std::vector<SensorId>& sampled,
                     const StateLedger& prior, const Discriminator& disc,
                     const std::vector<int>& labels, const LossSettings& settings) {
    if (pred.rows() < 1 || pred.cols() < 1 || pred.rows() != truth.rows() ||
        pred.cols() != truth.cols())
        throw invalid_input("batch_loss: prediction and truth shapes differ");
    if (sampled.empty()) throw invalid_input("batch_loss: empty sampled set");
    if (prior.sensor_count() != network.sensor_count())
        throw invalid_input("batch_loss: ledger does not match the network");
    for (size_t i = 0; i < sampled.size(); ++i) {
        if (sampled[i] < 0 || sampled[i] >= network.sensor_count())
            throw invalid_input("batch_loss: sampled id out of range");
        if (i > 0 && sampled[i] <= sampled[i - 1])
            throw invalid_input("batch_loss: sampled ids must be strictly ascending");
    }

    BatchContext ctx;
    ctx.subset = static_cast<Eigen::Index>(sampled.size());
    if (pred.cols() % ctx.subset != 0)
        throw invalid_input("batch_loss: columns are not a whole number of windows");
    ctx.windows = pred.cols() / ctx.subset;
    if (hidden.cols() != pred.cols() || hidden.rows() != disc.weights.size())
        throw invalid_input("batch_loss: hidden activations do not match the discriminator");
    if (static_cast<Eigen::Index>(labels.size()) != ctx.subset)
        throw invalid_input("batch_loss: one label per sampled sensor required");
    for (int y : labels)
        if (y != 0 && y != 1) throw invalid_input("batch_loss: labels must be 0 or 1");
    if (!(settings.mask_epsilon > 0.0) || !(settings.prob_epsilon > 0.0) ||
        settings.prob_epsilon >= 0.5)
        throw invalid_input("batch_loss: bad epsilon settings");

    ctx.regions = network.region_count();
    ctx.positions.resize(static_cast<size_t>(ctx.regions));
    for (Eigen::Index i = 0; i < ctx.subset; ++i)
        ctx.positions[static_cast<size_t>(network.region_of(sampled[static_cast<size_t>(i)]))]
            .push_back(static_cast<int>(i));
    for (int r = 0; r < ctx.regions; ++r)
        if (ctx.positions[static_cast<size_t>(r)].empty())
            throw invalid_input("batch_loss: region " + std::to_string(r) +
                                " has no sampled sensor");

    // Region traffic streams: per-window means over the sampled members.
    ctx.region_pred.assign(static_cast<size_t>(ctx.regions), Matrix(pred.rows(), ctx.windows));
    ctx.region_truth.assign(static_cast<size_t>(ctx.regions), Matrix(pred.rows(), ctx.windows));
    for (Eigen::Index b = 0; b < ctx.windows; ++b) {
        const Matrix p = region_means(pred.middleCols(b * ctx.subset, ctx.subset), network, sampled);
        const Matrix t =
            region_means(truth.middleCols(b * ctx.subset, ctx.subset), network, sampled);
        for (int r = 0; r < ctx.regions; ++r) {
            ctx.region_pred[static_cast<size_t>(r)].col(b) = p.col(r);
            ctx.region_truth[static_cast<size_t>(r)].col(b) = t.col(r);
        }
    }
    ctx.region_mapes = Vector::Zero(ctx.regions);
    ctx.region_kept.assign(static_cast<size_t>(ctx.regions), 0);
    for (int r = 0; r < ctx.regions; ++r) {
        const auto [value, masked] =
            mape(ctx.region_pred[static_cast<size_t>(r)], ctx.region_truth[static_cast<size_t>(r)],
                 settings.mask_epsilon);
        ctx.region_mapes(r) = value;
        ctx.region_kept[static_cast<size_t>(r)] =
            ctx.region_pred[static_cast<size_t>(r)].size() - masked;
    }

    // Discriminator view of the batch: final window's hidden columns.
    const Eigen::Index last = (ctx.windows - 1) * ctx.subset;
    ctx.probs = Vector::Zero(ctx.subset);
    ctx.states = Vector::Zero(ctx.subset);
    ctx.pass.assign(static_cast<size_t>(ctx.subset), 0);
    Scalar dis_sum = 0.0;
    for (Eigen::Index i = 0; i < ctx.subset; ++i) {
        const Vector h = hidden.col(last + i);
        const Scalar d = discriminate(disc, h);
        ctx.probs(i) = d;
        if (settings.binarize_states) {
            ctx.states(i) = static_cast<Scalar>(labels[static_cast<size_t>(i)]);
        } else {
            ctx.states(i) = clip_probability(d, settings.prob_epsilon);
            ctx.pass[static_cast<size_t>(i)] =
                d > settings.prob_epsilon && d < 1.0 - settings.prob_epsilon;
        }
        dis_sum += discriminator_loss(d, labels[static_cast<size_t>(i)], settings.prob_epsilon);
    }

    LossComponents& c = ctx.components;
    c.l_acc = mae(pred, truth);
    c.l_rsf = ctx.regions >= 2 ? mean_pairwise_abs_diff_quadratic(ctx.region_mapes) : 0.0;
    c.l_dis = dis_sum / static_cast<Scalar>(ctx.subset);

    if (settings.include_sdf) {
        std::vector<char> in_union(static_cast<size_t>(network.sensor_count()), 0);
        for (SensorId v : prior.sampled_union()) in_union[static_cast<size_t>(v)] = 1;
        for (SensorId v : sampled) in_union[static_cast<size_t>(v)] = 1;
        Vector d_total = prior.accumulated();
        for (Eigen::Index i = 0; i < ctx.subset; ++i)
            d_total(sampled[static_cast<size_t>(i)]) += ctx.states(i) - 0.5;

        std::vector<int> pos_of(static_cast<size_t>(network.sensor_count()), -1);
        for (SensorId v = 0; v < network.sensor_count(); ++v) {
            if (!in_union[static_cast<size_t>(v)]) continue;
            pos_of[static_cast<size_t>(v)] = static_cast<int>(ctx.union_ids.size());
            ctx.union_ids.push_back(v);
        }
        ctx.union_d = Vector::Zero(static_cast<Eigen::Index>(ctx.union_ids.size()));
        for (size_t u = 0; u < ctx.union_ids.size(); ++u)
            ctx.union_d(static_cast<Eigen::Index>(u)) = d_total(ctx.union_ids[u]);
        ctx.union_pos.resize(static_cast<size_t>(ctx.subset));
        for (Eigen::Index i = 0; i < ctx.subset; ++i)
            ctx.union_pos[static_cast<size_t>(i)] = pos_of[static_cast<size_t>(
                sampled[static_cast<size_t>(i)])];
        c.l_sdf =
            ctx.union_ids.size() >= 2 ? mean_pairwise_abs_diff_quadratic(ctx.union_d) : 0.0;
    }

    c.total = c.l_acc + settings.lambda_rsf * c.l_rsf + settings.lambda_sdf * c.l_sdf;
    return ctx;
}

}  // namespace

BatchLoss batch_loss(const Matrix& pred, const Matrix& truth, const Matrix& hidden,
                     const RoadNetwork& network, const std::vector<SensorId>& sampled,
                     const StateLedger& prior, const Discriminator& disc,
                     const std::vector<int>& labels, const LossSettings& settings) {
    BatchContext ctx = analyze(pred, truth, hidden, network, sampled, prior, disc, labels, settings);
    BatchLoss out;
    out.components = ctx.components;
    out.probs = std::move(ctx.probs);
    out.states = std::move(ctx.states);
    return out;
}

BatchGradients batch_loss_gradients(const Matrix& pred, const Matrix& truth, const Matrix& hidden,
                                    const RoadNetwork& network,
                                    const std::vector<SensorId>& sampled,
                                    const StateLedger& prior, const Discriminator& disc,
                                    const std::vector<int>& labels, const LossSettings& settings) {
    const BatchContext ctx =
        analyze(pred, truth, hidden, network, sampled, prior, disc, labels, settings);

    BatchGradients g;
    const Scalar numel = static_cast<Scalar>(pred.size());
    g.pred = ((pred - truth).array().sign() / numel).matrix();
    g.hidden = Matrix::Zero(hidden.rows(), hidden.cols());

    if (ctx.regions >= 2 && settings.lambda_rsf != 0.0) {
        const Vector mape_grad = mean_pairwise_abs_diff_grad(ctx.region_mapes);
        for (int r = 0; r < ctx.regions; ++r) {
            const auto& members = ctx.positions[static_cast<size_t>(r)];
            const long kept = ctx.region_kept[static_cast<size_t>(r)];
            if (kept == 0) continue;
            const Scalar outer = settings.lambda_rsf * mape_grad(r);
            if (outer == 0.0) continue;
            const Matrix& rp = ctx.region_pred[static_cast<size_t>(r)];
            const Matrix& rt = ctx.region_truth[static_cast<size_t>(r)];
            const Scalar den =
                static_cast<Scalar>(kept) * static_cast<Scalar>(members.size());
            for (Eigen::Index b = 0; b < ctx.windows; ++b) {
                for (Eigen::Index t = 0; t < pred.rows(); ++t) {
                    const Scalar tv = rt(t, b);
                    if (std::abs(tv) < settings.mask_epsilon) continue;
                    const Scalar diff = rp(t, b) - tv;
                    const Scalar s = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
                    const Scalar coef = outer * s / (std::abs(tv) * den);
                    for (int i : members) g.pred(t, b * ctx.subset + i) += coef;
                }
            }
        }
    }

    // Hidden-layer path: dynamic fairness and, optionally, the
    // discriminator loss, both through the final window.
    const Eigen::Index last = (ctx.windows - 1) * ctx.subset;
    Vector sdf_grad;
    const bool sdf_path = settings.include_sdf && !settings.binarize_states &&
                          settings.lambda_sdf != 0.0 && ctx.union_ids.size() >= 2;
    if (sdf_path) sdf_grad = mean_pairwise_abs_diff_grad(ctx.union_d);
    for (Eigen::Index i = 0; i < ctx.subset; ++i) {
        Scalar at_preact = 0.0;
        if (sdf_path && ctx.pass[static_cast<size_t>(i)]) {
            const Scalar d = ctx.probs(i);
            at_preact += settings.lambda_sdf * sdf_grad(ctx.union_pos[static_cast<size_t>(i)]) *
                         d * (1.0 - d);
        }
        if (settings.dis_to_predictor) {
            const Scalar d = ctx.probs(i);
            if (d > settings.prob_epsilon && d < 1.0 - settings.prob_epsilon)
                at_preact += (d - static_cast<Scalar>(labels[static_cast<size_t>(i)])) /
                             static_cast<Scalar>(ctx.subset);
        }
        if (at_preact != 0.0) g.hidden.col(last + i) = at_preact * disc.weights;
    }
    return g;
}

}  // namespace fairtp
