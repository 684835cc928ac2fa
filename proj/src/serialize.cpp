#include "fairtp/serialize.hpp"

#include "fairtp/numeric.hpp"

#include <fstream>
#include <set>
#include <utility>

namespace fairtp {

namespace {

// Strict object reader: every known field is optional, any unknown field is
// an error naming it.
class FieldReader {
public:
    FieldReader(const Json& doc, std::string what) : doc_(doc), what_(std::move(what)) {
        if (!doc_.is_object()) throw config_error(what_ + ": expected a JSON object");
    }

    void read(const char* key, bool& dest) {
        if (const Json* j = raw(key)) {
            if (!j->is_boolean()) throw wrong_type(key, "a boolean");
            dest = j->get<bool>();
        }
    }
    void read(const char* key, int& dest) {
        if (const Json* j = raw(key)) {
            if (!j->is_number_integer()) throw wrong_type(key, "an integer");
            dest = j->get<int>();
        }
    }
    void read(const char* key, std::uint64_t& dest) {
        if (const Json* j = raw(key)) {
            if (!j->is_number_integer() || j->get<long long>() < 0)
                throw wrong_type(key, "a non-negative integer");
            dest = j->get<std::uint64_t>();
        }
    }
    void read(const char* key, Scalar& dest) {
        if (const Json* j = raw(key)) {
            if (!j->is_number()) throw wrong_type(key, "a number");
            dest = j->get<Scalar>();
        }
    }
    void read(const char* key, std::string& dest) {
        if (const Json* j = raw(key)) {
            if (!j->is_string()) throw wrong_type(key, "a string");
            dest = j->get<std::string>();
        }
    }

    const Json* raw(const char* key) {
        seen_.insert(key);
        const auto it = doc_.find(key);
        return it == doc_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& item : doc_.items())
            if (!seen_.count(item.key()))
                throw config_error(what_ + ": unknown field '" + item.key() + "'");
    }

private:
    config_error wrong_type(const char* key, const char* expected) const {
        return config_error(what_ + ": field '" + key + "' must be " + expected);
    }

    const Json& doc_;
    std::string what_;
    std::set<std::string> seen_;
};

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vector_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Json int_vector_json(const IntVector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Matrix matrix_from_json(const Json& doc, Eigen::Index rows, Eigen::Index cols,
                        const std::string& what) {
    if (!doc.is_array() || static_cast<Eigen::Index>(doc.size()) != rows)
        throw data_error(what + ": expected " + std::to_string(rows) + " rows");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Json& row = doc[static_cast<size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw data_error(what + ": expected " + std::to_string(cols) + " columns");
        for (Eigen::Index j = 0; j < cols; ++j) {
            const Json& cell = row[static_cast<size_t>(j)];
            if (!cell.is_number()) throw data_error(what + ": non-numeric entry");
            m(i, j) = cell.get<Scalar>();
        }
    }
    return m;
}

Vector vector_from_json(const Json& doc, Eigen::Index size, const std::string& what) {
    if (!doc.is_array() || static_cast<Eigen::Index>(doc.size()) != size)
        throw data_error(what + ": expected " + std::to_string(size) + " entries");
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        const Json& cell = doc[static_cast<size_t>(i)];
        if (!cell.is_number()) throw data_error(what + ": non-numeric entry");
        v(i) = cell.get<Scalar>();
    }
    return v;
}

}  // namespace

Json to_json(const TrainingConfig& config) {
    Json doc;
    doc["N_sam"] = config.n_sam;
    doc["T_d"] = config.t_d;
    doc["lambda1"] = config.lambda1;
    doc["lambda2"] = config.lambda2;
    doc["epochs"] = config.epochs;
    doc["batch_size"] = config.batch_size;
    doc["learning_rate"] = config.learning_rate;
    doc["disc_learning_rate"] = config.disc_learning_rate;
    doc["seed"] = config.seed;
    doc["mask_epsilon"] = config.mask_epsilon;
    doc["prob_epsilon"] = config.prob_epsilon;
    doc["noS"] = config.no_static;
    doc["noD"] = config.no_dynamic;
    doc["noAS"] = config.no_adaptive;
    doc["binarize_states"] = config.binarize_states;
    doc["region_counts_source"] = config.counts_source == RegionCountsSource::in_progress
                                      ? "in_progress"
                                      : "previous_round";
    doc["lookback"] = config.lookback;
    doc["horizon"] = config.horizon;
    doc["hidden_dim"] = config.hidden_dim;
    doc["grad_clip"] = config.grad_clip;
    doc["dis_to_predictor"] = config.dis_to_predictor;
    return doc;
}

TrainingConfig training_config_from_json(const Json& doc) {
    TrainingConfig config;
    FieldReader reader(doc, "training config");
    reader.read("N_sam", config.n_sam);
    reader.read("T_d", config.t_d);
    reader.read("lambda1", config.lambda1);
    reader.read("lambda2", config.lambda2);
    reader.read("epochs", config.epochs);
    reader.read("batch_size", config.batch_size);
    reader.read("learning_rate", config.learning_rate);
    reader.read("disc_learning_rate", config.disc_learning_rate);
    reader.read("seed", config.seed);
    reader.read("mask_epsilon", config.mask_epsilon);
    reader.read("prob_epsilon", config.prob_epsilon);
    reader.read("noS", config.no_static);
    reader.read("noD", config.no_dynamic);
    reader.read("noAS", config.no_adaptive);
    reader.read("binarize_states", config.binarize_states);
    std::string source =
        config.counts_source == RegionCountsSource::in_progress ? "in_progress" : "previous_round";
    reader.read("region_counts_source", source);
    if (source == "in_progress")
        config.counts_source = RegionCountsSource::in_progress;
    else if (source == "previous_round")
        config.counts_source = RegionCountsSource::previous_round;
    else
        throw config_error(
            "training config: region_counts_source must be in_progress or previous_round");
    reader.read("lookback", config.lookback);
    reader.read("horizon", config.horizon);
    reader.read("hidden_dim", config.hidden_dim);
    reader.read("grad_clip", config.grad_clip);
    reader.read("dis_to_predictor", config.dis_to_predictor);
    reader.finish();
    config.validate();
    return config;
}

Json to_json(const SyntheticSpec& spec) {
    Json regions = Json::array();
    for (const RegionSpec& r : spec.regions) {
        Json region;
        region["size"] = r.size;
        region["offset"] = r.offset;
        region["amplitude"] = r.amplitude;
        region["period"] = r.period;
        region["phase"] = r.phase;
        region["noise_sigma"] = r.noise_sigma;
        region["tier"] = r.tier;
        regions.push_back(std::move(region));
    }
    Json doc;
    doc["regions"] = std::move(regions);
    doc["steps"] = spec.steps;
    doc["gain_low"] = spec.gain_low;
    doc["gain_high"] = spec.gain_high;
    doc["seed"] = spec.seed;
    return doc;
}

SyntheticSpec synthetic_spec_from_json(const Json& doc) {
    SyntheticSpec spec;
    FieldReader reader(doc, "synthetic spec");
    if (const Json* regions = reader.raw("regions")) {
        if (!regions->is_array() || regions->empty())
            throw config_error("synthetic spec: 'regions' must be a non-empty array");
        spec.regions.clear();
        for (size_t k = 0; k < regions->size(); ++k) {
            RegionSpec r;
            FieldReader region((*regions)[k], "regions[" + std::to_string(k) + "]");
            region.read("size", r.size);
            region.read("offset", r.offset);
            region.read("amplitude", r.amplitude);
            region.read("period", r.period);
            region.read("phase", r.phase);
            region.read("noise_sigma", r.noise_sigma);
            region.read("tier", r.tier);
            region.finish();
            spec.regions.push_back(r);
        }
    }
    reader.read("steps", spec.steps);
    reader.read("gain_low", spec.gain_low);
    reader.read("gain_high", spec.gain_high);
    reader.read("seed", spec.seed);
    reader.finish();
    return spec;
}

Json to_json(const AccuracySummary& summary) {
    Json doc;
    doc["mae"] = summary.mae;
    doc["rmse"] = summary.rmse;
    doc["mape"] = summary.mape;
    doc["masked"] = summary.masked_count;
    return doc;
}

Json to_json(const LossComponents& components) {
    Json doc;
    doc["l_acc"] = components.l_acc;
    doc["l_rsf"] = components.l_rsf;
    doc["l_sdf"] = components.l_sdf;
    doc["l_dis"] = components.l_dis;
    doc["total"] = components.total;
    return doc;
}

Json to_json(const FairnessReport& report) {
    Json per_region;
    for (const auto& [region, summary] : report.per_region)
        per_region[std::to_string(region)] = to_json(summary);
    Json per_sensor;
    for (const auto& [sensor, summary] : report.per_sensor)
        per_sensor[std::to_string(sensor)] = to_json(summary);
    Json doc;
    doc["per_region"] = std::move(per_region);
    doc["per_sensor"] = std::move(per_sensor);
    doc["rsf_loss"] = report.rsf_loss;
    doc["sdf_loss"] = report.sdf_loss;
    doc["loss"] = to_json(report.loss_components);
    return doc;
}

Json run_report(const RunRecord& record, const FairnessReport& test) {
    Json epochs = Json::array();
    for (const EpochRecord& e : record.epochs) {
        Json epoch;
        epoch["epoch"] = e.epoch;
        epoch["threshold"] = e.threshold;
        epoch["train_loss"] = to_json(e.train_loss);
        epoch["validation"] = to_json(e.validation);
        epochs.push_back(std::move(epoch));
    }
    Json doc;
    doc["epochs"] = std::move(epochs);
    doc["final"] = to_json(test);
    return doc;
}

Json sampling_traces(const RunRecord& record) {
    Json rounds = Json::array();
    for (const SamplingTrace& trace : record.rounds) {
        Json round;
        round["round"] = trace.round_index;
        round["batch"] = trace.batch_index;
        round["region_counts"] = int_vector_json(trace.region_counts);
        round["sampled"] = trace.sampled;
        rounds.push_back(std::move(round));
    }
    Json doc;
    doc["rounds"] = std::move(rounds);
    doc["sdf_batches"] = record.sdf_batches;
    return doc;
}

Json to_json(const ThresholdSchedule& schedule) { return Json(schedule.per_epoch()); }

ThresholdSchedule schedule_from_json(const Json& doc) {
    if (!doc.is_array() || doc.empty())
        throw config_error("schedule: expected a non-empty array of numbers");
    std::vector<Scalar> entries;
    entries.reserve(doc.size());
    for (const Json& cell : doc) {
        if (!cell.is_number()) throw config_error("schedule: expected a number");
        entries.push_back(cell.get<Scalar>());
    }
    return ThresholdSchedule(std::move(entries));
}

Json checkpoint_to_json(const ReferencePredictor& model, const Discriminator& disc,
                        const std::vector<SensorId>& sampled, const Normalization& norm) {
    Json doc;
    doc["format_version"] = 1;
    doc["lookback"] = model.lookback();
    doc["horizon"] = model.horizon();
    doc["hidden_dim"] = model.hidden_dim();
    Json predictor;
    predictor["w_in"] = matrix_json(model.w_in);
    predictor["b_in"] = vector_json(model.b_in);
    predictor["w_out"] = matrix_json(model.w_out);
    predictor["b_out"] = vector_json(model.b_out);
    doc["predictor"] = std::move(predictor);
    Json discriminator;
    discriminator["weights"] = vector_json(disc.weights);
    discriminator["bias"] = disc.bias;
    discriminator["learning_rate"] = disc.learning_rate;
    doc["discriminator"] = std::move(discriminator);
    doc["sampled"] = sampled;
    Json normalization;
    normalization["mean"] = norm.mean;
    normalization["std"] = norm.std;
    doc["normalization"] = std::move(normalization);
    return doc;
}

Checkpoint checkpoint_from_json(const Json& doc) {
    try {
        FieldReader reader(doc, "checkpoint");
        int version = 0, lookback = 0, horizon = 0, hidden = 0;
        reader.read("format_version", version);
        if (version != 1)
            throw data_error("checkpoint: unsupported format_version " + std::to_string(version));
        reader.read("lookback", lookback);
        reader.read("horizon", horizon);
        reader.read("hidden_dim", hidden);
        if (lookback < 1 || horizon < 1 || hidden < 1)
            throw data_error("checkpoint: missing model dimensions");

        ReferencePredictor model(lookback, horizon, hidden);
        const Json* predictor = reader.raw("predictor");
        if (!predictor) throw data_error("checkpoint: missing 'predictor'");
        {
            FieldReader p(*predictor, "checkpoint predictor");
            if (const Json* j = p.raw("w_in")) model.w_in = matrix_from_json(*j, hidden, lookback, "w_in");
            else throw data_error("checkpoint: missing 'w_in'");
            if (const Json* j = p.raw("b_in")) model.b_in = vector_from_json(*j, hidden, "b_in");
            else throw data_error("checkpoint: missing 'b_in'");
            if (const Json* j = p.raw("w_out")) model.w_out = matrix_from_json(*j, horizon, hidden, "w_out");
            else throw data_error("checkpoint: missing 'w_out'");
            if (const Json* j = p.raw("b_out")) model.b_out = vector_from_json(*j, horizon, "b_out");
            else throw data_error("checkpoint: missing 'b_out'");
            p.finish();
        }

        Discriminator disc = Discriminator::zeros(hidden, 0.1);
        const Json* discriminator = reader.raw("discriminator");
        if (!discriminator) throw data_error("checkpoint: missing 'discriminator'");
        {
            FieldReader d(*discriminator, "checkpoint discriminator");
            if (const Json* j = d.raw("weights")) disc.weights = vector_from_json(*j, hidden, "weights");
            else throw data_error("checkpoint: missing 'weights'");
            d.read("bias", disc.bias);
            d.read("learning_rate", disc.learning_rate);
            d.finish();
        }

        std::vector<SensorId> sampled;
        if (const Json* j = reader.raw("sampled")) {
            if (!j->is_array()) throw data_error("checkpoint: 'sampled' must be an array");
            for (const Json& cell : *j) {
                if (!cell.is_number_integer())
                    throw data_error("checkpoint: 'sampled' must hold integers");
                sampled.push_back(cell.get<SensorId>());
            }
        } else {
            throw data_error("checkpoint: missing 'sampled'");
        }

        Normalization norm;
        if (const Json* j = reader.raw("normalization")) {
            FieldReader n(*j, "checkpoint normalization");
            n.read("mean", norm.mean);
            n.read("std", norm.std);
            n.finish();
        }
        reader.finish();
        return Checkpoint{std::move(model), std::move(disc), std::move(sampled), norm};
    } catch (const config_error& e) {
        throw data_error(e.what());
    }
}

Json sweep_table(const std::vector<SweepRow>& rows) {
    Json out = Json::array();
    for (const SweepRow& row : rows) {
        Json entry;
        entry["value"] = row.value;
        entry["seed"] = row.seed;
        entry["test"] = to_json(row.test);
        out.push_back(std::move(entry));
    }
    Json doc;
    doc["rows"] = std::move(out);
    return doc;
}

std::string regions_csv(const FairnessReport& report) {
    std::string out = "region,mae,rmse,mape,masked\n";
    for (const auto& [region, summary] : report.per_region) {
        out += std::to_string(region);
        out.push_back(',');
        out += format_number(summary.mae);
        out.push_back(',');
        out += format_number(summary.rmse);
        out.push_back(',');
        out += format_number(summary.mape);
        out.push_back(',');
        out += std::to_string(summary.masked_count);
        out.push_back('\n');
    }
    return out;
}

std::string curves_csv(const std::vector<EpochRecord>& epochs) {
    std::string out =
        "epoch,threshold,train_l_acc,train_l_rsf,train_l_sdf,train_l_dis,train_total,"
        "val_mae,val_rsf,val_sdf\n";
    for (const EpochRecord& e : epochs) {
        out += std::to_string(e.epoch);
        out.push_back(',');
        out += format_number(e.threshold);
        out.push_back(',');
        out += format_number(e.train_loss.l_acc);
        out.push_back(',');
        out += format_number(e.train_loss.l_rsf);
        out.push_back(',');
        out += format_number(e.train_loss.l_sdf);
        out.push_back(',');
        out += format_number(e.train_loss.l_dis);
        out.push_back(',');
        out += format_number(e.train_loss.total);
        out.push_back(',');
        out += format_number(e.validation.loss_components.l_acc);
        out.push_back(',');
        out += format_number(e.validation.rsf_loss);
        out.push_back(',');
        out += format_number(e.validation.sdf_loss);
        out.push_back('\n');
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "value,seed,mae,rsf_loss,sdf_loss,total\n";
    for (const SweepRow& row : rows) {
        out += std::to_string(row.value);
        out.push_back(',');
        out += std::to_string(row.seed);
        out.push_back(',');
        out += format_number(row.test.loss_components.l_acc);
        out.push_back(',');
        out += format_number(row.test.rsf_loss);
        out.push_back(',');
        out += format_number(row.test.sdf_loss);
        out.push_back(',');
        out += format_number(row.test.loss_components.total);
        out.push_back('\n');
    }
    return out;
}

void require_known_fields(const Json& doc, std::initializer_list<const char*> known,
                          const std::string& what) {
    if (!doc.is_object()) throw config_error(what + ": expected a JSON object");
    for (const auto& item : doc.items()) {
        bool found = false;
        for (const char* key : known)
            if (item.key() == key) found = true;
        if (!found) throw config_error(what + ": unknown field '" + item.key() + "'");
    }
}

void write_json(const std::string& path, const Json& doc) {
    std::ofstream file(path);
    if (!file) throw data_error(path + ": cannot open for writing");
    file << doc.dump(2) << '\n';
    if (!file) throw data_error(path + ": write failed");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream file(path);
    if (!file) throw data_error(path + ": cannot open for writing");
    file << text;
    if (!file) throw data_error(path + ": write failed");
}

Json read_json(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw data_error(path + ": cannot open");
    try {
        return Json::parse(file);
    } catch (const nlohmann::json::parse_error& e) {
        throw data_error(path + ": " + e.what());
    }
}

}  // namespace fairtp
