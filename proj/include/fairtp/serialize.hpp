#pragma once

#include "fairtp/dataio.hpp"
#include "fairtp/harness.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fairtp {

/// Insertion-ordered documents keep every emitted file's field order stable,
/// so identical runs serialize byte-identically.
using Json = nlohmann::ordered_json;

Json to_json(const TrainingConfig& config);
/// Strict: unknown fields raise config_error naming the field; missing
/// fields keep their defaults.
TrainingConfig training_config_from_json(const Json& doc);

Json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const Json& doc);

Json to_json(const AccuracySummary& summary);
Json to_json(const LossComponents& components);
Json to_json(const FairnessReport& report);

/// Per-epoch records plus the final held-out report.
Json run_report(const RunRecord& record, const FairnessReport& test);
Json sampling_traces(const RunRecord& record);

Json to_json(const ThresholdSchedule& schedule);
ThresholdSchedule schedule_from_json(const Json& doc);

struct Checkpoint {
    ReferencePredictor predictor;
    Discriminator discriminator;
    std::vector<SensorId> sampled;
    Normalization normalization;
};

Json checkpoint_to_json(const ReferencePredictor& model, const Discriminator& disc,
                        const std::vector<SensorId>& sampled, const Normalization& norm);
Checkpoint checkpoint_from_json(const Json& doc);

Json sweep_table(const std::vector<SweepRow>& rows);

/// Flat CSV forms for external plotting.
std::string regions_csv(const FairnessReport& report);
std::string curves_csv(const std::vector<EpochRecord>& epochs);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Raises config_error naming the first field of `doc` not listed in `known`.
void require_known_fields(const Json& doc, std::initializer_list<const char*> known,
                          const std::string& what);

void write_json(const std::string& path, const Json& doc);
void write_text(const std::string& path, const std::string& text);
Json read_json(const std::string& path);

}  // namespace fairtp
