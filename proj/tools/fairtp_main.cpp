#include "fairtp/numeric.hpp"
#include "fairtp/serialize.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace fairtp;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool force = false;
};

struct RunInputs {
    Json data_section;  // echoed into the manifest as given
    TrainingConfig training;
    std::optional<ThresholdSchedule> schedule;
    std::string checkpoint_path;
    Dataset dataset;
};

Json load_config_document(const std::string& path) {
    Json doc = read_json(path);
    // A manifest from a previous run doubles as a config.
    if (doc.is_object() && doc.contains("command") && doc.contains("config"))
        return doc["config"];
    return doc;
}

Dataset load_dataset(const Json& data, const TrainingConfig& training) {
    const bool synthetic = data.contains("synthetic");
    const bool files = data.contains("series");
    if (synthetic == files)
        throw config_error("run config data: give either 'synthetic' or 'series'+'partition'");
    if (synthetic) {
        const SyntheticSpec spec = synthetic_spec_from_json(data["synthetic"]);
        return generate(spec, training.lookback, training.horizon);
    }
    if (!data.contains("partition"))
        throw config_error("run config data: 'series' requires 'partition'");
    if (!data["series"].is_string() || !data["partition"].is_string())
        throw config_error("run config data: 'series' and 'partition' must be path strings");
    return ingest_csv(data["series"].get<std::string>(), data["partition"].get<std::string>(),
                      training.lookback, training.horizon);
}

RunInputs load_inputs(const CommonArgs& args) {
    const Json doc = load_config_document(args.config_path);
    require_known_fields(doc, {"data", "training", "schedule", "checkpoint"}, "run config");

    if (!doc.contains("data")) throw config_error("run config: missing 'data'");
    Json data_section = doc["data"];
    require_known_fields(data_section, {"synthetic", "series", "partition"}, "run config data");

    TrainingConfig training;
    if (doc.contains("training")) training = training_config_from_json(doc["training"]);
    if (args.seed_given) training.seed = args.seed;

    std::optional<ThresholdSchedule> schedule;
    if (doc.contains("schedule")) {
        const Json& entry = doc["schedule"];
        if (entry.is_string())
            schedule = schedule_from_json(read_json(entry.get<std::string>()));
        else
            schedule = schedule_from_json(entry);
    }
    std::string checkpoint_path;
    if (doc.contains("checkpoint")) {
        if (!doc["checkpoint"].is_string())
            throw config_error("run config: 'checkpoint' must be a path string");
        checkpoint_path = doc["checkpoint"].get<std::string>();
    }

    Dataset dataset = load_dataset(data_section, training);
    return RunInputs{std::move(data_section), training, std::move(schedule),
                     std::move(checkpoint_path), std::move(dataset)};
}

void prepare_out_dir(const CommonArgs& args) {
    const fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw data_error(args.out_dir + ": cannot create directory");
    if (fs::exists(dir / "manifest.json") && !args.force)
        throw config_error(args.out_dir + ": already holds a run record (use --force)");
}

Json versions() {
    Json doc;
    doc["fairtp"] = kVersion;
    doc["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                   "." + std::to_string(EIGEN_MINOR_VERSION);
    doc["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                           std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    doc["cli11"] = CLI11_VERSION;
    return doc;
}

/// The manifest embeds the fully expanded config, so passing it back as
/// --config reproduces the run.
void write_manifest(const std::string& command, const CommonArgs& args, const RunInputs& inputs,
                    bool embed_schedule, double duration_seconds, const Json& extra) {
    Json config;
    config["data"] = inputs.data_section;
    config["training"] = to_json(inputs.training);
    if (embed_schedule && inputs.schedule) config["schedule"] = to_json(*inputs.schedule);
    if (!inputs.checkpoint_path.empty()) config["checkpoint"] = inputs.checkpoint_path;

    Json doc;
    doc["command"] = command;
    for (const auto& item : extra.items()) doc[item.key()] = item.value();
    doc["config"] = std::move(config);
    doc["seed"] = inputs.training.seed;
    doc["versions"] = versions();
    doc["duration_seconds"] = duration_seconds;
    write_json((fs::path(args.out_dir) / "manifest.json").string(), doc);
}

std::string out_path(const CommonArgs& args, const char* name) {
    return (fs::path(args.out_dir) / name).string();
}

int run_generate(const CommonArgs& args) {
    const auto started = std::chrono::steady_clock::now();
    RunInputs inputs = load_inputs(args);
    if (!inputs.data_section.contains("synthetic"))
        throw config_error("generate needs a 'synthetic' data section");
    prepare_out_dir(args);
    write_series_csv(out_path(args, "series.csv"), inputs.dataset.series.values());
    write_partition_csv(out_path(args, "partition.csv"), inputs.dataset.network);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest("generate", args, inputs, false, secs, Json::object());
    std::cout << "wrote " << inputs.dataset.series.step_count() << " steps for "
              << inputs.dataset.network.sensor_count() << " sensors to " << args.out_dir << "\n";
    return 0;
}

int run_reference(const CommonArgs& args) {
    const auto started = std::chrono::steady_clock::now();
    RunInputs inputs = load_inputs(args);
    prepare_out_dir(args);
    const SplitSeries splits = split(inputs.dataset.series, 0.6, 0.2);
    const Normalization norm = fit_normalization(splits.train);
    const ReferenceRunResult result =
        reference_run(splits.train, inputs.dataset.network, norm, inputs.training);
    write_json(out_path(args, "schedule.json"), to_json(result.schedule));
    Json curve;
    curve["train_mae"] = result.train_mae;
    curve["train_mape"] = result.schedule.per_epoch();
    write_json(out_path(args, "reference.json"), curve);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest("reference-run", args, inputs, false, secs, Json::object());
    std::cout << "final training mape " << format_number(result.schedule.per_epoch().back())
              << " over " << result.schedule.size() << " epochs\n";
    return 0;
}

int run_train(const CommonArgs& args) {
    const auto started = std::chrono::steady_clock::now();
    RunInputs inputs = load_inputs(args);
    prepare_out_dir(args);
    const SplitSeries splits = split(inputs.dataset.series, 0.6, 0.2);
    const Normalization norm = fit_normalization(splits.train);
    const RoadNetwork& network = inputs.dataset.network;

    ThresholdSchedule schedule =
        inputs.schedule ? *inputs.schedule
                        : reference_run(splits.train, network, norm, inputs.training).schedule;
    ReferencePredictor model =
        ReferencePredictor::seeded(inputs.training.lookback, inputs.training.horizon,
                                   inputs.training.hidden_dim, predictor_seed(inputs.training.seed));
    const RunRecord record = train_fairtp(splits.train, splits.validation, network, schedule, norm,
                                          model, inputs.training);
    const FairnessReport test =
        evaluate(model, record.discriminator, record.sampled, splits.test, network, norm,
                 schedule.per_epoch().back(), inputs.training);

    write_json(out_path(args, "report.json"), run_report(record, test));
    write_json(out_path(args, "samples_trace.json"), sampling_traces(record));
    write_json(out_path(args, "schedule.json"), to_json(schedule));
    write_json(out_path(args, "checkpoint.json"),
               checkpoint_to_json(model, record.discriminator, record.sampled, norm));
    write_text(out_path(args, "regions.csv"), regions_csv(test));
    write_text(out_path(args, "curves.csv"), curves_csv(record.epochs));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest("train", args, inputs, true, secs, Json::object());
    std::cout << "test mae " << format_number(test.loss_components.l_acc) << ", rsf "
              << format_number(test.rsf_loss) << ", sdf " << format_number(test.sdf_loss) << "\n";
    return 0;
}

int run_evaluate(const CommonArgs& args) {
    const auto started = std::chrono::steady_clock::now();
    RunInputs inputs = load_inputs(args);
    if (inputs.checkpoint_path.empty())
        throw config_error("evaluate needs a 'checkpoint' path in the config");
    if (!inputs.schedule)
        throw config_error("evaluate needs a 'schedule' in the config");
    prepare_out_dir(args);
    const Checkpoint ckpt = checkpoint_from_json(read_json(inputs.checkpoint_path));
    if (ckpt.predictor.lookback() != inputs.training.lookback ||
        ckpt.predictor.horizon() != inputs.training.horizon ||
        ckpt.predictor.hidden_dim() != inputs.training.hidden_dim)
        throw config_error("checkpoint dimensions do not match the training config");

    const SplitSeries splits = split(inputs.dataset.series, 0.6, 0.2);
    const FairnessReport report =
        evaluate(ckpt.predictor, ckpt.discriminator, ckpt.sampled, splits.test,
                 inputs.dataset.network, ckpt.normalization, inputs.schedule->per_epoch().back(),
                 inputs.training);
    write_json(out_path(args, "report.json"), to_json(report));
    write_text(out_path(args, "regions.csv"), regions_csv(report));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest("evaluate", args, inputs, true, secs, Json::object());
    std::cout << "test mae " << format_number(report.loss_components.l_acc) << ", rsf "
              << format_number(report.rsf_loss) << ", sdf " << format_number(report.sdf_loss)
              << "\n";
    return 0;
}

int run_sweep(const CommonArgs& args, const std::string& param_name,
              const std::vector<int>& values) {
    const auto started = std::chrono::steady_clock::now();
    SweepParam param;
    if (param_name == "T_d")
        param = SweepParam::t_d;
    else if (param_name == "N_sam")
        param = SweepParam::n_sam;
    else
        throw config_error("--param must be T_d or N_sam");
    if (values.empty()) throw config_error("--values must list at least one value");

    RunInputs inputs = load_inputs(args);
    prepare_out_dir(args);
    const SplitSeries splits = split(inputs.dataset.series, 0.6, 0.2);
    const std::vector<SweepRow> rows =
        sweep(param, values, splits, inputs.dataset.network, inputs.training);
    write_json(out_path(args, "sweep.json"), sweep_table(rows));
    write_text(out_path(args, "sweep.csv"), sweep_csv(rows));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Json extra;
    extra["param"] = param_name;
    extra["values"] = values;
    write_manifest("sweep", args, inputs, false, secs, extra);
    std::cout << "swept " << param_name << " over " << rows.size() << " values\n";
    return 0;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Run config JSON (or a previous manifest)")
        ->required();
    cmd->add_option("--out", args.out_dir, "Output directory")->required();
    cmd->add_option("--seed", args.seed, "Override the training seed");
    cmd->add_flag("--force", args.force, "Overwrite an existing run record");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairtp: fairness-aware traffic prediction workbench"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string param_name;
    std::vector<int> values;

    CLI::App* generate_cmd = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
    add_common(generate_cmd, args);
    CLI::App* reference_cmd =
        app.add_subcommand("reference-run", "Accuracy-only run producing the threshold schedule");
    add_common(reference_cmd, args);
    CLI::App* train_cmd = app.add_subcommand("train", "Full fairness-aware training run");
    add_common(train_cmd, args);
    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Score a checkpoint on the test split");
    add_common(evaluate_cmd, args);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Repeat training across parameter values");
    add_common(sweep_cmd, args);
    sweep_cmd->add_option("--param", param_name, "Swept parameter: T_d or N_sam")->required();
    sweep_cmd->add_option("--values", values, "Values to sweep")->required()->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (app.got_subcommand(generate_cmd)) {
            args.seed_given = generate_cmd->count("--seed") > 0;
            return run_generate(args);
        }
        if (app.got_subcommand(reference_cmd)) {
            args.seed_given = reference_cmd->count("--seed") > 0;
            return run_reference(args);
        }
        if (app.got_subcommand(train_cmd)) {
            args.seed_given = train_cmd->count("--seed") > 0;
            return run_train(args);
        }
        if (app.got_subcommand(evaluate_cmd)) {
            args.seed_given = evaluate_cmd->count("--seed") > 0;
            return run_evaluate(args);
        }
        args.seed_given = sweep_cmd->count("--seed") > 0;
        return run_sweep(args, param_name, values);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const invalid_input& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const divergence_error& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 4;
    }
}
