#include "vtn/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "vtn/csv_io.hpp"
#include "vtn/errors.hpp"
#include "vtn/metrics.hpp"
#include "vtn/model_io.hpp"
#include "vtn/result_record.hpp"
#include "vtn/selection.hpp"
#include "vtn/synthetic.hpp"

namespace vtn {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Options {
    std::string order{"2"};
    std::string memory{"3"};
    Index rank{1};
    std::size_t sweeps{0};
    std::string init{"svd"};
    std::uint64_t seed{0};
    std::string train, val, test, out;
    Index m_delta{1};
    double accept_threshold{1e-4};
    std::optional<Index> transient_skip;
    Index samples{4500};
    std::optional<double> snr;
    std::string model, input, pred, ref;
    unsigned threads{1};
};

IntRange parse_range(const std::string& text, const char* flag) {
    try {
        const auto colon = text.find(':');
        if (colon == std::string::npos) {
            const Index v = std::stoll(text);
            return {v, v};
        }
        return {std::stoll(text.substr(0, colon)), std::stoll(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw StructuralError(std::string(flag) + ": expected N or LO:HI, got '" + text + "'");
    }
}

Index parse_single(const std::string& text, const char* flag) {
    const IntRange r = parse_range(text, flag);
    if (r.lo != r.hi) throw StructuralError(std::string(flag) + ": expected a single value");
    return r.lo;
}

SelectionConfig selection_config(const Options& o) {
    SelectionConfig cfg;
    cfg.d_range = parse_range(o.order, "--order");
    cfg.m_range = parse_range(o.memory, "--memory");
    cfg.rank = o.rank;
    cfg.sweeps = o.sweeps;
    cfg.init = o.init == "random" ? InitKind::random : InitKind::deterministic;
    cfg.seed = o.seed;
    cfg.accept_threshold = o.accept_threshold;
    cfg.m_delta = o.m_delta;
    cfg.transient_skip = o.transient_skip;
    cfg.threads = o.threads;
    cfg.validate();
    return cfg;
}

nlohmann::json config_json(const std::string& command, const Options& o) {
    return {{"command", command},       {"order", o.order},
            {"memory", o.memory},       {"rank", o.rank},
            {"sweeps", o.sweeps},       {"init", o.init},
            {"seed", o.seed},           {"train", o.train},
            {"val", o.val},             {"test", o.test},
            {"m_delta", o.m_delta},     {"accept_threshold", o.accept_threshold},
            {"transient_skip", o.transient_skip ? nlohmann::json(*o.transient_skip) : nlohmann::json(nullptr)}};
}

std::optional<TimeSeriesData> maybe_load(const std::string& path, DataRole role) {
    if (path.empty()) return std::nullopt;
    return load_csv(path, role);
}

fs::path out_dir(const Options& o) {
    if (o.out.empty()) throw StructuralError("--out is required");
    fs::create_directories(o.out);
    return fs::path(o.out);
}

// Metrics of a finished model; VAF is reported on the test set when given, otherwise on training data.
ResultRecord evaluate(const std::string& command, const Options& o, const VolterraModel& model, Index skip,
                      const TimeSeriesData& train, const std::optional<TimeSeriesData>& val,
                      const std::optional<TimeSeriesData>& test, double wall_ms) {
    ResultRecord rec;
    rec.command = command;
    rec.order = model.order();
    rec.memory = model.memory();
    rec.rank = model.max_rank();
    rec.sweeps = static_cast<std::int64_t>(o.sweeps);
    rec.rmse_train = rmse(train.outputs, predict(model, train), skip);
    if (val) rec.rmse_val = rmse(val->outputs, predict(model, *val), skip);
    const TimeSeriesData& vaf_set = test ? *test : train;
    if (test) rec.rmse_test = rmse(test->outputs, predict(model, *test), skip);
    rec.vaf = vaf(vaf_set.outputs, predict(model, vaf_set), skip);
    rec.weight_norm = tt_norm(model.tt());
    rec.wall_time_ms = wall_ms;
    rec.seed = o.seed;
    rec.config_hash = config_hash(config_json(command, o));
    return rec;
}

void write_trace(const fs::path& path, const SelectionTrace& trace) {
    CsvTable t;
    t.columns = {"D", "M", "sweeps", "rmse_train", "rmse_val", "vaf_residual", "weight_norm", "wall_time_ms"};
    t.values.resize(static_cast<Index>(trace.records.size()), 8);
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
        const TraceRecord& r = trace.records[k];
        t.values.row(static_cast<Index>(k)) << static_cast<double>(r.order), static_cast<double>(r.memory),
            static_cast<double>(r.sweeps_used), r.rmse_train, r.rmse_val, r.vaf_residual, r.weight_norm,
            r.wall_time_ms;
    }
    write_csv_table(path.string(), t);
}

void print_record(const ResultRecord& rec) {
    std::cout << "D=" << rec.order << " M=" << rec.memory << " R=" << rec.rank << " sweeps=" << rec.sweeps;
    if (rec.rmse_train) std::cout << " rmse_train=" << *rec.rmse_train;
    if (rec.rmse_val) std::cout << " rmse_val=" << *rec.rmse_val;
    if (rec.rmse_test) std::cout << " rmse_test=" << *rec.rmse_test;
    std::cout << '\n';
}

int run_generate(const Options& o) {
    const fs::path dir = out_dir(o);
    const Index order = parse_single(o.order, "--order");
    const Index memory = parse_single(o.memory, "--memory");
    const SyntheticDataset ds = generate_synthetic(order, memory, o.seed, o.samples, o.snr);
    save_csv((dir / "train.csv").string(), ds.train);
    save_csv((dir / "val.csv").string(), ds.val);
    save_csv((dir / "test.csv").string(), ds.test);
    nlohmann::json sys = {{"D", order}, {"M", memory}, {"seed", o.seed}, {"samples", o.samples},
                          {"snr_db", o.snr ? nlohmann::json(*o.snr) : nlohmann::json(nullptr)}};
    std::vector<std::vector<double>> rows;
    for (Index j = 0; j < ds.system.a.rows(); ++j) {
        rows.emplace_back();
        for (Index c = 0; c < ds.system.a.cols(); ++c) rows.back().push_back(ds.system.a(j, c));
    }
    sys["A"] = rows;
    write_json((dir / "system.json").string(), sys);
    std::cout << "wrote " << ds.train.samples() << "/" << ds.val.samples() << "/" << ds.test.samples()
              << " samples to " << dir.string() << '\n';
    return 0;
}

int run_train(const Options& o) {
    const auto start = Clock::now();
    const TimeSeriesData train = load_csv(o.train, DataRole::train);
    const auto val = maybe_load(o.val, DataRole::validation);
    const auto test = maybe_load(o.test, DataRole::test);
    const fs::path dir = out_dir(o);
    SelectionConfig cfg = selection_config(o);
    const Index order = parse_single(o.order, "--order");
    const Index memory = parse_single(o.memory, "--memory");

    VolterraModel init = cfg.init == InitKind::deterministic
                             ? deterministic_init(train, memory, cfg.rank, std::min<Index>(order, 2))
                             : random_init(memory, cfg.rank, order, cfg.seed, train.input_channels(),
                                           train.output_channels());
    const GrowResult grown = grow_to(init, train, val ? &*val : nullptr, order, cfg);
    const Index skip = o.transient_skip.value_or(memory - 1);
    const double wall = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    const ResultRecord rec = evaluate("train", o, grown.model, skip, train, val, test, wall);
    save_model((dir / "model.vtn").string(), grown.model);
    write_json((dir / "result.json").string(), to_json(rec));
    print_record(rec);
    return 0;
}

int run_selection(const std::string& command, const Options& o) {
    const auto start = Clock::now();
    const TimeSeriesData train = load_csv(o.train, DataRole::train);
    if (o.val.empty()) throw StructuralError("--val is required for " + command);
    const TimeSeriesData val = load_csv(o.val, DataRole::validation);
    const auto test = maybe_load(o.test, DataRole::test);
    const fs::path dir = out_dir(o);
    const SelectionConfig cfg = selection_config(o);

    const SelectionTrace trace = command == "grid" ? grid_search(train, val, cfg) : auto_select(train, val, cfg);
    const Index skip = o.transient_skip.value_or(cfg.m_range.hi - 1);
    const double wall = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    const ResultRecord rec = evaluate(command, o, *trace.chosen_model, skip, train, val, test, wall);
    write_trace(dir / "trace.csv", trace);
    save_model((dir / "model.vtn").string(), *trace.chosen_model);
    write_json((dir / "chosen.json").string(), to_json(rec));
    print_record(rec);
    return 0;
}

Eigen::MatrixXd load_inputs(const std::string& path) {
    const CsvTable t = read_csv_table(path);
    Index p = 0;
    while (p < static_cast<Index>(t.columns.size()) && t.columns[p] == "u" + std::to_string(p + 1)) ++p;
    if (p < 1) throw FormatError(path + ": expected u1..uP columns first");
    return t.values.leftCols(p);
}

int run_predict(const Options& o) {
    if (o.model.empty() || o.input.empty() || o.out.empty()) {
        throw StructuralError("predict needs --model, --input and --out");
    }
    const VolterraModel model = load_model(o.model);
    save_matrix_csv(o.out, predict(model, load_inputs(o.input)), "y");
    return 0;
}

int run_eval(const Options& o) {
    if (o.pred.empty() || o.ref.empty()) throw StructuralError("eval needs --pred and --ref");
    const Eigen::MatrixXd y_hat = load_outputs_csv(o.pred);
    const Eigen::MatrixXd y = load_outputs_csv(o.ref);
    const Index skip = o.transient_skip.value_or(0);
    const nlohmann::json j = {{"rmse", rmse(y, y_hat, skip)}, {"vaf", vaf(y, y_hat, skip)}, {"transient_skip", skip}};
    if (!o.out.empty()) write_json(o.out, j);
    std::cout << j.dump() << '\n';
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Volterra tensor-network identification"};
    app.require_subcommand(1);
    Options o;

    auto add_structure = [&](CLI::App* sub, bool ranges) {
        const char* hint = ranges ? " (N or LO:HI)" : "";
        sub->add_option("--order", o.order, std::string("model order D") + hint);
        sub->add_option("--memory", o.memory, std::string("memory length M") + hint);
    };
    auto add_training = [&](CLI::App* sub) {
        sub->add_option("--rank", o.rank, "TT rank R")->check(CLI::PositiveNumber);
        sub->add_option("--sweeps", o.sweeps, "core updates between increases");
        sub->add_option("--init", o.init, "initialization")->check(CLI::IsMember({"svd", "random"}));
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--train", o.train, "training CSV")->required()->check(CLI::ExistingFile);
        sub->add_option("--val", o.val, "validation CSV")->check(CLI::ExistingFile);
        sub->add_option("--test", o.test, "test CSV")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory")->required();
        sub->add_option("--transient-skip", o.transient_skip, "samples excluded from metrics");
    };

    CLI::App* gen = app.add_subcommand("generate", "write a synthetic dataset");
    add_structure(gen, false);
    gen->add_option("--seed", o.seed, "random seed");
    gen->add_option("--samples", o.samples, "total samples")->check(CLI::PositiveNumber);
    gen->add_option("--snr", o.snr, "output SNR in dB (default noiseless)");
    gen->add_option("--out", o.out, "output directory")->required();

    CLI::App* train = app.add_subcommand("train", "train a fixed structure");
    add_structure(train, false);
    add_training(train);

    CLI::App* grid = app.add_subcommand("grid", "grid search over D and M");
    add_structure(grid, true);
    add_training(grid);
    grid->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);

    CLI::App* autosel = app.add_subcommand("auto", "automatic D/M selection");
    add_structure(autosel, true);
    add_training(autosel);
    autosel->add_option("--m-delta", o.m_delta, "memory increase step")->check(CLI::PositiveNumber);
    autosel->add_option("--accept-threshold", o.accept_threshold, "residual VAF floor");

    CLI::App* pred = app.add_subcommand("predict", "predict with a saved model");
    pred->add_option("--model", o.model, "model file")->required()->check(CLI::ExistingFile);
    pred->add_option("--input", o.input, "input CSV (u1..uP first)")->required()->check(CLI::ExistingFile);
    pred->add_option("--out", o.out, "prediction CSV")->required();

    CLI::App* eval = app.add_subcommand("eval", "compare predictions to a reference");
    eval->add_option("--pred", o.pred, "prediction CSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--ref", o.ref, "reference CSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--transient-skip", o.transient_skip, "samples excluded from metrics");
    eval->add_option("--out", o.out, "metrics JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*gen) return run_generate(o);
        if (*train) return run_train(o);
        if (*grid) return run_selection("grid", o);
        if (*autosel) return run_selection("auto", o);
        if (*pred) return run_predict(o);
        if (*eval) return run_eval(o);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const SizeError& e) {
        std::cerr << "size limit: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

int cli_main(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace vtn
