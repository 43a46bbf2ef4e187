#include <CLI11.hpp>
#include <json.hpp>

#include "mftsc/actuarial.hpp"
#include "mftsc/clustering.hpp"
#include "mftsc/forecasting.hpp"
#include "mftsc/io.hpp"
#include "mftsc/panel_model.hpp"
#include "mftsc/simulation.hpp"

#include <fstream>
#include <iostream>
#include <optional>

using json = nlohmann::ordered_json;
using namespace mftsc;

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << text;
}

std::string dump_report(const json& doc) { return doc.dump(2) + "\n"; }

MftscConfig cluster_config_from(const RunConfig& run) {
    MftscConfig cfg;
    cfg.initial.K_max = run.k_max;
    cfg.initial.Q_max = run.q_max;
    cfg.initial.variance_share = run.variance_share;
    cfg.initial.kmeans_restarts = run.kmeans_restarts;
    cfg.initial.seed = run.seed;
    cfg.p1 = run.p1;
    cfg.p2 = run.p2;
    cfg.p3 = run.p3;
    cfg.lr.flat_top_k = run.flat_top_k;
    if (run.bandwidth) cfg.lr.bandwidth = *run.bandwidth;
    if (run.max_lag) cfg.lr.max_lag = *run.max_lag;
    cfg.max_iterations = run.max_iterations;
    return cfg;
}

struct PanelSource {
    std::string input;  // mortality CSV
    std::string panel;  // panel CSV
    std::string sex = "F";
};

void add_panel_source(CLI::App* cmd, PanelSource& src) {
    auto* input = cmd->add_option("--input", src.input, "mortality CSV file");
    auto* panel = cmd->add_option("--panel", src.panel, "pre-smoothed panel CSV file");
    cmd->add_option("--sex", src.sex, "series to use from --input: F, M or T")
        ->check(CLI::IsMember({"F", "M", "T"}));
    input->excludes(panel);
}

FTSPanel load_panel(const PanelSource& src, const RunConfig& run, std::vector<int>& times) {
    if (!src.panel.empty()) return read_panel_csv(src.panel, &times);
    if (src.input.empty())
        throw ValidationError("either --input or --panel is required");
    IngestConfig cfg;
    cfg.sex = src.sex[0];
    cfg.run = run;
    IngestResult result = ingest(src.input, cfg);
    times = result.years;
    return std::move(result.panel);
}

json labels_json(const std::vector<std::string>& objects, const std::vector<int>& labels) {
    json out = json::object();
    for (std::size_t i = 0; i < objects.size(); ++i) out[objects[i]] = labels[i];
    return out;
}

int run_simulate(const std::string& scenario, int reps, std::uint64_t seed,
                 const std::vector<std::string>& methods, std::optional<int> objects,
                 std::optional<int> timepoints, std::optional<double> noise,
                 const std::string& out_path, const std::string& table_path,
                 const std::string& export_panel, const std::string& export_truth,
                 unsigned threads) {
    ScenarioOverrides overrides;
    if (objects) overrides.objects_per_cluster = *objects;
    if (timepoints) overrides.timepoints = *timepoints;
    if (noise) overrides.noise_sigma = *noise;

    if (!export_panel.empty() || !export_truth.empty()) {
        const LabeledPanel data = generate_scenario(scenario, seed, overrides);
        std::vector<int> times(static_cast<std::size_t>(data.panel.n_times()));
        for (std::size_t t = 0; t < times.size(); ++t) times[t] = static_cast<int>(t + 1);
        if (!export_panel.empty()) write_panel_csv(export_panel, data.panel, times);
        if (!export_truth.empty())
            write_labels_csv(export_truth, data.panel.labels, data.truth);
    }

    const ScenarioResult result =
        run_scenario(scenario, reps, methods, seed, overrides, threads);
    const std::string table = scenario_table(result);
    std::cout << table;
    if (!table_path.empty()) write_text(table_path, table);

    if (!out_path.empty()) {
        json doc;
        doc["schema"] = "v1";
        doc["command"] = "simulate";
        doc["scenario"] = scenario;
        doc["replications"] = reps;
        doc["seed"] = seed;
        doc["score_scale"] = result.score_scale;
        json per_method = json::object();
        for (const auto& m : result.methods) {
            json entry;
            entry["mean_cRate"] = m.mean_crate;
            entry["mean_aRand"] = m.mean_arand;
            if (!std::isnan(m.mean_iterations)) entry["mean_iterations"] = m.mean_iterations;
            entry["cRate"] = m.crate;
            entry["aRand"] = m.arand;
            per_method[m.method] = std::move(entry);
        }
        doc["methods"] = std::move(per_method);
        write_text(out_path, dump_report(doc));
    }
    return 0;
}

int run_cluster(const PanelSource& src, const RunConfig& run, const std::string& out_path) {
    std::vector<int> times;
    const FTSPanel panel = load_panel(src, run, times);
    const MftscConfig cfg = cluster_config_from(run);
    const ClusterAssignment assignment = cluster_mftsc(panel, cfg);

    json doc;
    doc["schema"] = "v1";
    doc["command"] = "cluster";
    doc["config"] = json::parse(run_config_json(run));
    doc["seed"] = run.seed;
    doc["K"] = assignment.K;
    doc["iterations"] = assignment.iterations;
    doc["converged"] = assignment.converged;
    doc["labels"] = labels_json(panel.labels, assignment.labels);
    doc["history"] = assignment.history;
    doc["warnings"] = assignment.warnings;
    const std::string text = dump_report(doc);
    std::cout << text;
    if (!out_path.empty()) write_text(out_path, text);
    return 0;
}

int run_forecast(const PanelSource& src, const RunConfig& run, int train_end, int horizons,
                 const std::vector<std::string>& methods, bool intervals,
                 const std::string& out_path, const std::string& table_path) {
    std::vector<int> times;
    const FTSPanel panel = load_panel(src, run, times);
    const int last = times.back();
    if (train_end >= last)
        throw ValidationError("train-end " + std::to_string(train_end) +
                              " leaves no holdout (last time is " + std::to_string(last) +
                              ")");
    const auto it = std::find(times.begin(), times.end(), train_end);
    if (it == times.end())
        throw ValidationError("train-end " + std::to_string(train_end) +
                              " is not a time point of the panel");
    const Index n_train = static_cast<Index>(it - times.begin()) + 1;

    EvaluationOptions options;
    options.cluster = cluster_config_from(run);
    options.p_max = run.p_max;
    options.with_intervals = intervals;
    options.alpha = run.alpha;
    options.bootstrap_draws = run.bootstrap_draws;
    options.seed = run.seed;

    FTSPanel truncated = panel;
    const Index h_cap = std::min<Index>(horizons, panel.n_times() - n_train);
    if (h_cap < panel.n_times() - n_train) {
        // evaluate only the requested horizons
        for (auto& s : truncated.series)
            s = s.leftCols(n_train + h_cap).eval();
    }

    json doc;
    doc["schema"] = "v1";
    doc["command"] = "forecast";
    doc["config"] = json::parse(run_config_json(run));
    doc["train_end"] = train_end;
    doc["horizons"] = static_cast<int>(h_cap);
    std::ostringstream table;
    table << "method\th\tRMSFE\tmean_interval_score\n";
    json per_method = json::object();
    for (const auto& name : methods) {
        ForecastMethod method;
        if (name == "UTS")
            method = ForecastMethod::UTS;
        else if (name == "MFTSC")
            method = ForecastMethod::MFTSC;
        else
            throw ValidationError("unknown forecast method " + name);
        const ForecastReport report =
            expanding_window_evaluation(truncated, n_train, method, options);
        json entry;
        entry["rmsfe"] = report.rmsfe;
        entry["mean_interval_score"] = report.mean_interval_score;
        per_method[name] = std::move(entry);
        for (std::size_t h = 0; h < report.horizons.size(); ++h) {
            char rm[32], sc[32];
            std::snprintf(rm, sizeof(rm), "%.6f", report.rmsfe[h]);
            if (std::isnan(report.mean_interval_score[h]))
                std::snprintf(sc, sizeof(sc), "-");
            else
                std::snprintf(sc, sizeof(sc), "%.6f", report.mean_interval_score[h]);
            table << name << "\t" << report.horizons[h] << "\t" << rm << "\t" << sc << "\n";
        }
    }
    doc["methods"] = std::move(per_method);
    std::cout << table.str();
    if (!table_path.empty()) write_text(table_path, table.str());
    if (!out_path.empty()) write_text(out_path, dump_report(doc));
    return 0;
}

int run_price(const std::string& input, int age, int year, double rate,
              const std::string& label, const std::string& out_path) {
    const MortalitySurface surface = read_surface_csv(input);
    const AnnuityQuote quote = annuity_price(surface, age, year, rate);
    std::ostringstream os;
    os << "year\tage\tmethod\tPV\n";
    char pv[32];
    std::snprintf(pv, sizeof(pv), "%.6f", quote.present_value);
    os << year << "\t" << age << "\t" << label << "\t" << pv << "\n";
    std::cout << os.str();
    if (!out_path.empty()) write_text(out_path, os.str());
    return 0;
}

int run_plotdata(const PanelSource& src, const RunConfig& run, const std::string& what,
                 const std::string& object, const std::string& outdir) {
    std::vector<int> times;
    const FTSPanel panel = load_panel(src, run, times);
    const auto it = std::find(panel.labels.begin(), panel.labels.end(), object);
    if (it == panel.labels.end()) throw ValidationError("unknown object " + object);
    const Index obj = static_cast<Index>(it - panel.labels.begin());

    const auto curve_file = [&](const std::string& name, const Matrix& curves,
                                const std::vector<std::string>& headers) {
        std::ostringstream os;
        os << "x";
        for (const auto& h : headers) os << "," << h;
        os << "\n";
        for (Index j = 0; j < panel.grid->size(); ++j) {
            os << panel.grid->points()(j);
            for (Index c = 0; c < curves.cols(); ++c) {
                char buf[40];
                std::snprintf(buf, sizeof(buf), "%.17g", curves(j, c));
                os << "," << buf;
            }
            os << "\n";
        }
        write_text(outdir + "/" + name, os.str());
    };

    std::vector<std::string> time_headers;
    for (const int t : times) time_headers.push_back("t" + std::to_string(t));

    if (what == "rainbow") {
        curve_file("rainbow_" + object + ".csv",
                   panel.series[static_cast<std::size_t>(obj)], time_headers);
        return 0;
    }
    if (what != "components") throw ValidationError("plotdata --what must be rainbow|components");

    const PanelDecomposition dec = decompose_panel(panel);
    curve_file("mu.csv", dec.mu.values, {"mu"});
    curve_file("eta.csv", dec.eta, panel.labels);
    curve_file("r.csv", dec.r, time_headers);
    curve_file("u_" + object + ".csv", dec.u[static_cast<std::size_t>(obj)], time_headers);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"functional panel data model: clustering and forecasting of multiple "
                 "functional time series"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration")->expected(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a simulation scenario");
    std::string scenario = "C4d";
    int reps = 20;
    std::uint64_t seed = 1;
    std::vector<std::string> sim_methods = {"kmeans", "hclust", "MFTSC"};
    std::optional<int> objects, timepoints;
    std::optional<double> noise;
    std::string sim_out, sim_table, export_panel, export_truth;
    unsigned threads = 0;
    simulate->add_option("--scenario", scenario, "C0a..C4d or COMPLICATED")->required();
    simulate->add_option("--reps", reps, "replications");
    simulate->add_option("--seed", seed, "master seed");
    simulate->add_option("--methods", sim_methods, "subset of MFTSC,kmeans,hclust");
    simulate->add_option("--objects", objects, "objects per cluster override");
    simulate->add_option("--timepoints", timepoints, "time points override");
    simulate->add_option("--noise", noise, "noise sigma override");
    simulate->add_option("--out", sim_out, "JSON report path");
    simulate->add_option("--table", sim_table, "flat table path");
    simulate->add_option("--export-panel", export_panel, "write one generated panel as CSV");
    simulate->add_option("--export-truth", export_truth, "write the generated labels as CSV");
    simulate->add_option("--threads", threads, "worker threads (0 = hardware)");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "cluster a panel of functional time series");
    PanelSource cluster_src;
    std::string cluster_out;
    add_panel_source(cluster, cluster_src);
    cluster->add_option("--out", cluster_out, "JSON report path");

    // forecast
    auto* forecast = app.add_subcommand("forecast", "expanding-window forecast evaluation");
    PanelSource forecast_src;
    int train_end = 0, horizons = 10;
    std::vector<std::string> forecast_methods = {"UTS", "MFTSC"};
    bool intervals = false;
    std::string forecast_out, forecast_table;
    add_panel_source(forecast, forecast_src);
    forecast->add_option("--train-end", train_end, "last training time point")->required();
    forecast->add_option("--horizons", horizons, "maximum forecast horizon");
    forecast->add_option("--methods", forecast_methods, "subset of UTS,MFTSC");
    forecast->add_flag("--intervals", intervals, "also score bootstrap prediction intervals");
    forecast->add_option("--out", forecast_out, "JSON report path");
    forecast->add_option("--table", forecast_table, "flat table path");

    // price
    auto* price = app.add_subcommand("price", "life annuity present value from a surface");
    std::string price_input, price_label = "MFTSC", price_out;
    int price_age = 0, price_year = 0;
    double price_rate = 0.02;
    price->add_option("--input", price_input, "forecast surface CSV (year,age,rate)")
        ->required();
    price->add_option("--age", price_age, "age at issue")->required();
    price->add_option("--year", price_year, "issue year")->required();
    price->add_option("--rate", price_rate, "annual interest rate");
    price->add_option("--method-label", price_label, "method tag for the output table");
    price->add_option("--out", price_out, "table output path");

    // plotdata
    auto* plotdata = app.add_subcommand("plotdata", "emit plot-ready curve files");
    PanelSource plot_src;
    std::string what = "rainbow", object, outdir = ".";
    add_panel_source(plotdata, plot_src);
    plotdata->add_option("--what", what, "rainbow or components")->required();
    plotdata->add_option("--object", object, "object label")->required();
    plotdata->add_option("--outdir", outdir, "output directory");

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "validate and smooth a mortality CSV");
    PanelSource ingest_src;
    std::string ingest_export;
    add_panel_source(ingest_cmd, ingest_src);
    ingest_cmd->add_option("--export-panel", ingest_export, "write the smoothed panel CSV")
        ->required();

    try {
        app.parse(argc, argv);
        RunConfig run;
        if (!config_path.empty()) run = load_run_config(config_path);
        if (seed != 1 && *simulate) run.seed = seed;

        if (*simulate)
            return run_simulate(scenario, reps, seed, sim_methods, objects, timepoints, noise,
                                sim_out, sim_table, export_panel, export_truth, threads);
        if (*cluster) return run_cluster(cluster_src, run, cluster_out);
        if (*forecast)
            return run_forecast(forecast_src, run, train_end, horizons, forecast_methods,
                                intervals, forecast_out, forecast_table);
        if (*price)
            return run_price(price_input, price_age, price_year, price_rate, price_label,
                             price_out);
        if (*plotdata) return run_plotdata(plot_src, run, what, object, outdir);
        if (*ingest_cmd) {
            std::vector<int> times;
            const FTSPanel panel = load_panel(ingest_src, run, times);
            write_panel_csv(ingest_export, panel, times);
            std::cout << "objects=" << panel.n_objects() << " times=" << panel.n_times()
                      << " grid=" << panel.grid->size() << "\n";
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ValidationError& e) {
        std::cerr << "error:validation: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error:contract: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error:runtime: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
