#pragma once

#include "mftsc/actuarial.hpp"
#include "mftsc/grid.hpp"
#include "mftsc/panel_model.hpp"
#include "mftsc/smoothing.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mftsc {

/// Input-data problems carry a machine-parsable class plus row context.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Key-value run configuration (JSON document, unknown keys rejected).
struct RunConfig {
    double p1 = 0.9, p2 = 0.9, p3 = 0.9;
    int k_max = 0; // 0 = min(10, I-1)
    int q_max = 6;
    double variance_share = 0.99;
    int kmeans_restarts = 25;
    std::uint64_t seed = 0;
    int max_iterations = 50;
    double flat_top_k = 0.5;
    std::optional<double> bandwidth;
    std::optional<int> max_lag;
    std::optional<double> tau0;
    std::optional<double> monotone_from = 65.0;
    int aggregate_age_female = 100;
    int aggregate_age_male = 98;
    int aggregate_age_total = 100;
    std::optional<int> train_end;
    int horizons = 10;
    double alpha = 0.2;
    int bootstrap_draws = 1000;
    double interest_rate = 0.02;
    int p_max = 5;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);
std::string run_config_json(const RunConfig& config); // echo for reports

struct IngestConfig {
    char sex = 'F';
    RunConfig run;
};

struct IngestResult {
    FTSPanel panel;                        // smoothed log-rate curves
    std::vector<int> years;                // shared, ascending
    std::vector<RawMortalitySurface> raw;  // per object, post-aggregation
};

/// Parses and validates the mortality CSV (header
/// country,sex,year,age,rate,exposure), aggregates the open age group,
/// takes logs and smooths. Errors cite row numbers.
IngestResult ingest(const std::string& path, const IngestConfig& config);

// panel interchange format: header object,t,x,value (long layout)
void write_panel_csv(const std::string& path, const FTSPanel& panel,
                     const std::vector<int>& times);
FTSPanel read_panel_csv(const std::string& path, std::vector<int>* times = nullptr);

// object,label pairs
void write_labels_csv(const std::string& path, const std::vector<std::string>& objects,
                      const std::vector<int>& labels);
std::vector<int> read_labels_csv(const std::string& path,
                                 const std::vector<std::string>& objects);

// forecast surface: header year,age,rate
MortalitySurface read_surface_csv(const std::string& path);
void write_surface_csv(const std::string& path, const MortalitySurface& surface);

// panel-model fits round-trip through a structured JSON document
std::string serialize_fit(const PanelModelFit& fit);
PanelModelFit deserialize_fit(const std::string& text);

} // namespace mftsc
