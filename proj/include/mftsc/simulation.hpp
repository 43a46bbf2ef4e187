#pragma once

#include "mftsc/grid.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mftsc {

/// sqrt(2) * sin(wave * pi * x) or sqrt(2) * cos(wave * pi * x) on [0,1].
struct BasisFn {
    bool cosine = false;
    int wave = 1;
};

struct ClusterSpec {
    int mean_id = 1;             // 1: -2(x-0.25)^2 + 1.5, 2: 4(x-0.6)^2 + 1
    std::vector<BasisFn> rho;    // common-trend eigenfunctions
    std::vector<BasisFn> psi;    // object-specific eigenfunctions
    std::vector<double> ar_xi;   // AR(1) parameter per rho component
    std::vector<double> ar_zeta; // AR(1) parameter per psi component
};

struct ScenarioConfig {
    std::string id;
    std::array<ClusterSpec, 2> clusters;
    Index objects_per_cluster = 25;
    Index timepoints = 61;
    double noise_sigma = 0.2;
    Index grid_points = 201;
    /// Score variances are score_scale^2 * parameter, so the AR parameter
    /// ladders double as the (slowly decaying) eigenvalue ladders.
    double score_scale = 1.0;
    /// Draw one common-trend realization per cluster (the fitted model's own
    /// assumption) instead of independent per-object trends.
    bool shared_trend = false;
};

struct ScenarioOverrides {
    std::optional<Index> objects_per_cluster;
    std::optional<Index> timepoints;
    std::optional<double> noise_sigma;
    std::optional<Index> grid_points;
};

/// Catalog lookup: C0a..C4d and COMPLICATED. Throws on unknown ids.
ScenarioConfig scenario_config(const std::string& id);

double scenario_mean(int mean_id, double x);
Vector evaluate_basis(const BasisFn& fn, const Grid& grid);

/// Stationary AR(1): x_1 from the stationary law, then the seeded recursion.
Vector simulate_ar1(Index t_count, double phi, double sigma_innov, std::uint64_t seed);

struct LabeledPanel {
    FTSPanel panel;
    std::vector<int> truth; // 1-based cluster ids
};

LabeledPanel generate_scenario(const ScenarioConfig& config, std::uint64_t seed);
LabeledPanel generate_scenario(const std::string& id, std::uint64_t seed,
                               const ScenarioOverrides& overrides = {});

struct MethodStats {
    std::string method;
    std::vector<double> crate;
    std::vector<double> arand;
    std::vector<double> iterations; // NaN for methods without an iterative step
    double mean_crate = 0.0;
    double mean_arand = 0.0;
    double mean_iterations = 0.0;
};

struct ScenarioResult {
    std::string id;
    int replications = 0;
    std::uint64_t seed = 0;
    double score_scale = 1.0;
    std::vector<MethodStats> methods;
};

/// Fresh data per replication, each requested method clustered and scored.
/// Replications run on seeded substreams; aggregation is order-independent.
ScenarioResult run_scenario(const std::string& id, int replications,
                            const std::vector<std::string>& methods, std::uint64_t seed,
                            const ScenarioOverrides& overrides = {}, unsigned threads = 0);

/// Flat delimited table (scenario x metric rows, method columns).
std::string scenario_table(const ScenarioResult& result);

} // namespace mftsc
