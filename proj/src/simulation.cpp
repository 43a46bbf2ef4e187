#include "mftsc/simulation.hpp"

#include "mftsc/clustering.hpp"
#include "mftsc/kmeans.hpp"
#include "mftsc/metrics.hpp"
#include "mftsc/parallel.hpp"
#include "mftsc/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mftsc {

namespace {

std::vector<BasisFn> sin_cos_pair(int wave) {
    return {{false, wave}, {true, wave}};
}

std::vector<BasisFn> sines(int first, int count) {
    std::vector<BasisFn> out;
    for (int k = 0; k < count; ++k) out.push_back({false, first + k});
    return out;
}

} // namespace

ScenarioConfig scenario_config(const std::string& id) {
    ScenarioConfig cfg;
    cfg.id = id;

    if (id == "COMPLICATED") {
        cfg.clusters[0] = {1, sines(1, 6), sines(1, 3), {0.9, 0.8, 0.7, 0.6, 0.5, 0.4},
                           {0.5, 0.4, 0.3}};
        cfg.clusters[1] = {2, sines(5, 6), sines(4, 3), {0.8, 0.7, 0.6, 0.5, 0.4, 0.3},
                           {0.4, 0.3, 0.2}};
        return cfg;
    }

    if (id.size() != 3 || id[0] != 'C' || id[1] < '0' || id[1] > '4' || id[2] < 'a' ||
        id[2] > 'd')
        throw std::invalid_argument("unknown scenario id: " + id);
    const int design = id[1] - '0';
    const char letter = id[2];

    const bool mean_differs = design == 0;
    const bool level1_differs = design == 3 || design == 4;
    const bool level2_differs = design == 2 || design == 4;
    const bool phi_differs = letter == 'c' || letter == 'd';
    const bool tau_differs = letter == 'b' || letter == 'd';

    const std::vector<double> phi1{0.7, 0.6}, phi2{0.6, 0.5};
    const std::vector<double> tau1{0.5, 0.4}, tau2{0.3, 0.2};

    cfg.clusters[0] = {1, sin_cos_pair(1), sin_cos_pair(3), phi1, tau1};
    cfg.clusters[1] = {mean_differs ? 2 : 1, sin_cos_pair(level1_differs ? 2 : 1),
                       sin_cos_pair(level2_differs ? 4 : 3), phi_differs ? phi2 : phi1,
                       tau_differs ? tau2 : tau1};
    return cfg;
}

double scenario_mean(int mean_id, double x) {
    if (mean_id == 1) return -2.0 * (x - 0.25) * (x - 0.25) + 1.5;
    if (mean_id == 2) return 4.0 * (x - 0.6) * (x - 0.6) + 1.0;
    throw std::invalid_argument("unknown mean id");
}

Vector evaluate_basis(const BasisFn& fn, const Grid& grid) {
    const double pi = std::acos(-1.0);
    Vector out(grid.size());
    for (Index j = 0; j < grid.size(); ++j) {
        const double arg = static_cast<double>(fn.wave) * pi * grid.points()(j);
        out(j) = std::sqrt(2.0) * (fn.cosine ? std::cos(arg) : std::sin(arg));
    }
    return out;
}

Vector simulate_ar1(Index t_count, double phi, double sigma_innov, std::uint64_t seed) {
    if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("simulate_ar1: needs |phi| < 1");
    if (t_count < 1) throw std::invalid_argument("simulate_ar1: needs T >= 1");
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector x(t_count);
    x(0) = gauss(rng) * sigma_innov / std::sqrt(1.0 - phi * phi);
    for (Index t = 1; t < t_count; ++t) x(t) = phi * x(t - 1) + sigma_innov * gauss(rng);
    return x;
}

LabeledPanel generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
    const GridPtr grid = make_uniform_grid(config.grid_points, 0.0, 1.0);
    const Index t_count = config.timepoints;
    const Index per_cluster = config.objects_per_cluster;

    LabeledPanel out;
    out.panel.grid = grid;

    for (int c = 0; c < 2; ++c) {
        const ClusterSpec& spec = config.clusters[static_cast<std::size_t>(c)];
        if (spec.rho.size() != spec.ar_xi.size() || spec.psi.size() != spec.ar_zeta.size())
            throw std::invalid_argument("scenario: basis/AR-parameter length mismatch");

        Vector mean(grid->size());
        for (Index j = 0; j < grid->size(); ++j)
            mean(j) = scenario_mean(spec.mean_id, grid->points()(j));

        Matrix rho(grid->size(), static_cast<Index>(spec.rho.size()));
        for (std::size_t k = 0; k < spec.rho.size(); ++k)
            rho.col(static_cast<Index>(k)) = evaluate_basis(spec.rho[k], *grid);
        Matrix psi(grid->size(), static_cast<Index>(spec.psi.size()));
        for (std::size_t l = 0; l < spec.psi.size(); ++l)
            psi.col(static_cast<Index>(l)) = evaluate_basis(spec.psi[l], *grid);

        // stationary variance of an AR(1) with parameter phi pinned to
        // score_scale^2 * phi, making the parameter ladder the eigenvalue
        // ladder of the component
        const auto innovation_sd = [&](double phi) {
            return config.score_scale * std::sqrt(phi * (1.0 - phi * phi));
        };
        Matrix cluster_xi(t_count, static_cast<Index>(spec.ar_xi.size()));
        if (config.shared_trend)
            for (std::size_t k = 0; k < spec.ar_xi.size(); ++k)
                cluster_xi.col(static_cast<Index>(k)) = simulate_ar1(
                    t_count, spec.ar_xi[k], innovation_sd(spec.ar_xi[k]),
                    substream(seed, static_cast<std::uint64_t>(c),
                              100 + static_cast<std::uint64_t>(k)));
        for (Index o = 0; o < per_cluster; ++o) {
            // by default scores are drawn independently per object; the
            // cluster contributes the parameters and eigenspaces
            Matrix xi(t_count, static_cast<Index>(spec.ar_xi.size()));
            if (config.shared_trend)
                xi = cluster_xi;
            else
                for (std::size_t k = 0; k < spec.ar_xi.size(); ++k)
                    xi.col(static_cast<Index>(k)) = simulate_ar1(
                        t_count, spec.ar_xi[k], innovation_sd(spec.ar_xi[k]),
                        substream(seed, static_cast<std::uint64_t>(c),
                                  100 + static_cast<std::uint64_t>(k),
                                  static_cast<std::uint64_t>(o)));
            Matrix zeta(t_count, static_cast<Index>(spec.ar_zeta.size()));
            for (std::size_t l = 0; l < spec.ar_zeta.size(); ++l)
                zeta.col(static_cast<Index>(l)) = simulate_ar1(
                    t_count, spec.ar_zeta[l], innovation_sd(spec.ar_zeta[l]),
                    substream(seed, static_cast<std::uint64_t>(c),
                              200 + static_cast<std::uint64_t>(l),
                              static_cast<std::uint64_t>(o)));

            Matrix y = mean.replicate(1, t_count);
            y += rho * xi.transpose();
            y += psi * zeta.transpose();
            if (config.noise_sigma > 0.0) {
                auto rng = make_rng(substream(seed, static_cast<std::uint64_t>(c), 300,
                                              static_cast<std::uint64_t>(o)));
                std::normal_distribution<double> gauss(0.0, config.noise_sigma);
                for (Index t = 0; t < t_count; ++t)
                    for (Index j = 0; j < grid->size(); ++j) y(j, t) += gauss(rng);
            }
            std::ostringstream label;
            label << "G" << (c + 1) << "-" << (o + 1);
            out.panel.labels.push_back(label.str());
            out.panel.series.push_back(std::move(y));
            out.truth.push_back(c + 1);
        }
    }
    return out;
}

LabeledPanel generate_scenario(const std::string& id, std::uint64_t seed,
                               const ScenarioOverrides& overrides) {
    ScenarioConfig cfg = scenario_config(id);
    if (overrides.objects_per_cluster) cfg.objects_per_cluster = *overrides.objects_per_cluster;
    if (overrides.timepoints) cfg.timepoints = *overrides.timepoints;
    if (overrides.noise_sigma) cfg.noise_sigma = *overrides.noise_sigma;
    if (overrides.grid_points) cfg.grid_points = *overrides.grid_points;
    return generate_scenario(cfg, seed);
}

ScenarioResult run_scenario(const std::string& id, int replications,
                            const std::vector<std::string>& methods, std::uint64_t seed,
                            const ScenarioOverrides& overrides, unsigned threads) {
    if (replications < 1) throw std::invalid_argument("run_scenario: replications >= 1");
    for (const auto& m : methods)
        if (m != "MFTSC" && m != "kmeans" && m != "hclust")
            throw std::invalid_argument("run_scenario: unknown method " + m);

    ScenarioResult result;
    result.id = id;
    result.replications = replications;
    result.seed = seed;
    scenario_config(id); // validate the id before spawning work

    const auto wants = [&](const std::string& m) {
        for (const auto& x : methods)
            if (x == m) return true;
        return false;
    };
    const bool want_mftsc = wants("MFTSC");
    const bool want_kmeans = wants("kmeans");
    const bool want_hclust = wants("hclust");

    struct RepOutcome {
        double crate_mftsc = 0, arand_mftsc = 0, iters_mftsc = 0;
        double crate_kmeans = 0, arand_kmeans = 0;
        double crate_hclust = 0, arand_hclust = 0;
    };
    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(replications));

    parallel_for(
        static_cast<std::size_t>(replications),
        [&](std::size_t r) {
            const LabeledPanel data =
                generate_scenario(id, substream(seed, static_cast<std::uint64_t>(r)),
                                  overrides);
            RepOutcome& out = outcomes[r];

            if (want_mftsc) {
                MftscConfig cfg;
                cfg.initial.seed = substream(seed, static_cast<std::uint64_t>(r), 77);
                const ClusterAssignment a = cluster_mftsc(data.panel, cfg);
                out.crate_mftsc = correct_classification_rate(a.labels, data.truth);
                out.arand_mftsc = adjusted_rand_index(a.labels, data.truth);
                out.iters_mftsc = a.iterations;
            }
            if (want_kmeans || want_hclust) {
                InitialClusteringConfig cfg;
                cfg.seed = substream(seed, static_cast<std::uint64_t>(r), 88);
                const ClusterAssignment a = initial_clustering(data.panel, cfg);
                if (want_kmeans) {
                    out.crate_kmeans = correct_classification_rate(a.labels, data.truth);
                    out.arand_kmeans = adjusted_rand_index(a.labels, data.truth);
                }
                if (want_hclust) {
                    const CombinedScores combined = combined_fpca_scores(data.panel, cfg);
                    const Index dim = combined.scores.front().size();
                    Matrix points(data.panel.n_objects(), dim);
                    for (Index i = 0; i < data.panel.n_objects(); ++i)
                        points.row(i) = Eigen::Map<const Vector>(
                                            combined.scores[static_cast<std::size_t>(i)].data(),
                                            dim)
                                            .transpose();
                    std::vector<int> labels = ward_cluster(points, a.K);
                    for (auto& l : labels) ++l;
                    out.crate_hclust = correct_classification_rate(labels, data.truth);
                    out.arand_hclust = adjusted_rand_index(labels, data.truth);
                }
            }
        },
        threads);

    const auto push_method = [&](const std::string& name, auto crate_of, auto arand_of,
                                 auto iters_of, bool has_iters) {
        MethodStats stats;
        stats.method = name;
        for (int r = 0; r < replications; ++r) {
            const RepOutcome& o = outcomes[static_cast<std::size_t>(r)];
            stats.crate.push_back(crate_of(o));
            stats.arand.push_back(arand_of(o));
            stats.iterations.push_back(has_iters ? iters_of(o)
                                                 : std::numeric_limits<double>::quiet_NaN());
            stats.mean_crate += crate_of(o);
            stats.mean_arand += arand_of(o);
            if (has_iters) stats.mean_iterations += iters_of(o);
        }
        stats.mean_crate /= replications;
        stats.mean_arand /= replications;
        stats.mean_iterations =
            has_iters ? stats.mean_iterations / replications
                      : std::numeric_limits<double>::quiet_NaN();
        result.methods.push_back(std::move(stats));
    };

    if (want_kmeans)
        push_method(
            "kmeans", [](const RepOutcome& o) { return o.crate_kmeans; },
            [](const RepOutcome& o) { return o.arand_kmeans; },
            [](const RepOutcome&) { return 0.0; }, false);
    if (want_hclust)
        push_method(
            "hclust", [](const RepOutcome& o) { return o.crate_hclust; },
            [](const RepOutcome& o) { return o.arand_hclust; },
            [](const RepOutcome&) { return 0.0; }, false);
    if (want_mftsc)
        push_method(
            "MFTSC", [](const RepOutcome& o) { return o.crate_mftsc; },
            [](const RepOutcome& o) { return o.arand_mftsc; },
            [](const RepOutcome& o) { return o.iters_mftsc; }, true);
    return result;
}

std::string scenario_table(const ScenarioResult& result) {
    std::ostringstream os;
    os << "scenario\tmetric";
    for (const auto& m : result.methods) os << "\t" << m.method;
    os << "\n";
    const auto row = [&](const std::string& metric, auto value_of) {
        os << result.id << "\t" << metric;
        for (const auto& m : result.methods) {
            const double v = value_of(m);
            if (std::isnan(v))
                os << "\t-";
            else {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.3f", v);
                os << "\t" << buf;
            }
        }
        os << "\n";
    };
    row("cRate", [](const MethodStats& m) { return m.mean_crate; });
    row("aRand", [](const MethodStats& m) { return m.mean_arand; });
    row("IterNo", [](const MethodStats& m) { return m.mean_iterations; });
    return os.str();
}

} // namespace mftsc
