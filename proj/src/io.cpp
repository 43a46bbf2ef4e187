#include "mftsc/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mftsc {

namespace {

using json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << text;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) {
        // trim surrounding whitespace
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& s, std::size_t row, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("row " + std::to_string(row) + ": bad " + what + " '" + s + "'");
    }
}

int parse_int(const std::string& s, std::size_t row, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("row " + std::to_string(row) + ": bad " + what + " '" + s + "'");
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");

    static const std::set<std::string> known = {
        "P1", "P2", "P3", "K_max", "Q_max", "variance_share", "kmeans_restarts", "seed",
        "max_iterations", "flat_top_k", "bandwidth", "max_lag", "tau0", "monotone_from",
        "aggregate_age_female", "aggregate_age_male", "aggregate_age_total", "train_end",
        "horizons", "alpha", "bootstrap_B", "interest_rate", "p_max"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (known.count(key) == 0) throw ValidationError("unknown config key: " + key);
    }

    RunConfig cfg;
    const auto get = [&](const char* key, auto& slot) {
        if (doc.contains(key)) slot = doc[key].get<std::decay_t<decltype(slot)>>();
    };
    get("P1", cfg.p1);
    get("P2", cfg.p2);
    get("P3", cfg.p3);
    get("K_max", cfg.k_max);
    get("Q_max", cfg.q_max);
    get("variance_share", cfg.variance_share);
    get("kmeans_restarts", cfg.kmeans_restarts);
    get("seed", cfg.seed);
    get("max_iterations", cfg.max_iterations);
    get("flat_top_k", cfg.flat_top_k);
    if (doc.contains("bandwidth")) cfg.bandwidth = doc["bandwidth"].get<double>();
    if (doc.contains("max_lag")) cfg.max_lag = doc["max_lag"].get<int>();
    if (doc.contains("tau0")) cfg.tau0 = doc["tau0"].get<double>();
    if (doc.contains("monotone_from")) {
        if (doc["monotone_from"].is_null())
            cfg.monotone_from.reset();
        else
            cfg.monotone_from = doc["monotone_from"].get<double>();
    }
    get("aggregate_age_female", cfg.aggregate_age_female);
    get("aggregate_age_male", cfg.aggregate_age_male);
    get("aggregate_age_total", cfg.aggregate_age_total);
    if (doc.contains("train_end")) cfg.train_end = doc["train_end"].get<int>();
    get("horizons", cfg.horizons);
    get("alpha", cfg.alpha);
    get("bootstrap_B", cfg.bootstrap_draws);
    get("interest_rate", cfg.interest_rate);
    get("p_max", cfg.p_max);

    if (!(cfg.p1 > 0 && cfg.p1 <= 1) || !(cfg.p2 > 0 && cfg.p2 <= 1) ||
        !(cfg.p3 > 0 && cfg.p3 <= 1))
        throw ValidationError("P1/P2/P3 must lie in (0,1]");
    if (!(cfg.flat_top_k > 0 && cfg.flat_top_k < 1))
        throw ValidationError("flat_top_k must lie in (0,1)");
    if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw ValidationError("alpha must lie in (0,1)");
    if (cfg.tau0 && *cfg.tau0 < 0) throw ValidationError("tau0 must be nonnegative");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(read_file(path));
}

std::string run_config_json(const RunConfig& cfg) {
    json doc;
    doc["P1"] = cfg.p1;
    doc["P2"] = cfg.p2;
    doc["P3"] = cfg.p3;
    doc["K_max"] = cfg.k_max;
    doc["Q_max"] = cfg.q_max;
    doc["variance_share"] = cfg.variance_share;
    doc["kmeans_restarts"] = cfg.kmeans_restarts;
    doc["seed"] = cfg.seed;
    doc["max_iterations"] = cfg.max_iterations;
    doc["flat_top_k"] = cfg.flat_top_k;
    if (cfg.bandwidth) doc["bandwidth"] = *cfg.bandwidth;
    if (cfg.max_lag) doc["max_lag"] = *cfg.max_lag;
    if (cfg.tau0) doc["tau0"] = *cfg.tau0;
    if (cfg.monotone_from)
        doc["monotone_from"] = *cfg.monotone_from;
    else
        doc["monotone_from"] = nullptr;
    doc["aggregate_age_female"] = cfg.aggregate_age_female;
    doc["aggregate_age_male"] = cfg.aggregate_age_male;
    doc["aggregate_age_total"] = cfg.aggregate_age_total;
    if (cfg.train_end) doc["train_end"] = *cfg.train_end;
    doc["horizons"] = cfg.horizons;
    doc["alpha"] = cfg.alpha;
    doc["bootstrap_B"] = cfg.bootstrap_draws;
    doc["interest_rate"] = cfg.interest_rate;
    doc["p_max"] = cfg.p_max;
    return doc.dump(2);
}

namespace {

struct MortalityCell {
    double rate = 0.0;
    double exposure = 0.0;
    std::size_t row = 0;
};

} // namespace

IngestResult ingest(const std::string& path, const IngestConfig& config) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;

    if (!std::getline(in, line)) throw ValidationError("empty mortality file");
    ++row;
    {
        auto header = split_csv_line(line);
        const std::vector<std::string> expected = {"country", "sex",  "year",
                                                   "age",     "rate", "exposure"};
        if (header != expected)
            throw ValidationError("row 1: header must be country,sex,year,age,rate,exposure");
    }

    // (country -> year -> age -> cell) for the requested sex
    std::map<std::string, std::map<int, std::map<int, MortalityCell>>> data;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 6)
            throw ValidationError("row " + std::to_string(row) + ": expected 6 fields");
        const std::string& country = fields[0];
        if (country.empty())
            throw ValidationError("row " + std::to_string(row) + ": empty country code");
        if (fields[1].size() != 1 ||
            (fields[1][0] != 'F' && fields[1][0] != 'M' && fields[1][0] != 'T'))
            throw ValidationError("row " + std::to_string(row) + ": sex must be F, M or T");
        const char sex = fields[1][0];
        const int year = parse_int(fields[2], row, "year");
        const int age = parse_int(fields[3], row, "age");
        const double rate = parse_double(fields[4], row, "rate");
        const double exposure = parse_double(fields[5], row, "exposure");
        if (sex != config.sex) continue;
        if (exposure < 0)
            throw ValidationError("row " + std::to_string(row) + ": negative exposure");
        if (exposure > 0 && !(rate > 0))
            throw ValidationError("row " + std::to_string(row) + ": nonpositive rate for " +
                                  country + " year " + std::to_string(year) + " age " +
                                  std::to_string(age) + " with positive exposure");
        auto& cell = data[country][year][age];
        if (cell.row != 0)
            throw ValidationError("row " + std::to_string(row) + ": duplicate key (" + country +
                                  "," + sex + "," + std::to_string(year) + "," +
                                  std::to_string(age) + ") first seen at row " +
                                  std::to_string(cell.row));
        cell = {rate, exposure, row};
    }
    if (data.empty()) throw ValidationError("no rows for sex " + std::string(1, config.sex));

    const int cap = config.sex == 'F'   ? config.run.aggregate_age_female
                    : config.sex == 'M' ? config.run.aggregate_age_male
                                        : config.run.aggregate_age_total;

    // contiguity and shared year range
    std::vector<int> years;
    int age_min = 0;
    bool first_series = true;
    for (const auto& [country, by_year] : data) {
        std::vector<int> this_years;
        for (const auto& [year, by_age] : by_year) {
            this_years.push_back(year);
            int prev = -1;
            for (const auto& [age, cell] : by_age) {
                (void)cell;
                if (prev >= 0 && age != prev + 1)
                    throw ValidationError("missing age " + std::to_string(prev + 1) + " for " +
                                          country + " year " + std::to_string(year));
                prev = age;
            }
            const int lo = by_age.begin()->first;
            const int hi = by_age.rbegin()->first;
            if (hi < cap)
                throw ValidationError("series " + country + " year " + std::to_string(year) +
                                      " ends at age " + std::to_string(hi) +
                                      " below the aggregation age " + std::to_string(cap));
            if (first_series) {
                age_min = lo;
            } else if (lo != age_min) {
                throw ValidationError("series " + country + " starts at age " +
                                      std::to_string(lo) + ", expected " +
                                      std::to_string(age_min));
            }
            first_series = false;
        }
        for (std::size_t k = 1; k < this_years.size(); ++k)
            if (this_years[k] != this_years[k - 1] + 1)
                throw ValidationError("missing year " + std::to_string(this_years[k - 1] + 1) +
                                      " for " + country);
        if (years.empty())
            years = this_years;
        else if (years != this_years)
            throw ValidationError("year range for " + country +
                                  " differs from the other series");
    }

    const Index j_count = cap - age_min + 1;
    Vector ages(j_count);
    for (Index j = 0; j < j_count; ++j) ages(j) = age_min + static_cast<double>(j);
    const GridPtr grid = make_grid(ages);

    IngestResult out;
    out.years = years;
    out.panel.grid = grid;
    const Index t_count = static_cast<Index>(years.size());

    for (const auto& [country, by_year] : data) {
        RawMortalitySurface surface;
        surface.ages = grid;
        surface.rates.resize(t_count, j_count);
        surface.exposures.resize(t_count, j_count);
        Index t = 0;
        for (const auto& [year, by_age] : by_year) {
            (void)year;
            for (Index j = 0; j + 1 < j_count; ++j) {
                const auto& cell = by_age.at(age_min + static_cast<int>(j));
                surface.rates(t, j) = cell.rate;
                surface.exposures(t, j) = cell.exposure;
            }
            // pool the open age group: rate = sum deaths / sum exposure
            double deaths = 0.0, exposure = 0.0;
            for (const auto& [age, cell] : by_age) {
                if (age < cap) continue;
                deaths += cell.rate * cell.exposure;
                exposure += cell.exposure;
            }
            if (!(exposure > 0))
                throw ValidationError("series " + country + ": zero exposure in the " +
                                      std::to_string(cap) + "+ group");
            surface.rates(t, j_count - 1) = deaths / exposure;
            surface.exposures(t, j_count - 1) = exposure;
            ++t;
        }
        surface.validate();
        SmoothingConfig smoothing;
        smoothing.tau0 = config.run.tau0;
        smoothing.monotone_from = config.run.monotone_from;
        out.panel.labels.push_back(country);
        out.panel.series.push_back(smooth_surface(surface, smoothing));
        out.raw.push_back(std::move(surface));
    }
    out.panel.validate();
    return out;
}

void write_panel_csv(const std::string& path, const FTSPanel& panel,
                     const std::vector<int>& times) {
    panel.validate();
    if (static_cast<Index>(times.size()) != panel.n_times())
        throw std::invalid_argument("write_panel_csv: time label count mismatch");
    std::ostringstream os;
    os << "object,t,x,value\n";
    for (Index i = 0; i < panel.n_objects(); ++i)
        for (Index t = 0; t < panel.n_times(); ++t)
            for (Index j = 0; j < panel.grid->size(); ++j)
                os << panel.labels[static_cast<std::size_t>(i)] << ","
                   << times[static_cast<std::size_t>(t)] << ","
                   << format_double(panel.grid->points()(j)) << ","
                   << format_double(panel.series[static_cast<std::size_t>(i)](j, t)) << "\n";
    write_file(path, os.str());
}

FTSPanel read_panel_csv(const std::string& path, std::vector<int>* times_out) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) throw ValidationError("empty panel file");
    ++row;
    if (split_csv_line(line) != std::vector<std::string>{"object", "t", "x", "value"})
        throw ValidationError("row 1: header must be object,t,x,value");

    std::map<std::string, std::map<int, std::map<double, double>>> data;
    std::vector<std::string> object_order;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4)
            throw ValidationError("row " + std::to_string(row) + ": expected 4 fields");
        const int t = parse_int(fields[1], row, "t");
        const double x = parse_double(fields[2], row, "x");
        const double v = parse_double(fields[3], row, "value");
        if (data.find(fields[0]) == data.end()) object_order.push_back(fields[0]);
        auto& slot = data[fields[0]][t];
        if (slot.count(x))
            throw ValidationError("row " + std::to_string(row) + ": duplicate grid point");
        slot[x] = v;
    }
    if (data.empty()) throw ValidationError("panel file has no data rows");

    const auto& first_obj = data.begin()->second;
    std::vector<int> times;
    for (const auto& [t, curve] : first_obj) {
        (void)curve;
        times.push_back(t);
    }
    std::vector<double> xs;
    for (const auto& [x, v] : first_obj.begin()->second) {
        (void)v;
        xs.push_back(x);
    }
    Vector grid_points(static_cast<Index>(xs.size()));
    for (std::size_t j = 0; j < xs.size(); ++j) grid_points(static_cast<Index>(j)) = xs[j];
    const GridPtr grid = make_grid(grid_points);

    FTSPanel panel;
    panel.grid = grid;
    for (const auto& name : object_order) {
        const auto& by_t = data[name];
        std::vector<int> this_times;
        for (const auto& [t, curve] : by_t) {
            (void)curve;
            this_times.push_back(t);
        }
        if (this_times != times)
            throw ValidationError("object " + name + ": time points differ from other objects");
        Matrix series(grid->size(), static_cast<Index>(times.size()));
        Index t_idx = 0;
        for (const auto& [t, curve] : by_t) {
            (void)t;
            if (static_cast<Index>(curve.size()) != grid->size())
                throw ValidationError("object " + name + ": grid differs across curves");
            Index j = 0;
            for (const auto& [x, v] : curve) {
                if (std::abs(x - grid->points()(j)) > 1e-9)
                    throw ValidationError("object " + name + ": grid differs across curves");
                series(j, t_idx) = v;
                ++j;
            }
            ++t_idx;
        }
        panel.labels.push_back(name);
        panel.series.push_back(std::move(series));
    }
    panel.validate();
    if (times_out) *times_out = times;
    return panel;
}

void write_labels_csv(const std::string& path, const std::vector<std::string>& objects,
                      const std::vector<int>& labels) {
    if (objects.size() != labels.size())
        throw std::invalid_argument("write_labels_csv: length mismatch");
    std::ostringstream os;
    os << "object,label\n";
    for (std::size_t i = 0; i < objects.size(); ++i)
        os << objects[i] << "," << labels[i] << "\n";
    write_file(path, os.str());
}

std::vector<int> read_labels_csv(const std::string& path,
                                 const std::vector<std::string>& objects) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) throw ValidationError("empty labels file");
    ++row;
    if (split_csv_line(line) != std::vector<std::string>{"object", "label"})
        throw ValidationError("row 1: header must be object,label");
    std::map<std::string, int> by_object;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw ValidationError("row " + std::to_string(row) + ": expected 2 fields");
        by_object[fields[0]] = parse_int(fields[1], row, "label");
    }
    std::vector<int> labels;
    for (const auto& name : objects) {
        const auto it = by_object.find(name);
        if (it == by_object.end()) throw ValidationError("labels file missing object " + name);
        labels.push_back(it->second);
    }
    return labels;
}

MortalitySurface read_surface_csv(const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) throw ValidationError("empty surface file");
    ++row;
    if (split_csv_line(line) != std::vector<std::string>{"year", "age", "rate"})
        throw ValidationError("row 1: header must be year,age,rate");
    std::map<int, std::map<int, double>> cells;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw ValidationError("row " + std::to_string(row) + ": expected 3 fields");
        const int year = parse_int(fields[0], row, "year");
        const int age = parse_int(fields[1], row, "age");
        const double rate = parse_double(fields[2], row, "rate");
        if (cells[year].count(age))
            throw ValidationError("row " + std::to_string(row) + ": duplicate (year, age)");
        cells[year][age] = rate;
    }
    if (cells.empty()) throw ValidationError("surface file has no data rows");

    const int year0 = cells.begin()->first;
    const int year1 = cells.rbegin()->first;
    const int age0 = cells.begin()->second.begin()->first;
    const int age1 = cells.begin()->second.rbegin()->first;
    MortalitySurface surface;
    surface.year0 = year0;
    surface.age0 = age0;
    surface.rates.resize(year1 - year0 + 1, age1 - age0 + 1);
    for (int y = year0; y <= year1; ++y) {
        const auto yit = cells.find(y);
        if (yit == cells.end()) throw ValidationError("missing year " + std::to_string(y));
        for (int a = age0; a <= age1; ++a) {
            const auto ait = yit->second.find(a);
            if (ait == yit->second.end())
                throw ValidationError("missing age " + std::to_string(a) + " in year " +
                                      std::to_string(y));
            surface.rates(y - year0, a - age0) = ait->second;
        }
    }
    return surface;
}

void write_surface_csv(const std::string& path, const MortalitySurface& surface) {
    std::ostringstream os;
    os << "year,age,rate\n";
    for (Index y = 0; y < surface.rates.rows(); ++y)
        for (Index a = 0; a < surface.rates.cols(); ++a)
            os << surface.year0 + y << "," << surface.age0 + a << ","
               << format_double(surface.rates(y, a)) << "\n";
    write_file(path, os.str());
}

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw ValidationError("fit document: bad matrix");
    const Index r_count = static_cast<Index>(rows.size());
    const Index c_count = static_cast<Index>(rows[0].size());
    Matrix m(r_count, c_count);
    for (Index r = 0; r < r_count; ++r) {
        if (static_cast<Index>(rows[r].size()) != c_count)
            throw ValidationError("fit document: ragged matrix");
        for (Index c = 0; c < c_count; ++c) m(r, c) = rows[r][c].get<double>();
    }
    return m;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector vector_from_json(const json& arr) {
    Vector v(static_cast<Index>(arr.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = arr[i].get<double>();
    return v;
}

} // namespace

std::string serialize_fit(const PanelModelFit& fit) {
    json doc;
    doc["schema"] = "mftsc-fit-v1";
    doc["grid"] = {{"a", fit.grid->a()}, {"b", fit.grid->b()}, {"n", fit.grid->size()}};
    doc["labels"] = fit.labels;
    doc["counts"] = {{"M", fit.m}, {"N1", fit.n1}, {"N2", fit.n2}};
    doc["config"] = {{"P1", fit.config.share_eta},
                     {"P2", fit.config.share_r},
                     {"P3", fit.config.share_u},
                     {"flat_top_k", fit.config.flat_top_k},
                     {"bandwidth_r", fit.config.bandwidth_r},
                     {"bandwidth_u", fit.config.bandwidth_u},
                     {"eta_divisor", fit.config.eta_divisor}};
    doc["mu"] = vector_to_json(fit.decomposition.mu.values);
    doc["eta"] = matrix_to_json(fit.decomposition.eta);
    doc["r"] = matrix_to_json(fit.decomposition.r);
    doc["eta_values"] = vector_to_json(fit.eta_basis.eigenvalues);
    doc["r_values"] = vector_to_json(fit.r_basis.eigenvalues);
    doc["u_values"] = vector_to_json(fit.u_basis.eigenvalues);
    doc["phi"] = matrix_to_json(fit.eta_basis.eigenfunctions.leftCols(fit.m));
    doc["rho"] = matrix_to_json(fit.r_basis.eigenfunctions.leftCols(fit.n1));
    doc["psi"] = matrix_to_json(fit.u_basis.eigenfunctions.leftCols(fit.n2));
    doc["gamma"] = matrix_to_json(fit.gamma);
    doc["xi"] = matrix_to_json(fit.xi);
    json zetas = json::array();
    for (const auto& z : fit.zeta) zetas.push_back(matrix_to_json(z));
    doc["zeta"] = std::move(zetas);
    doc["q"] = matrix_to_json(fit.q);
    return doc.dump();
}

PanelModelFit deserialize_fit(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("fit parse error: ") + e.what());
    }
    if (doc.value("schema", "") != "mftsc-fit-v1")
        throw ValidationError("fit document: unknown schema");

    PanelModelFit fit;
    fit.grid = make_uniform_grid(doc["grid"]["n"].get<Index>(), doc["grid"]["a"].get<double>(),
                                 doc["grid"]["b"].get<double>());
    fit.labels = doc["labels"].get<std::vector<std::string>>();
    fit.m = doc["counts"]["M"].get<Index>();
    fit.n1 = doc["counts"]["N1"].get<Index>();
    fit.n2 = doc["counts"]["N2"].get<Index>();
    fit.config.share_eta = doc["config"]["P1"].get<double>();
    fit.config.share_r = doc["config"]["P2"].get<double>();
    fit.config.share_u = doc["config"]["P3"].get<double>();
    fit.config.flat_top_k = doc["config"]["flat_top_k"].get<double>();
    fit.config.bandwidth_r = doc["config"]["bandwidth_r"].get<double>();
    fit.config.bandwidth_u = doc["config"]["bandwidth_u"].get<double>();
    fit.config.eta_divisor = doc["config"]["eta_divisor"].get<std::string>();

    fit.decomposition.mu = GridFunction(fit.grid, vector_from_json(doc["mu"]));
    fit.decomposition.eta = matrix_from_json(doc["eta"]);
    fit.decomposition.r = matrix_from_json(doc["r"]);

    fit.eta_basis.grid = fit.grid;
    fit.eta_basis.eigenvalues = vector_from_json(doc["eta_values"]).head(fit.m);
    fit.eta_basis.eigenfunctions = matrix_from_json(doc["phi"]);
    fit.r_basis.grid = fit.grid;
    fit.r_basis.eigenvalues = vector_from_json(doc["r_values"]).head(fit.n1);
    fit.r_basis.eigenfunctions = matrix_from_json(doc["rho"]);
    fit.u_basis.grid = fit.grid;
    fit.u_basis.eigenvalues = vector_from_json(doc["u_values"]).head(fit.n2);
    fit.u_basis.eigenfunctions = matrix_from_json(doc["psi"]);

    fit.gamma = matrix_from_json(doc["gamma"]);
    fit.xi = matrix_from_json(doc["xi"]);
    for (const auto& z : doc["zeta"]) fit.zeta.push_back(matrix_from_json(z));
    fit.q = matrix_from_json(doc["q"]);
    return fit;
}

} // namespace mftsc
