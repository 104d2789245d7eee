#include "phfit/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "phfit/errors.hpp"

namespace phfit {

namespace {

json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Vector vector_from_json(const json& j, const char* field) {
    if (!j.is_array()) throw std::runtime_error(std::string(field) + ": expected an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw std::runtime_error(std::string(field) + "[" + std::to_string(i) +
                                     "]: expected a number");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Matrix matrix_from_json(const json& j, const char* field) {
    if (!j.is_array() || j.empty())
        throw std::runtime_error(std::string(field) + ": expected an array of rows");
    const size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw std::runtime_error(std::string(field) + ": ragged rows");
        for (size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
    }
    return m;
}

const json& require(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end()) throw std::runtime_error(std::string("missing field '") + field + "'");
    return *it;
}

}  // namespace

json to_json(const MarkovianPH& ph) {
    return {{"n", ph.n()}, {"alpha", vector_to_json(ph.alpha)}, {"T", matrix_to_json(ph.T)}};
}

MarkovianPH ph_from_json(const json& j) {
    MarkovianPH ph;
    ph.alpha = vector_from_json(require(j, "alpha"), "alpha");
    ph.T = matrix_from_json(require(j, "T"), "T");
    if (j.contains("n") && j["n"].get<int>() != ph.n())
        throw std::runtime_error("ph document: n does not match alpha length");
    if (ph.T.rows() != ph.n() || ph.T.cols() != ph.n())
        throw std::runtime_error("ph document: T must be n x n");
    return ph;
}

json to_json(const FitParams& params) {
    json j;
    j["structure"] = to_string(structure_of(params));
    if (const auto* g = std::get_if<GeneralParams>(&params)) {
        j["a"] = vector_to_json(g->a);
        j["gamma"] = vector_to_json(g->gamma);
        j["Z"] = matrix_to_json(g->Z);
    } else if (const auto* c = std::get_if<CoxianParams>(&params)) {
        j["gamma"] = vector_to_json(c->gamma);
        j["u"] = vector_to_json(c->u);
    } else {
        const auto& h = std::get<HyperErlangParams>(params);
        j["beta"] = vector_to_json(h.beta);
        j["delta"] = vector_to_json(h.delta);
        j["blocks"] = h.blocks;
    }
    return j;
}

FitParams params_from_json(const json& j) {
    const Structure s = structure_from_string(require(j, "structure").get<std::string>());
    switch (s) {
        case Structure::General: {
            GeneralParams g;
            g.a = vector_from_json(require(j, "a"), "a");
            g.gamma = vector_from_json(require(j, "gamma"), "gamma");
            g.Z = matrix_from_json(require(j, "Z"), "Z");
            return g;
        }
        case Structure::Coxian: {
            CoxianParams c;
            c.gamma = vector_from_json(require(j, "gamma"), "gamma");
            c.u = vector_from_json(require(j, "u"), "u");
            return c;
        }
        case Structure::HyperErlang: {
            HyperErlangParams h;
            h.beta = vector_from_json(require(j, "beta"), "beta");
            h.delta = vector_from_json(require(j, "delta"), "delta");
            h.blocks = require(j, "blocks").get<std::vector<int>>();
            return h;
        }
    }
    throw std::runtime_error("unreachable structure");
}

json to_json(const FitTarget& target) {
    json j;
    j["moments"] = vector_to_json(target.moments);
    j["weights"] = vector_to_json(target.weights);
    if (!target.cdf_points.empty()) {
        json pts = json::array();
        for (const auto& [x, y] : target.cdf_points) pts.push_back({x, y});
        j["cdf_points"] = std::move(pts);
        j["Q"] = target.Q;
    }
    if (target.cdf_weights.size()) j["cdf_weights"] = vector_to_json(target.cdf_weights);
    if (!target.pdf_points.empty()) {
        json pts = json::array();
        for (const auto& [x, y] : target.pdf_points) pts.push_back({x, y});
        j["pdf_points"] = std::move(pts);
        j["Q"] = target.Q;
    }
    return j;
}

FitTarget target_from_json(const json& j) {
    FitTarget t;
    t.moments = vector_from_json(require(j, "moments"), "moments");
    t.weights = j.contains("weights") ? vector_from_json(j["weights"], "weights")
                                      : default_weights(t.moments);
    auto read_points = [&](const char* field) {
        std::vector<std::pair<double, double>> pts;
        if (!j.contains(field)) return pts;
        for (const auto& p : j[field]) {
            if (!p.is_array() || p.size() != 2)
                throw std::runtime_error(std::string(field) + ": expected [x, y] pairs");
            pts.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        return pts;
    };
    t.cdf_points = read_points("cdf_points");
    t.pdf_points = read_points("pdf_points");
    if (j.contains("cdf_weights")) t.cdf_weights = vector_from_json(j["cdf_weights"], "cdf_weights");
    if (j.contains("Q")) t.Q = j["Q"].get<double>();
    t.check();
    return t;
}

json to_json(const FitResult& result) {
    json j;
    j["ph"] = to_json(result.ph);
    j["params"] = to_json(result.params);
    j["final_loss"] = result.final_loss;
    j["per_moment_mape"] = vector_to_json(result.per_moment_mape);
    j["epochs_run"] = result.epochs_run;
    j["candidates_evaluated"] = result.candidates_evaluated;
    j["wall_time"] = result.wall_time;
    j["stop_reason"] = result.stop_reason;
    return j;
}

json to_json(const SampleSpec& spec) {
    return {{"family", to_string(spec.family)},
            {"size_range", {spec.size_min, spec.size_max}},
            {"count", spec.count},
            {"seed", spec.seed},
            {"moment_count", spec.moment_count}};
}

SampleSpec sample_spec_from_json(const json& j) {
    SampleSpec s;
    s.family = structure_from_string(require(j, "family").get<std::string>());
    if (j.contains("size_range")) {
        const auto& r = j["size_range"];
        if (!r.is_array() || r.size() != 2)
            throw std::runtime_error("size_range: expected [min, max]");
        s.size_min = r[0].get<int>();
        s.size_max = r[1].get<int>();
    }
    if (j.contains("count")) s.count = j["count"].get<int>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("moment_count")) s.moment_count = j["moment_count"].get<int>();
    s.check();
    return s;
}

void apply_config_json(const json& j, FitConfig& config) {
    if (j.contains("structure"))
        config.structure = structure_from_string(j["structure"].get<std::string>());
    if (j.contains("n")) config.n = j["n"].get<int>();
    if (j.contains("blocks")) config.blocks = j["blocks"].get<std::vector<int>>();
    if (j.contains("population")) config.population = j["population"].get<int>();
    if (j.contains("max_epochs")) config.max_epochs = j["max_epochs"].get<int>();
    if (j.contains("epsilon")) config.epsilon = j["epsilon"].get<double>();
    if (j.contains("step_size")) config.step_size = j["step_size"].get<double>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) config.workers = j["workers"].get<int>();
    if (j.contains("schedule")) {
        config.schedule.clear();
        for (const auto& e : j["schedule"]) {
            if (!e.is_array() || e.size() != 2)
                throw std::runtime_error("schedule: expected [step, keep] pairs");
            config.schedule.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
    }
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("parse error in '" + path + "': " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

void Table::add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

std::string Table::cell(double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    return os.str();
}

void write_table(const std::string& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

void write_testset(const std::string& dir, const SampleSpec& spec,
                   const std::vector<TestInstance>& instances) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    json manifest;
    manifest["spec"] = to_json(spec);
    manifest["seed"] = spec.seed;
    manifest["instances"] = instances.size();
    write_json_file((fs::path(dir) / "manifest.json").string(), manifest);

    Table moments_table;
    moments_table.header.push_back("id");
    for (int k = 1; k <= spec.moment_count; ++k)
        moments_table.header.push_back("m_" + std::to_string(k));

    for (const auto& inst : instances) {
        char name[32];
        std::snprintf(name, sizeof(name), "instance_%04d.json", inst.id);
        json j = to_json(inst.ph);
        j["id"] = inst.id;
        j["moments"] = [&] {
            json a = json::array();
            for (Eigen::Index i = 0; i < inst.moments.size(); ++i) a.push_back(inst.moments(i));
            return a;
        }();
        write_json_file((fs::path(dir) / name).string(), j);

        std::vector<std::string> row{std::to_string(inst.id)};
        for (Eigen::Index i = 0; i < inst.moments.size(); ++i)
            row.push_back(Table::cell(inst.moments(i)));
        moments_table.add_row(std::move(row));
    }
    write_table((fs::path(dir) / "moments.csv").string(), moments_table);
}

std::vector<TestInstance> read_testset(const std::string& dir) {
    namespace fs = std::filesystem;
    const json manifest = load_json_file((fs::path(dir) / "manifest.json").string());
    const int count = manifest.at("instances").get<int>();
    std::vector<TestInstance> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "instance_%04d.json", i);
        const json j = load_json_file((fs::path(dir) / name).string());
        TestInstance inst;
        inst.id = j.at("id").get<int>();
        inst.ph = ph_from_json(j);
        inst.n = inst.ph.n();
        inst.moments = vector_from_json(j.at("moments"), "moments");
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace phfit
