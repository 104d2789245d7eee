#ifndef PHFIT_IO_HPP
#define PHFIT_IO_HPP

#include <string>
#include <vector>

#include "json.hpp"
#include "phfit/objective.hpp"
#include "phfit/optimizer.hpp"
#include "phfit/sampler.hpp"

namespace phfit {

using json = nlohmann::json;

// JSON document forms. Serialized doubles round-trip exactly (shortest
// representation that parses back to the same value).
json to_json(const MarkovianPH& ph);
json to_json(const FitParams& params);
json to_json(const FitTarget& target);
json to_json(const FitResult& result);
json to_json(const SampleSpec& spec);

MarkovianPH ph_from_json(const json& j);
FitParams params_from_json(const json& j);
FitTarget target_from_json(const json& j);
SampleSpec sample_spec_from_json(const json& j);

// Applies the fields present in j onto config (partial documents allowed).
void apply_config_json(const json& j, FitConfig& config);

json load_json_file(const std::string& path);  // std::runtime_error with diagnostics
void write_json_file(const std::string& path, const json& j);

// Delimiter-separated tables (comma; no quoting — cells must not contain
// commas). Numbers are written with 17 significant digits.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    static std::string cell(double value);
};

void write_table(const std::string& path, const Table& table);
Table read_table(const std::string& path);

// Test-set archive: manifest.json + instance_NNNN.json + moments.csv.
void write_testset(const std::string& dir, const SampleSpec& spec,
                   const std::vector<TestInstance>& instances);
std::vector<TestInstance> read_testset(const std::string& dir);

}  // namespace phfit

#endif
