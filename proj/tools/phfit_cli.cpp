// phfit: moment / shape fitting of phase-type distributions, test-set
// sampling, batch evaluation, and a PH/PH/1 queue case study.
//
// Subcommands: fit, shape-fit, sample, eval, queue. Models, targets, and
// configurations are JSON documents; result tables are comma-separated text.
// Progress goes to stderr, data to files. Exit codes: 0 success, 1 fit above
// threshold, 2 input/parse error, 3 optimizer failure, 4 unstable queue.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phfit/errors.hpp"
#include "phfit/io.hpp"
#include "phfit/metrics.hpp"
#include "phfit/qbd.hpp"

using namespace phfit;

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;

struct FitFlags {
    std::string target_path;
    std::string config_path;
    std::string out_path = "fit_result.json";
    std::string mape_path;
    std::string structure = "hyper-erlang";
    int n = 20;
    std::vector<int> blocks;
    int population = 10000;
    int max_epochs = 125000;
    double epsilon = 1e-9;
    double step_size = 0.01;
    double Q = -1.0;  // <0: keep the target document's value
    std::uint64_t seed = kDefaultSeed;
    int workers = 0;
    double eta = 1.0;  // percent
    int progress_every = 0;
};

void add_fit_options(CLI::App* cmd, FitFlags& f, bool shape) {
    cmd->add_option("--target", f.target_path, "fit target document (JSON)")->required();
    cmd->add_option("--config", f.config_path, "optimizer configuration document (JSON)");
    cmd->add_option("--out", f.out_path, "fit result document to write");
    cmd->add_option("--mape-out", f.mape_path, "per-moment MAPE table to write (CSV)");
    cmd->add_option("--structure", f.structure, "general | coxian | hyper-erlang");
    cmd->add_option("--n", f.n, "phase count");
    cmd->add_option("--blocks", f.blocks, "hyper-erlang block sizes")->delimiter(',');
    cmd->add_option("--population", f.population, "number of starting points");
    cmd->add_option("--max-epochs", f.max_epochs, "epoch budget");
    cmd->add_option("--epsilon", f.epsilon, "loss stop threshold");
    cmd->add_option("--step-size", f.step_size, "gradient step size");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--workers", f.workers, "worker cap (0 = hardware)");
    cmd->add_option("--eta", f.eta, "success threshold on max MAPE, percent");
    cmd->add_option("--progress-every", f.progress_every,
                    "log epoch,best_loss,live_candidates to stderr every N epochs");
    if (shape) cmd->add_option("--Q", f.Q, "trade-off weight for the shape term");
}

// Config file first, then any flag passed on the command line overrides it.
FitConfig config_from_flags(const CLI::App* cmd, const FitFlags& f) {
    FitConfig c;
    c.seed = kDefaultSeed;
    const bool have_file = !f.config_path.empty();
    if (have_file) apply_config_json(load_json_file(f.config_path), c);
    auto passed = [&](const std::string& name) {
        const CLI::Option* opt = cmd->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (passed("--structure") || !have_file) c.structure = structure_from_string(f.structure);
    if (passed("--n") || !have_file) c.n = f.n;
    if (passed("--blocks")) c.blocks = f.blocks;
    if (passed("--population") || !have_file) c.population = f.population;
    if (passed("--max-epochs") || !have_file) c.max_epochs = f.max_epochs;
    if (passed("--epsilon") || !have_file) c.epsilon = f.epsilon;
    if (passed("--step-size") || !have_file) c.step_size = f.step_size;
    if (passed("--seed") || !have_file) c.seed = f.seed;
    if (passed("--workers") || !have_file) c.workers = f.workers;
    if (f.progress_every > 0) {
        c.progress_every = f.progress_every;
        c.progress = [](int epoch, double best, int live) {
            std::cerr << epoch << "," << best << "," << live << "\n";
        };
    }
    return c;
}

void write_mape_table(const std::string& path, const FitTarget& target, const FitResult& r) {
    const MomentVector fitted = moments(r.ph, target.l());
    Table t;
    t.header = {"i", "target", "fitted", "mape_percent"};
    for (int k = 0; k < target.l(); ++k)
        t.add_row({std::to_string(k + 1), Table::cell(target.moments(k)), Table::cell(fitted(k)),
                   Table::cell(r.per_moment_mape(k))});
    write_table(path, t);
}

int run_fit(const CLI::App* cmd, const FitFlags& flags, const std::string& reference_path) {
    FitTarget target;
    FitConfig config;
    MarkovianPH reference;
    const bool with_reference = !reference_path.empty();
    try {
        target = target_from_json(load_json_file(flags.target_path));
        if (flags.Q >= 0.0) target.Q = flags.Q;
        config = config_from_flags(cmd, flags);
        if (with_reference) reference = ph_from_json(load_json_file(reference_path));
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    }

    FitResult result;
    try {
        result = fit(target, config);
    } catch (const std::exception& e) {
        std::cerr << "optimizer failure: " << e.what() << "\n";
        return 3;
    }

    json out = to_json(result);
    double kl = -1.0;
    if (with_reference) {
        kl = kl_divergence(reference, result.ph);
        out["kl_to_reference"] = kl;
    }
    write_json_file(flags.out_path, out);
    if (!flags.mape_path.empty()) write_mape_table(flags.mape_path, target, result);

    const double max_mape = result.per_moment_mape.maxCoeff();
    std::cout << "loss=" << result.final_loss << " epochs=" << result.epochs_run
              << " max_mape=" << max_mape << "% stop=" << result.stop_reason;
    if (with_reference) std::cout << " kl=" << kl;
    std::cout << "\n";
    return max_mape <= flags.eta ? 0 : 1;
}

int run_sample(const std::string& spec_path, SampleSpec spec, const std::string& out_dir) {
    try {
        if (!spec_path.empty()) spec = sample_spec_from_json(load_json_file(spec_path));
        spec.check();
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    }
    const auto set = generate_testset(spec);
    write_testset(out_dir, spec, set);
    std::cout << "wrote " << set.size() << " instances to " << out_dir << "\n";
    return 0;
}

int run_eval(const std::string& testset_dir, const std::vector<std::string>& structures,
             const std::vector<int>& sizes, const std::vector<int>& moment_counts,
             const FitFlags& flags, const CLI::App* cmd, const std::string& report_path,
             const std::string& summary_path) {
    std::vector<TestInstance> instances;
    FitConfig base;
    try {
        instances = read_testset(testset_dir);
        base = config_from_flags(cmd, flags);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    }

    Table report;
    report.header = {"instance",    "family",      "n",           "l",        "max_mape",
                     "success@0.2", "success@0.5", "success@1.0", "wall_time"};
    Table summary;
    summary.header = {"family",      "n",              "l",         "success@0.2", "success@0.5",
                      "success@1.0", "mean_wall_time", "instances"};

    for (const auto& structure : structures) {
        for (int n : sizes) {
            for (int l : moment_counts) {
                FitConfig config = base;
                config.structure = structure_from_string(structure);
                config.n = n;
                config.blocks.clear();
                std::vector<EvalRecord> records;
                for (const auto& inst : instances) {
                    try {
                        const MomentVector m = inst.moments.head(l);
                        const FitResult r = fit(target_from_moments(m), config);
                        const EvalRecord rec = make_eval_record(std::to_string(inst.id), m,
                                                                moments(r.ph, l), r.wall_time);
                        records.push_back(rec);
                        report.add_row({std::to_string(inst.id), structure, std::to_string(n),
                                        std::to_string(l), Table::cell(rec.max_mape),
                                        rec.max_mape <= 0.2 ? "1" : "0",
                                        rec.max_mape <= 0.5 ? "1" : "0",
                                        rec.max_mape <= 1.0 ? "1" : "0",
                                        Table::cell(rec.wall_time)});
                    } catch (const std::exception& e) {
                        std::cerr << "cell (" << structure << ", n=" << n << ", l=" << l
                                  << ", instance " << inst.id << ") failed: " << e.what() << "\n";
                        report.add_row({std::to_string(inst.id), structure, std::to_string(n),
                                        std::to_string(l), "nan", "0", "0", "0", "nan"});
                    }
                }
                if (!records.empty()) {
                    double wall = 0.0;
                    for (const auto& r : records) wall += r.wall_time;
                    summary.add_row({structure, std::to_string(n), std::to_string(l),
                                     Table::cell(success_rate(records, 0.2)),
                                     Table::cell(success_rate(records, 0.5)),
                                     Table::cell(success_rate(records, 1.0)),
                                     Table::cell(wall / records.size()),
                                     std::to_string(records.size())});
                }
            }
        }
    }
    write_table(report_path, report);
    if (!summary_path.empty()) write_table(summary_path, summary);
    std::cout << "wrote " << report.rows.size() << " rows to " << report_path << "\n";
    return 0;
}

int run_queue(const std::string& arrival_path, const std::string& service_path,
              const std::vector<int>& l_values, int k_max, const FitFlags& flags,
              const CLI::App* cmd, const std::string& prefix) {
    MarkovianPH arrival, service;
    FitConfig config;
    try {
        arrival = ph_from_json(load_json_file(arrival_path));
        service = ph_from_json(load_json_file(service_path));
        config = config_from_flags(cmd, flags);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    }

    const QbdModel model = QbdModel::make(arrival, service);
    if (!(model.rho < 1.0)) {
        std::cerr << "unstable queue: utilization rho = " << model.rho << " >= 1\n";
        return 4;
    }
    const QueueStudyResult study = queue_study(arrival, service, l_values, config, k_max);
    for (const auto& [l, what] : study.failures)
        std::cerr << "l=" << l << " failed: " << what << "\n";

    Table pmf;
    pmf.header = {"k", "p_true"};
    for (int l : l_values)
        if (study.p_hat.count(l)) pmf.header.push_back("p_hat_l" + std::to_string(l));
    for (int k = 0; k <= k_max; ++k) {
        std::vector<std::string> row{std::to_string(k),
                                     Table::cell(study.p_true[static_cast<size_t>(k)])};
        for (int l : l_values)
            if (study.p_hat.count(l))
                row.push_back(Table::cell(study.p_hat.at(l)[static_cast<size_t>(k)]));
        pmf.add_row(std::move(row));
    }
    write_table(prefix + "_pmf.csv", pmf);

    Table accerr;
    accerr.header = {"j"};
    for (int l : l_values)
        if (study.accumulated.count(l)) accerr.header.push_back("accerr_l" + std::to_string(l));
    for (int j = 0; j <= k_max; ++j) {
        std::vector<std::string> row{std::to_string(j)};
        for (int l : l_values)
            if (study.accumulated.count(l))
                row.push_back(Table::cell(study.accumulated.at(l)[static_cast<size_t>(j)]));
        accerr.add_row(std::move(row));
    }
    write_table(prefix + "_accerr.csv", accerr);

    std::cout << "rho=" << model.rho << " wrote " << prefix << "_pmf.csv and " << prefix
              << "_accerr.csv\n";
    return study.failures.empty() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase-type distribution fitting toolkit"};
    app.require_subcommand(1);

    FitFlags fit_flags;
    CLI::App* cmd_fit = app.add_subcommand("fit", "fit a PH to target moments");
    add_fit_options(cmd_fit, fit_flags, false);

    FitFlags shape_flags;
    CLI::App* cmd_shape = app.add_subcommand("shape-fit", "fit moments plus CDF shape points");
    add_fit_options(cmd_shape, shape_flags, true);
    std::string reference_path;
    cmd_shape->add_option("--reference", reference_path,
                          "reference PH document for a KL divergence report");

    CLI::App* cmd_sample = app.add_subcommand("sample", "generate a PH test-set archive");
    std::string spec_path, sample_out = "testset";
    SampleSpec sample_spec;
    sample_spec.seed = kDefaultSeed;
    std::string sample_family = "coxian";
    cmd_sample->add_option("--spec", spec_path, "sample spec document (JSON)");
    cmd_sample->add_option("--family", sample_family, "general | coxian | hyper-erlang");
    cmd_sample->add_option("--count", sample_spec.count, "number of instances");
    cmd_sample->add_option("--size-min", sample_spec.size_min, "minimum PH size");
    cmd_sample->add_option("--size-max", sample_spec.size_max, "maximum PH size");
    cmd_sample->add_option("--seed", sample_spec.seed, "random seed");
    cmd_sample->add_option("--moments", sample_spec.moment_count, "moments per instance");
    cmd_sample->add_option("--out", sample_out, "output directory");

    CLI::App* cmd_eval = app.add_subcommand("eval", "fit a test set across a (family, n, l) grid");
    FitFlags eval_flags;
    std::string testset_dir, report_path = "report.csv", summary_path = "summary.csv";
    std::vector<std::string> structures{"hyper-erlang"};
    std::vector<int> sizes{20};
    std::vector<int> moment_counts{5};
    cmd_eval->add_option("--testset", testset_dir, "test-set archive directory")->required();
    cmd_eval->add_option("--structures", structures, "families to fit with")->delimiter(',');
    cmd_eval->add_option("--sizes", sizes, "PH sizes n")->delimiter(',');
    cmd_eval->add_option("--moment-counts", moment_counts, "moment counts l")->delimiter(',');
    cmd_eval->add_option("--out", report_path, "per-instance report (CSV)");
    cmd_eval->add_option("--summary-out", summary_path, "per-cell summary (CSV)");
    cmd_eval->add_option("--config", eval_flags.config_path, "optimizer configuration (JSON)");
    cmd_eval->add_option("--population", eval_flags.population, "number of starting points");
    cmd_eval->add_option("--max-epochs", eval_flags.max_epochs, "epoch budget");
    cmd_eval->add_option("--epsilon", eval_flags.epsilon, "loss stop threshold");
    cmd_eval->add_option("--step-size", eval_flags.step_size, "gradient step size");
    cmd_eval->add_option("--seed", eval_flags.seed, "random seed");
    cmd_eval->add_option("--workers", eval_flags.workers, "worker cap (0 = hardware)");

    CLI::App* cmd_queue = app.add_subcommand("queue", "PH/PH/1 case study tables");
    FitFlags queue_flags;
    std::string arrival_path, service_path, prefix = "queue_study";
    std::vector<int> l_values{2, 3, 4, 5};
    int k_max = 50;
    cmd_queue->add_option("--arrival", arrival_path, "arrival PH document")->required();
    cmd_queue->add_option("--service", service_path, "service PH document")->required();
    cmd_queue->add_option("--l", l_values, "moment counts to fit")->delimiter(',');
    cmd_queue->add_option("--k-max", k_max, "largest queue length reported");
    cmd_queue->add_option("--out-prefix", prefix, "output table prefix");
    cmd_queue->add_option("--config", queue_flags.config_path, "optimizer configuration (JSON)");
    cmd_queue->add_option("--structure", queue_flags.structure, "fit family");
    cmd_queue->add_option("--n", queue_flags.n, "fit phase count");
    cmd_queue->add_option("--blocks", queue_flags.blocks, "hyper-erlang blocks")->delimiter(',');
    cmd_queue->add_option("--population", queue_flags.population, "number of starting points");
    cmd_queue->add_option("--max-epochs", queue_flags.max_epochs, "epoch budget");
    cmd_queue->add_option("--epsilon", queue_flags.epsilon, "loss stop threshold");
    cmd_queue->add_option("--step-size", queue_flags.step_size, "gradient step size");
    cmd_queue->add_option("--seed", queue_flags.seed, "random seed");
    cmd_queue->add_option("--workers", queue_flags.workers, "worker cap (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_fit->parsed()) return run_fit(cmd_fit, fit_flags, "");
        if (cmd_shape->parsed()) return run_fit(cmd_shape, shape_flags, reference_path);
        if (cmd_sample->parsed()) {
            sample_spec.family = structure_from_string(sample_family);
            return run_sample(spec_path, sample_spec, sample_out);
        }
        if (cmd_eval->parsed())
            return run_eval(testset_dir, structures, sizes, moment_counts, eval_flags, cmd_eval,
                            report_path, summary_path);
        if (cmd_queue->parsed())
            return run_queue(arrival_path, service_path, l_values, k_max, queue_flags, cmd_queue,
                             prefix);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
