// fter: run, simulate, evaluate and serve entity-resolution experiments.
#include "fter/config.hpp"
#include "fter/task_service.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>

using namespace fter;

namespace {

constexpr int exit_config = 1;
constexpr int exit_data = 2;

HttpFrontend* g_http = nullptr;

void on_signal(int) {
    if (g_http) g_http->stop();
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

void summarize(const ExperimentResult& result) {
    double cost = 0;
    for (const auto& r : result.runs) cost += static_cast<double>(r.cost);
    cost /= static_cast<double>(result.runs.size());
    std::cerr << "runs " << result.runs.size() << "  mean cost " << cost;
    if (!result.mean_trace.empty()) {
        const auto& m = result.mean_trace.back();
        std::cerr << "  precision " << m.precision << "  recall " << m.recall << "  f " << m.f_measure;
    }
    std::cerr << '\n';
}

void emit(const ExperimentResult& result, const std::optional<std::filesystem::path>& trace_out,
          const std::optional<std::filesystem::path>& clustering_out, const VotesGraph& graph) {
    if (trace_out) {
        auto out = open_out(*trace_out);
        write_trace_tsv(out, result.mean_trace);
    } else {
        write_trace_tsv(std::cout, result.mean_trace);
    }
    if (clustering_out) {
        auto out = open_out(*clustering_out);
        write_clustering_csv(out, graph, result.runs.front().clustering);
    }
    summarize(result);
}

int cmd_run(const std::filesystem::path& config_path) {
    const auto config = load_run_config(config_path);
    if (config.live) throw ConfigError("crowd 'live' is served over HTTP; use the serve command");
    const auto data = load_dataset(config);
    const auto result = run_experiment(data, config.experiment);
    emit(result, config.trace_out, config.clustering_out, data.graph);
    return 0;
}

struct SimulateArgs {
    SyntheticSpec spec;
    ExperimentConfig experiment;
    std::string strategy{"hs"}, discipline{"fer"}, mode{"seq"}, execution{"parallel"};
    std::optional<std::filesystem::path> out, clustering;
};

int cmd_simulate(SimulateArgs a) {
    auto& e = a.experiment.engine;
    e.strategy = parse_strategy(a.strategy);
    e.discipline.mode = parse_discipline(a.discipline);
    if (a.mode != "seq" && a.mode != "par") throw ConfigError("unknown mode '" + a.mode + "' (seq|par)");
    e.batched = a.mode == "par";
    e.execution = parse_execution(a.execution);
    e.seed = a.spec.seed;
    a.experiment.noise.seed = a.spec.seed + 1;
    a.experiment.crowd = CrowdKind::synthetic;
    const auto data = make_synthetic_dataset(a.spec);
    const auto result = run_experiment(data, a.experiment);
    emit(result, a.out, a.clustering, data.graph);
    return 0;
}

int cmd_evaluate(const std::filesystem::path& clustering_path, const std::filesystem::path& truth_path) {
    VotesGraph graph;
    const auto truth = load_truth(truth_path, graph);
    const auto n = graph.num_records();
    // a clustering file has the same two-column shape as a truth file
    const auto labels = load_truth(clustering_path, graph);
    if (graph.num_records() != n)
        throw DataError(clustering_path.string() + " names record '" + graph.record(n).id + "' absent from " +
                        truth_path.string());
    std::vector<std::vector<RecordIndex>> groups(labels.entity_names.size());
    std::vector<RecordIndex> all(n);
    for (RecordIndex r = 0; r < n; ++r) {
        groups[labels.entity_of[r]].push_back(r);
        all[r] = r;
    }
    Clustering clustering(n);
    clustering.replace(all, groups);
    const auto m = pairwise_metrics(clustering, truth.entity_of);
    std::cout << "records\t" << n << "\nclusters\t" << clustering.num_clusters() << "\nentities\t"
              << truth.entity_names.size() << "\nprecision\t" << m.precision << "\nrecall\t" << m.recall << "\nf\t"
              << m.f_measure << '\n';
    return 0;
}

struct ServeArgs {
    std::filesystem::path config;
    std::string host{"127.0.0.1"};
    int port{8080};
    std::size_t max_outstanding{16};
    long ttl_secs{300};
    std::optional<std::filesystem::path> static_dir;
};

int cmd_serve(const ServeArgs& a) {
    const auto config = load_run_config(a.config);
    const auto data = load_dataset(config);
    auto engine = make_engine(data, config.experiment);
    if (!config.live) {
        // run the configured crowd to completion and serve its final status
        auto crowd = make_crowd(data, config.experiment, engine);
        run_once(engine, *crowd, config.experiment.max_cost);
    }
    ServiceOptions options;
    options.max_outstanding = a.max_outstanding;
    options.task_ttl = std::chrono::seconds(a.ttl_secs);
    options.live = config.live;
    TaskService service(std::move(engine), options);
    HttpFrontend http(service, a.static_dir);
    const int port = http.bind(a.host, a.port);
    std::cerr << "serving " << data.graph.num_records() << " records on http://" << a.host << ':' << port
              << (config.live ? "" : " (status only)") << '\n';
    g_http = &http;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    http.run();
    g_http = nullptr;
    std::cerr << service.status().body << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Crowdsourced entity resolution"};
    app.require_subcommand(1);

    std::filesystem::path run_config;
    auto* run = app.add_subcommand("run", "run an experiment described by a JSON config");
    run->add_option("--config", run_config, "config file")->required()->check(CLI::ExistingFile);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run on a synthetic dataset with a noisy synthetic crowd");
    simulate->add_option("--records", sim.spec.num_records, "number of records")->capture_default_str();
    simulate->add_option("--entities", sim.spec.num_entities, "number of entities")->capture_default_str();
    bool uniform = false;
    simulate->add_flag("--zipf", sim.spec.zipf, "zipf entity sizes (default)");
    simulate->add_flag("--uniform", uniform, "uniform entity sizes");
    simulate->add_option("--exponent", sim.spec.exponent, "zipf exponent")->capture_default_str();
    simulate->add_option("--fp", sim.experiment.noise.false_positive, "false positive rate")->capture_default_str();
    simulate->add_option("--fn", sim.experiment.noise.false_negative, "false negative rate")->capture_default_str();
    simulate->add_option("--strategy", sim.strategy, "ers|urs|hs")->capture_default_str();
    simulate->add_option("--discipline", sim.discipline, "cer|fer|feer")->capture_default_str();
    simulate->add_option("--mode", sim.mode, "seq|par")->capture_default_str();
    simulate->add_option("--execution", sim.execution, "serial|parallel")->capture_default_str();
    simulate->add_option("--quorum", sim.experiment.engine.discipline.quorum, "vote margin q")->capture_default_str();
    simulate->add_option("--edge-budget", sim.experiment.engine.discipline.edge_budget, "votes per pair")
        ->capture_default_str();
    simulate->add_option("--seed", sim.spec.seed, "seed")->capture_default_str();
    simulate->add_option("--reps", sim.experiment.repetitions, "repetitions")->capture_default_str();
    simulate->add_option("--max-cost", sim.experiment.max_cost, "stop each run after this many votes");
    simulate->add_option("--out", sim.out, "trace TSV (default stdout)");
    simulate->add_option("--clustering", sim.clustering, "clustering CSV of the first run");

    std::filesystem::path eval_clustering, eval_truth;
    auto* evaluate = app.add_subcommand("evaluate", "pairwise precision, recall and F of a clustering");
    evaluate->add_option("--clustering", eval_clustering, "record_id,cluster_id CSV")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--truth", eval_truth, "record_id,entity_id CSV")->required()->check(CLI::ExistingFile);

    ServeArgs srv;
    auto* serve = app.add_subcommand("serve", "serve tasks to workers over HTTP");
    serve->add_option("--config", srv.config, "config file")->required()->check(CLI::ExistingFile);
    serve->add_option("--host", srv.host, "bind address")->capture_default_str();
    serve->add_option("--port", srv.port, "port (0 picks one)")->capture_default_str()->check(CLI::Range(0, 65535));
    serve->add_option("--max-outstanding", srv.max_outstanding, "open task cap")->capture_default_str();
    serve->add_option("--task-ttl-secs", srv.ttl_secs, "seconds before an open task expires")->capture_default_str();
    serve->add_option("--static", srv.static_dir, "directory served at /")->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*run) return cmd_run(run_config);
        if (*simulate) {
            if (uniform) sim.spec.zipf = false;
            return cmd_simulate(sim);
        }
        if (*evaluate) return cmd_evaluate(eval_clustering, eval_truth);
        if (*serve) return cmd_serve(srv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return exit_data;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    }
    return 0;
}
