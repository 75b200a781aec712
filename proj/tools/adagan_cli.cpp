// Command-line surface for the mixture-boosting toolkit:
//   verify        randomized checks of the discrete optimal-target theory
//   run           one boosting run, serialized mixture + per-round record
//   bench         the toy benchmark harness with median/percentile reports
//   weights-demo  per-example discriminator values and weights for one round
//   plot-data     per-iteration report series as plot-ready columns

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "adagan/adagan.hpp"

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw adagan::ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw adagan::ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

int cmd_verify(std::uint64_t seed, int instances, int max_support,
               const std::string& json_path) {
    const auto report = adagan::run_verification(seed, instances,
                                                 static_cast<std::size_t>(max_support));
    for (const auto& p : report.properties) {
        std::printf("%-4s %-28s instances=%-5d checks=%-8ld failures=%-5ld worst=%.3g\n",
                    p.pass() ? "PASS" : "FAIL", p.id.c_str(), p.instances, p.checks, p.failures,
                    p.worst_violation);
        if (!p.pass() && !p.failing_instance.is_null())
            std::printf("     first failing instance: %s\n", p.failing_instance.dump().c_str());
    }
    std::printf("%zu properties, %s\n", report.properties.size(),
                report.all_pass() ? "all passed" : "FAILURES FOUND");
    if (!json_path.empty()) write_file(json_path, report.to_json().dump(2) + "\n");
    return report.all_pass() ? 0 : 1;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    const nlohmann::json cfg = load_json_file(config_path);
    if (!cfg.contains("algorithm")) throw adagan::ConfigError("run config needs an algorithm");
    const adagan::AlgorithmSpec alg = adagan::detail::algorithm_from_json(cfg["algorithm"]);
    if (alg.kind != adagan::AlgorithmSpec::Kind::Adagan)
        throw adagan::ConfigError("run executes the boosting variant; use bench for baselines");
    const adagan::ToyDatasetSpec dataset = adagan::detail::dataset_from_json(
        cfg.contains("dataset") ? cfg["dataset"] : nlohmann::json());

    adagan::Rng rng(cfg.value("seed", 0ULL));
    const adagan::ToyDataset data = adagan::generate_toy_dataset(dataset, rng);

    adagan::AdaganOptions opt;
    opt.T = alg.T;
    opt.schedule = alg.schedule;
    opt.learner = alg.learner;
    opt.discriminator = alg.discriminator;
    opt.record_weights = cfg.value("record_weights", false);
    const adagan::AdaganRun run = adagan::run_adagan(data.train, opt, rng);

    nlohmann::ordered_json record;
    record["seed"] = cfg.value("seed", 0ULL);
    record["algorithm"] = alg.name;
    record["T"] = alg.T;
    record["iterations"] = nlohmann::ordered_json::array();
    for (const auto& it : run.iterations) {
        nlohmann::ordered_json e;
        e["t"] = it.t;
        e["beta"] = it.beta;
        e["lambda"] = it.lambda;
        e["weight_min"] = it.weight_min;
        e["weight_max"] = it.weight_max;
        e["weight_zero_count"] = it.weight_zero_count;
        e["fallback"] = it.fallback;
        e["component"] = it.component;
        if (!it.weights.empty()) e["weights"] = it.weights;
        record["iterations"].push_back(std::move(e));
    }

    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    write_file(dir / "mixture.json", run.mixture.to_json().dump(2) + "\n");
    write_file(dir / "run_record.json", record.dump(2) + "\n");
    std::printf("wrote %s and %s\n", (dir / "mixture.json").c_str(),
                (dir / "run_record.json").c_str());
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir,
              const std::string& format) {
    const adagan::ExperimentConfig config =
        adagan::experiment_config_from_json(load_json_file(config_path));
    const adagan::ExperimentReport report = adagan::run_experiment(config);

    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    if (format == "csv" || format == "both") write_file(dir / "report.csv", report.to_csv());
    if (format == "json" || format == "both")
        write_file(dir / "report.json", report.to_json().dump(2) + "\n");
    std::fputs(report.to_csv().c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"boosting toolkit for generative mixture models"};
    app.require_subcommand(1);

    auto* verify = app.add_subcommand("verify", "run the randomized theory checks");
    std::uint64_t seed = 0;
    int instances = 200;
    int max_support = 16;
    std::string verify_json;
    verify->add_option("--seed", seed, "verification seed");
    verify->add_option("--instances", instances, "instances per property");
    verify->add_option("--max-support", max_support, "largest support size");
    verify->add_option("--json", verify_json, "also write the report as JSON");

    auto* run = app.add_subcommand("run", "execute one boosting run");
    std::string run_config, run_out = ".";
    run->add_option("--config", run_config, "run config (JSON)")->required();
    run->add_option("--out", run_out, "output directory");

    auto* bench = app.add_subcommand("bench", "execute the benchmark harness");
    std::string bench_config, bench_out = ".", bench_format = "csv";
    bench->add_option("--config", bench_config, "experiment config (JSON)")->required();
    bench->add_option("--out", bench_out, "output directory");
    bench->add_option("--format", bench_format, "csv|json|both")
        ->check(CLI::IsMember({"csv", "json", "both"}));

    auto* demo = app.add_subcommand("weights-demo", "emit one reweighting round as CSV");
    std::string demo_config;
    demo->add_option("--config", demo_config, "demo config (JSON)")->required();

    auto* plot = app.add_subcommand("plot-data", "emit per-iteration series as CSV columns");
    std::string plot_report;
    plot->add_option("--report", plot_report, "bench JSON report")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (verify->parsed()) return cmd_verify(seed, instances, max_support, verify_json);
        if (run->parsed()) return cmd_run(run_config, run_out);
        if (bench->parsed()) return cmd_bench(bench_config, bench_out, bench_format);
        if (demo->parsed()) {
            std::fputs(adagan::weights_demo_csv(load_json_file(demo_config)).c_str(), stdout);
            return 0;
        }
        if (plot->parsed()) {
            std::fputs(adagan::plot_data_csv(load_json_file(plot_report)).c_str(), stdout);
            return 0;
        }
    } catch (const adagan::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
