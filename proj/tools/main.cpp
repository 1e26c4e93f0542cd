#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "fastgcrnn/errors.hpp"
#include "fastgcrnn/version.hpp"

namespace cli = fastgcrnn::cli;

namespace {

// Raised during config merging; reported as a usage error (exit 2).
struct ConfigUsageError {
    std::string message;
    CLI::App* subcommand = nullptr;
};

std::string trim_ws(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

/// Appends "--key=value" tokens for config entries whose flag was not given
/// on the command line, so explicit flags always win. Unknown keys and
/// unreadable files are usage errors.
void merge_config_into_args(CLI::App& app, std::vector<std::string>& args) {
    if (args.empty() || args.front().empty() || args.front()[0] == '-') return;
    CLI::App* sub = app.get_subcommand_no_throw(args.front());
    if (sub == nullptr) return;  // CLI11 reports the unknown subcommand

    std::string config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return;

    std::ifstream in(config_path);
    if (!in) throw ConfigUsageError{"config file not readable: " + config_path, sub};

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim_ws(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigUsageError{config_path + ":" + std::to_string(line_no) +
                                       ": expected key=value, got '" + t + "'",
                                   sub};
        }
        const std::string key = trim_ws(t.substr(0, eq));
        std::string value = trim_ws(t.substr(eq + 1));
        if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                                  (value.front() == '\'' && value.back() == '\''))) {
            value = value.substr(1, value.size() - 2);
        }
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (flag == "--config" || sub->get_option_no_throw(flag) == nullptr) {
            throw ConfigUsageError{config_path + ":" + std::to_string(line_no) +
                                       ": unknown config key '" + key + "'",
                                   sub};
        }
        const bool given_on_cli =
            std::any_of(args.begin() + 1, args.end(), [&](const std::string& a) {
                return a == flag || a.rfind(flag + "=", 0) == 0;
            });
        if (!given_on_cli) args.push_back(flag + "=" + value);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FastGCRNN traffic flow forecasting toolkit"};
    app.set_version_flag("--version", fastgcrnn::kVersion);
    app.require_subcommand(1);

    int rc = 0;
    auto add_config = [](CLI::App* cmd) {
        cmd->add_option("--config", "key=value config file; command-line flags win");
    };

    cli::PreprocessOpts pre;
    {
        CLI::App* c = app.add_subcommand(
            "preprocess", "Aggregate pre-mapped GPS records into per-road flow counts");
        add_config(c);
        c->add_option("--records", pre.records, "Records CSV (road_id,car_id,time)")->required();
        c->add_option("--graph", pre.graph, "Road graph file (defines the road set)")->required();
        c->add_option("--interval", pre.interval, "Bucket length, e.g. 5m or 30m")
            ->capture_default_str();
        c->add_option("--begin", pre.begin,
                      "Bucket 0 start 'YYYY-MM-DD HH:MM:SS' (default: earliest record's midnight)");
        c->add_option("--horizon", pre.horizon,
                      "Bucket count T; later records are dropped and counted");
        c->add_option("--out", pre.out, "Output flow CSV")->required();
        c->callback([&] { rc = cli::run_preprocess(pre); });
    }

    cli::BuildGraphOpts bg;
    {
        CLI::App* c = app.add_subcommand(
            "build-graph", "Build the road-dual graph from segments or an edge list");
        add_config(c);
        c->add_option("--segments", bg.segments, "Segment CSV (road_id,ax,ay,bx,by)");
        c->add_option("--edges", bg.edges, "Edge-list graph file to validate/canonicalize");
        c->add_option("--snap-eps", bg.snap_eps, "Endpoint snapping tolerance")
            ->capture_default_str();
        c->add_option("--out", bg.out, "Output graph file")->required();
        c->callback([&] { rc = cli::run_build_graph(bg); });
    }

    cli::StatsOpts st;
    {
        CLI::App* c =
            app.add_subcommand("stats", "Degree histogram and cumulative shares of a graph");
        add_config(c);
        c->add_option("--graph", st.graph, "Graph file")->required();
        c->add_option("--out", st.out, "Optional output CSV");
        c->callback([&] { rc = cli::run_stats(st); });
    }

    cli::SynthOpts sy;
    {
        CLI::App* c = app.add_subcommand(
            "synth", "Generate periodic, trending, spatially coupled synthetic flows");
        add_config(c);
        c->add_option("--graph", sy.graph, "Graph file")->required();
        c->add_option("--out", sy.out, "Output flow CSV")->required();
        c->add_option("--steps", sy.steps, "Bucket count")->capture_default_str();
        c->add_option("--period", sy.period, "Cycle length in buckets")->capture_default_str();
        c->add_option("--noise", sy.noise, "Gaussian noise std")->capture_default_str();
        c->add_option("--alpha", sy.alpha, "Neighbor coupling weight")->capture_default_str();
        c->add_option("--slope", sy.slope, "Linear trend per bucket")->capture_default_str();
        c->add_option("--phase-spread", sy.phase_spread,
                      "Per-road phase jitter in radians (2*pi: independent phases)")
            ->capture_default_str();
        c->add_option("--seed", sy.seed, "Random seed")->capture_default_str();
        c->add_option("--begin", sy.begin, "Timestamp of bucket 0")->capture_default_str();
        c->add_option("--interval", sy.interval, "Bucket length")->capture_default_str();
        c->callback([&] { rc = cli::run_synth(sy); });
    }

    cli::TrainOpts tr;
    {
        CLI::App* c = app.add_subcommand("train", "Train a FastGCRNN forecaster");
        add_config(c);
        c->add_option("--graph", tr.graph, "Graph file")->required();
        c->add_option("--flow", tr.flow, "Flow CSV")->required();
        c->add_option("--out", tr.out, "Output checkpoint")->required();
        c->add_option("--history", tr.history, "Loss history CSV (default <out>.history.csv)");
        c->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
        c->add_option("--lr", tr.lr, "Learning rate")->capture_default_str();
        c->add_option("--batch", tr.batch, "Windows per optimizer step")->capture_default_str();
        c->add_option("--tf-ratio", tr.tf_ratio, "Teacher forcing ratio in [0,1]")
            ->capture_default_str();
        c->add_option("--clip", tr.clip, "Global gradient-norm clip")->capture_default_str();
        c->add_option("--seed", tr.seed, "Random seed")->capture_default_str();
        c->add_option("--sampler", tr.sampler, "dense|exhaustive|uniform|importance")
            ->capture_default_str();
        c->add_option("--tl", tr.t_per_layer, "Per-layer sample sizes, e.g. 5,5")
            ->delimiter(',')
            ->capture_default_str();
        c->add_option("--d-in", tr.d_in, "Input window length")->capture_default_str();
        c->add_option("--d-out", tr.d_out, "Forecast horizon")->capture_default_str();
        c->add_option("--hidden", tr.hidden, "GRU hidden size")->capture_default_str();
        c->add_option("--spatial-hidden", tr.spatial_hidden, "Spatial extractor hidden dim")
            ->capture_default_str();
        c->add_option("--spatial-out", tr.spatial_out, "Spatial extractor output dim")
            ->capture_default_str();
        c->add_option("--activation", tr.activation, "relu|sigmoid|tanh|linear")
            ->capture_default_str();
        c->add_flag("--tie-spatial", tr.tie_spatial,
                    "Share spatial extractor weights between encoder and decoder");
        c->add_option("--stride", tr.stride, "Window stride in buckets")->capture_default_str();
        c->add_option("--split", tr.split, "Chronological train,val,test fractions")
            ->delimiter(',')
            ->capture_default_str();
        c->add_flag("--no-normalize", tr.no_normalize, "Train on raw counts");
        c->callback([&] { rc = cli::run_train(tr); });
    }

    cli::PredictOpts pr;
    {
        CLI::App* c = app.add_subcommand("predict", "Forecast the next d_out buckets");
        add_config(c);
        c->add_option("--graph", pr.graph, "Graph file")->required();
        c->add_option("--flow", pr.flow, "Flow CSV")->required();
        c->add_option("--model", pr.model, "Checkpoint")->required();
        c->add_option("--out", pr.out, "Output prediction CSV")->required();
        c->add_option("--t0", pr.t0, "Window start bucket (default: last full window)");
        c->add_option("--sampler", pr.sampler, "dense|exhaustive|uniform|importance")
            ->capture_default_str();
        c->add_option("--tl", pr.t_per_layer, "Per-layer sample sizes")
            ->delimiter(',')
            ->capture_default_str();
        c->add_option("--seed", pr.seed, "Random seed for sampled mode")->capture_default_str();
        c->callback([&] { rc = cli::run_predict(pr); });
    }

    cli::EvaluateOpts ev;
    {
        CLI::App* c = app.add_subcommand(
            "evaluate", "RMSE of a prediction file, or model vs historical-average baseline");
        add_config(c);
        c->add_option("--pred", ev.pred, "Prediction CSV (file mode)");
        c->add_option("--target", ev.target, "Target CSV (file mode)");
        c->add_option("--graph", ev.graph, "Graph file (pipeline mode)");
        c->add_option("--flow", ev.flow, "Flow CSV (pipeline mode)");
        c->add_option("--model", ev.model, "Checkpoint (pipeline mode)");
        c->add_option("--period", ev.period, "Baseline period in buckets")->capture_default_str();
        c->add_option("--stride", ev.stride, "Test window stride (0: d_out)")
            ->capture_default_str();
        c->add_option("--split", ev.split, "Chronological train,val,test fractions")
            ->delimiter(',')
            ->capture_default_str();
        c->add_option("--sampler", ev.sampler, "dense|exhaustive|uniform|importance")
            ->capture_default_str();
        c->add_option("--tl", ev.t_per_layer, "Per-layer sample sizes")
            ->delimiter(',')
            ->capture_default_str();
        c->add_option("--seed", ev.seed, "Random seed for sampled mode")->capture_default_str();
        c->add_option("--out", ev.out, "Optional metrics CSV");
        c->callback([&] { rc = cli::run_evaluate(ev); });
    }

    cli::BenchmarkOpts be;
    {
        CLI::App* c = app.add_subcommand(
            "benchmark", "Time dense vs sampled layer forward across graph sizes");
        add_config(c);
        c->add_option("--sizes", be.sizes, "Graph sizes, e.g. 500,1000,2000,4000")
            ->delimiter(',')
            ->capture_default_str();
        c->add_option("--tl", be.t_l, "Sample size per layer")->capture_default_str();
        c->add_option("--reps", be.reps, "Repetitions (median reported)")->capture_default_str();
        c->add_option("--feat", be.feat_dim, "Feature dimension")->capture_default_str();
        c->add_option("--outdim", be.out_dim, "Output dimension")->capture_default_str();
        c->add_flag("--train-step", be.train_step, "Time forward+backward+update instead");
        c->add_option("--seed", be.seed, "Graph/weight seed")->capture_default_str();
        c->add_option("--out", be.out, "Output CSV");
        c->add_option("--plot-data", be.plot_data, "Gnuplot-style series file");
        c->callback([&] { rc = cli::run_benchmark(be); });
    }

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        merge_config_into_args(app, args);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const ConfigUsageError& e) {
        std::cerr << "error: " << e.message << "\n\n";
        std::cerr << (e.subcommand ? e.subcommand->help() : app.help());
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const auto parsed = app.get_subcommands();
        std::cerr << (parsed.size() == 1 ? parsed.front()->help() : app.help());
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
