#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fastgcrnn::cli {

struct PreprocessOpts {
    std::string records;
    std::string graph;
    std::string interval = "5m";
    std::string begin;    // empty: midnight of the earliest record day
    std::int64_t horizon = -1;  // buckets; -1: cover the latest record
    std::string out;
};

struct BuildGraphOpts {
    std::string segments;
    std::string edges;
    double snap_eps = 1e-6;
    std::string out;
};

struct StatsOpts {
    std::string graph;
    std::string out;
};

struct SynthOpts {
    std::string graph;
    std::string out;
    std::size_t steps = 5760;
    std::size_t period = 288;
    double noise = 2.0;
    double alpha = 0.3;
    double slope = 0.001;
    double phase_spread = 0.6;
    std::uint64_t seed = 1;
    std::string begin = "2015-01-01 00:00:00";
    std::string interval = "5m";
};

struct TrainOpts {
    std::string graph;
    std::string flow;
    std::string out;
    std::string history;  // optional CSV; default "<out>.history.csv"
    std::size_t epochs = 20;
    double lr = 1e-3;
    std::size_t batch = 8;
    double tf_ratio = 0.5;
    double clip = 5.0;
    std::uint64_t seed = 1;
    std::string sampler = "importance";
    std::vector<std::size_t> t_per_layer = {5, 5};
    std::size_t d_in = 12;
    std::size_t d_out = 12;
    std::size_t hidden = 64;
    std::size_t spatial_hidden = 16;
    std::size_t spatial_out = 16;
    std::string activation = "relu";
    bool tie_spatial = false;
    std::size_t stride = 1;
    std::vector<double> split = {0.7, 0.1, 0.2};
    bool no_normalize = false;
};

struct PredictOpts {
    std::string graph;
    std::string flow;
    std::string model;
    std::string out;
    std::int64_t t0 = -1;  // -1: last full window
    std::string sampler = "exhaustive";
    std::vector<std::size_t> t_per_layer = {5, 5};
    std::uint64_t seed = 1;
};

struct EvaluateOpts {
    // File mode.
    std::string pred;
    std::string target;
    // Pipeline mode.
    std::string graph;
    std::string flow;
    std::string model;
    std::size_t period = 288;
    std::size_t stride = 0;  // 0: defaults to the model's d_out
    std::vector<double> split = {0.7, 0.1, 0.2};
    std::string sampler = "exhaustive";
    std::vector<std::size_t> t_per_layer = {5, 5};
    std::uint64_t seed = 1;
    std::string out;
};

struct BenchmarkOpts {
    std::vector<std::size_t> sizes = {500, 1000, 2000, 4000};
    std::size_t t_l = 5;
    std::size_t reps = 7;
    std::size_t feat_dim = 16;
    std::size_t out_dim = 16;
    bool train_step = false;
    std::uint64_t seed = 1;
    std::string out;
    std::string plot_data;
};

int run_preprocess(const PreprocessOpts& o);
int run_build_graph(const BuildGraphOpts& o);
int run_stats(const StatsOpts& o);
int run_synth(const SynthOpts& o);
int run_train(const TrainOpts& o);
int run_predict(const PredictOpts& o);
int run_evaluate(const EvaluateOpts& o);
int run_benchmark(const BenchmarkOpts& o);

}  // namespace fastgcrnn::cli
