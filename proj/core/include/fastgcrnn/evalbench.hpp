#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastgcrnn/graph.hpp"
#include "fastgcrnn/ingest.hpp"
#include "fastgcrnn/matrix.hpp"
#include "fastgcrnn/rng.hpp"

namespace fastgcrnn {

/// Root mean squared error over all entries.
double rmse(const Matrix& pred, const Matrix& target);

/// Historical-average baseline: the forecast for future bucket T+k is the
/// per-node mean of all history values at the same phase ((T+k) mod period).
Matrix ha_forecast(const Matrix& history, std::size_t period, std::size_t d_out);

/// Periodic + trend + neighbor-coupled synthetic traffic counts.
struct SynthConfig {
    std::size_t steps = 5760;  // buckets (20 days at 5 min)
    std::size_t period = 288;  // one day at 5 min
    double trend_slope = 0.001;
    double noise_std = 2.0;
    double spatial_alpha = 0.3;
    double base_min = 10.0, base_max = 40.0;
    double amp_min = 5.0, amp_max = 20.0;
    // Per-road phase jitter in radians. Roads in one network share the daily
    // rush-hour structure, so the spread is narrow by default; 2*pi gives
    // fully independent phases.
    double phase_spread = 0.6;
    std::uint64_t seed = 1;
};

FlowMatrix generate_synthetic(const RoadGraph& g, const SynthConfig& cfg,
                              std::int64_t begin_time = 1420070400 /* 2015-01-01 00:00:00 */,
                              std::int64_t interval_s = 300);

/// Erdos-Renyi-style G(n, M) with exactly num_edges distinct edges.
RoadGraph random_graph(std::size_t n, std::size_t num_edges, Rng& rng);

struct BenchResult {
    std::size_t n = 0;
    std::size_t t_l = 0;
    double dense_forward_ms = 0.0;
    double sampled_forward_ms = 0.0;
    std::size_t peak_alloc_estimate = 0;  // bytes, analytic best effort
    std::size_t reps = 0;
};

struct BenchConfig {
    std::vector<std::size_t> n_list = {500, 1000, 2000, 4000};
    std::size_t t_l = 5;
    std::size_t reps = 7;           // median reported; must be >= 5
    std::size_t feat_dim = 16;
    std::size_t out_dim = 16;
    std::size_t avg_degree = 4;
    bool train_step = false;        // also time backward + update
    std::uint64_t seed = 1;
};

/// Times the dense and sampled layer forward (importance distribution) on
/// random graphs of each size. Single-threaded wall clock, median of reps.
std::vector<BenchResult> benchmark_layer(const BenchConfig& cfg);

/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// CSV: n,t_l,dense_ms,sampled_ms,ratio
std::string bench_csv(const std::vector<BenchResult>& results);
/// Gnuplot-style blocks, one two-column series per curve.
std::string bench_plot_data(const std::vector<BenchResult>& results);

}  // namespace fastgcrnn
