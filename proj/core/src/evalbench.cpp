#include "fastgcrnn/evalbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "fastgcrnn/errors.hpp"
#include "fastgcrnn/layers.hpp"

namespace fastgcrnn {

double rmse(const Matrix& pred, const Matrix& target) {
    require_same_shape(pred, target, "rmse");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data()[i] - target.data()[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

Matrix ha_forecast(const Matrix& history, std::size_t period, std::size_t d_out) {
    if (period < 1) throw InputError("ha_forecast: period must be >= 1");
    if (d_out < 1) throw InputError("ha_forecast: d_out must be >= 1");
    const std::size_t T = history.cols();
    if (T < period) {
        throw InputError("ha_forecast: insufficient history (" + std::to_string(T) +
                         " buckets, need at least one period of " + std::to_string(period) + ")");
    }
    const std::size_t n = history.rows();
    Matrix out(n, d_out);
    for (std::size_t k = 0; k < d_out; ++k) {
        const std::size_t phase = (T + k) % period;
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t t = phase; t < T; t += period) {
                sum += history(i, t);
                ++count;
            }
            out(i, k) = sum / static_cast<double>(count);
        }
    }
    return out;
}

FlowMatrix generate_synthetic(const RoadGraph& g, const SynthConfig& cfg,
                              std::int64_t begin_time, std::int64_t interval_s) {
    if (cfg.period < 2) throw InputError("synthetic: period must be >= 2");
    if (cfg.noise_std < 0.0) throw InputError("synthetic: noise std must be >= 0");
    if (cfg.steps < 1) throw InputError("synthetic: steps must be >= 1");
    const std::size_t n = g.n;
    if (n == 0) throw InputError("synthetic: empty graph");

    if (cfg.phase_spread < 0.0) throw InputError("synthetic: phase spread must be >= 0");
    Rng rng(cfg.seed);
    std::vector<double> base(n), amp(n), phase(n);
    for (std::size_t i = 0; i < n; ++i) base[i] = rng.uniform(cfg.base_min, cfg.base_max);
    for (std::size_t i = 0; i < n; ++i) amp[i] = rng.uniform(cfg.amp_min, cfg.amp_max);
    for (std::size_t i = 0; i < n; ++i) phase[i] = rng.uniform(0.0, cfg.phase_spread);

    std::vector<std::vector<std::size_t>> neighbors(n);
    for (const auto& [a, b] : g.edges) {
        neighbors[a].push_back(b);
        neighbors[b].push_back(a);
    }

    FlowMatrix fm;
    fm.road_ids = g.node_ids;
    for (std::size_t i = 0; i < n; ++i) fm.road_index[g.node_ids[i]] = i;
    fm.begin_time = begin_time;
    fm.interval_s = interval_s;
    fm.values = Matrix(n, cfg.steps);

    const double two_pi = 2.0 * 3.14159265358979323846;
    std::vector<double> clean_prev(n, 0.0), clean_cur(n, 0.0);
    for (std::size_t t = 0; t < cfg.steps; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            double v = base[i] + amp[i] * std::sin(two_pi * static_cast<double>(t) /
                                                       static_cast<double>(cfg.period) +
                                                   phase[i]) +
                       cfg.trend_slope * static_cast<double>(t);
            if (t > 0 && cfg.spatial_alpha != 0.0 && !neighbors[i].empty()) {
                double nb = 0.0;
                for (std::size_t j : neighbors[i]) nb += clean_prev[j];
                v += cfg.spatial_alpha * nb / static_cast<double>(neighbors[i].size());
            }
            clean_cur[i] = v;
            const double noisy = v + (cfg.noise_std > 0.0 ? cfg.noise_std * rng.normal() : 0.0);
            fm.values(i, t) = std::max(0.0, std::round(noisy));
        }
        std::swap(clean_prev, clean_cur);
    }
    return fm;
}

RoadGraph random_graph(std::size_t n, std::size_t num_edges, Rng& rng) {
    if (n < 2) throw InputError("random_graph: need at least 2 nodes");
    const std::size_t max_edges = n * (n - 1) / 2;
    if (num_edges > max_edges) {
        throw InputError("random_graph: " + std::to_string(num_edges) +
                         " edges exceed max " + std::to_string(max_edges));
    }
    // Zero-padded ids keep lexicographic order equal to numeric order.
    std::size_t width = 1;
    for (std::size_t v = n; v >= 10; v /= 10) ++width;
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string s = std::to_string(i);
        ids[i] = std::string(width - s.size(), '0') + s;
    }
    std::set<std::pair<std::size_t, std::size_t>> edge_set;
    while (edge_set.size() < num_edges) {
        const std::size_t a = rng.uniform_index(n);
        const std::size_t b = rng.uniform_index(n);
        if (a == b) continue;
        edge_set.emplace(std::min(a, b), std::max(a, b));
    }
    std::vector<std::pair<std::string, std::string>> edges;
    edges.reserve(edge_set.size());
    for (const auto& [a, b] : edge_set) edges.emplace_back(ids[a], ids[b]);
    return build_road_graph(ids, edges);
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

// Milliseconds per call; the body is repeated until one timing sample is
// long enough for the steady clock to resolve it.
template <typename F>
double time_ms(F&& body, std::size_t reps, std::vector<double>& samples_out) {
    using clock = std::chrono::steady_clock;
    samples_out.clear();
    std::size_t inner = 1;
    for (;;) {
        const auto start = clock::now();
        for (std::size_t i = 0; i < inner; ++i) body();
        const double ms =
            std::chrono::duration<double, std::milli>(clock::now() - start).count();
        if (ms >= 5.0 || inner >= (1u << 20)) break;
        inner *= 4;
    }
    for (std::size_t r = 0; r < reps; ++r) {
        const auto start = clock::now();
        for (std::size_t i = 0; i < inner; ++i) body();
        const double ms =
            std::chrono::duration<double, std::milli>(clock::now() - start).count();
        samples_out.push_back(ms / static_cast<double>(inner));
    }
    return median(samples_out);
}

}  // namespace

std::vector<BenchResult> benchmark_layer(const BenchConfig& cfg) {
    if (cfg.reps < 5) throw InputError("benchmark: reps must be >= 5 for a stable median");
    std::vector<BenchResult> results;
    Rng rng(cfg.seed);
    for (const std::size_t n : cfg.n_list) {
        if (n < cfg.t_l) {
            throw InputError("benchmark: graph size " + std::to_string(n) +
                             " smaller than sample size " + std::to_string(cfg.t_l));
        }
        Rng graph_rng = rng.fork(n);
        const std::size_t edges = std::min(n * cfg.avg_degree / 2, n * (n - 1) / 2);
        NormAdj na;
        {
            const RoadGraph g = random_graph(n, edges, graph_rng);
            na = normalize_adjacency(g);
        }  // raw adjacency freed before timing

        Matrix h(n, cfg.feat_dim);
        for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] = graph_rng.normal();
        GcnLayerParams layer(cfg.feat_dim, cfg.out_dim, Activation::relu);
        init_glorot(layer.w, graph_rng);
        const SamplerDist dist = importance_distribution(na, {cfg.t_l});

        auto dense_body = [&] {
            if (cfg.train_step) {
                GcnCache cache;
                Matrix out = gcn_dense_forward(na, h, layer, &cache);
                layer.w.zero_grad();
                gcn_backward(na, layer, cache, out);
                add_scaled_in_place(layer.w.value, layer.w.grad, -1e-12);
            } else {
                gcn_dense_forward(na, h, layer);
            }
        };
        auto sampled_body = [&] {
            const SampleDraw draw = draw_sample(dist, 0, graph_rng);
            if (cfg.train_step) {
                GcnCache cache;
                Matrix out = fastgcn_sample_forward(na, h, layer, draw, &cache);
                layer.w.zero_grad();
                gcn_backward(na, layer, cache, out);
                add_scaled_in_place(layer.w.value, layer.w.grad, -1e-12);
            } else {
                fastgcn_sample_forward(na, h, layer, draw);
            }
        };

        BenchResult res;
        res.n = n;
        res.t_l = cfg.t_l;
        res.reps = cfg.reps;
        std::vector<double> samples;
        res.dense_forward_ms = time_ms(dense_body, cfg.reps, samples);
        res.sampled_forward_ms = time_ms(sampled_body, cfg.reps, samples);
        // a_hat + mixed + output for the dense pass; gathered slices for the
        // sampled pass. Analytic estimate, not a heap measurement.
        const std::size_t d = cfg.feat_dim, dd = cfg.out_dim, t = cfg.t_l;
        res.peak_alloc_estimate =
            8 * (n * n + n * d + n * dd + std::max(n * t + t * d + t * dd, std::size_t{0}));
        results.push_back(res);
    }
    return results;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InputError("fit_loglog_slope: need matched series with >= 2 points");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) {
            throw NumericError("fit_loglog_slope: nonpositive sample");
        }
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::string bench_csv(const std::vector<BenchResult>& results) {
    std::ostringstream out;
    out << "n,t_l,dense_ms,sampled_ms,ratio\n";
    for (const auto& r : results) {
        out << r.n << ',' << r.t_l << ',' << r.dense_forward_ms << ',' << r.sampled_forward_ms
            << ',' << r.sampled_forward_ms / r.dense_forward_ms << "\n";
    }
    return out.str();
}

std::string bench_plot_data(const std::vector<BenchResult>& results) {
    std::ostringstream out;
    out << "# dense\n";
    for (const auto& r : results) out << r.n << ' ' << r.dense_forward_ms << "\n";
    out << "\n# sampled\n";
    for (const auto& r : results) out << r.n << ' ' << r.sampled_forward_ms << "\n";
    return out.str();
}

}  // namespace fastgcrnn
