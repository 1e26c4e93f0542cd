#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "fastgcrnn/errors.hpp"
#include "fastgcrnn/evalbench.hpp"
#include "fastgcrnn/graph.hpp"
#include "fastgcrnn/ingest.hpp"
#include "fastgcrnn/io_util.hpp"
#include "fastgcrnn/model.hpp"
#include "fastgcrnn/version.hpp"

namespace fastgcrnn::cli {

namespace {

using KV = std::vector<std::pair<std::string, std::string>>;

void require_input_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw IoError(std::string(what) + " not readable: " + path);
}

void print_effective_config(const std::string& command, const KV& kv) {
    std::cout << "effective-config command=" << command;
    for (const auto& [k, v] : kv) std::cout << ' ' << k << '=' << v;
    std::cout << "\n";
}

/// "<output>.manifest.json" next to every primary output: effective config,
/// seed when present, tool/format versions, input and output paths.
void write_manifest(const std::string& command, const KV& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["command"] = command;
    j["tool"] = "fastgcrnn";
    j["version"] = kVersion;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : config) cfg[k] = v;
    j["config"] = cfg;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    for (const auto& out : outputs) {
        atomic_write_file(out + ".manifest.json",
                          [&](std::ostream& s) { s << j.dump(2) << "\n"; });
    }
}

std::string fmt_sizes(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::string fmt_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
    }
    return s;
}

/// Rows "road_id,v0,v1,..."; full double precision (prediction files).
void save_value_csv(const std::string& path, const std::vector<std::string>& ids,
                    const Matrix& values) {
    atomic_write_file(path, [&](std::ostream& out) {
        for (std::size_t i = 0; i < values.rows(); ++i) {
            out << ids[i];
            for (std::size_t j = 0; j < values.cols(); ++j) {
                out << ',' << format_double(values(i, j));
            }
            out << "\n";
        }
    });
}

std::pair<std::vector<std::string>, Matrix> load_value_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = line.find(',');
        if (start == std::string::npos) {
            throw InputError(path + ":" + std::to_string(line_no) + ": expected id,values");
        }
        ids.push_back(line.substr(0, start));
        while (start != std::string::npos) {
            const std::size_t next = line.find(',', start + 1);
            const std::string field = line.substr(
                start + 1, next == std::string::npos ? std::string::npos : next - start - 1);
            try {
                row.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw InputError(path + ":" + std::to_string(line_no) + ": bad value '" + field +
                                 "'");
            }
            start = next;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw InputError(path + ":" + std::to_string(line_no) + ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(path + ": no data rows");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return {std::move(ids), std::move(m)};
}

/// Reorders flow rows to the graph's node order; every graph node must be
/// present and no extras are allowed.
FlowMatrix align_flow_to_graph(FlowMatrix fm, const RoadGraph& g) {
    if (fm.road_ids == g.node_ids) return fm;
    if (fm.road_ids.size() != g.node_ids.size()) {
        throw InputError("flow matrix has " + std::to_string(fm.road_ids.size()) +
                         " roads but graph has " + std::to_string(g.node_ids.size()));
    }
    Matrix values(g.n, fm.values.cols());
    for (std::size_t i = 0; i < g.n; ++i) {
        const auto it = fm.road_index.find(g.node_ids[i]);
        if (it == fm.road_index.end()) {
            throw InputError("flow matrix is missing graph road_id: " + g.node_ids[i]);
        }
        for (std::size_t t = 0; t < fm.values.cols(); ++t) {
            values(i, t) = fm.values(it->second, t);
        }
    }
    fm.values = std::move(values);
    fm.road_ids = g.node_ids;
    fm.road_index.clear();
    for (std::size_t i = 0; i < g.n; ++i) fm.road_index[g.node_ids[i]] = i;
    return fm;
}

struct Split {
    std::size_t train_end = 0;
    std::size_t val_end = 0;
};

Split chronological_split(std::size_t T, const std::vector<double>& fractions) {
    if (fractions.size() != 3) {
        throw InputError("split needs three fractions train,val,test");
    }
    const double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::fabs(sum - 1.0) > 1e-9 || fractions[0] <= 0.0 || fractions[1] < 0.0 ||
        fractions[2] < 0.0) {
        throw InputError("split fractions must be nonnegative and sum to 1");
    }
    Split s;
    s.train_end = static_cast<std::size_t>(std::floor(fractions[0] * static_cast<double>(T)));
    s.val_end =
        static_cast<std::size_t>(std::floor((fractions[0] + fractions[1]) * static_cast<double>(T)));
    return s;
}

SamplerChoice parse_sampler(const std::string& s) { return sampler_choice_from_string(s); }

DrawPlan make_eval_plan(SamplerChoice choice, const NormAdj& na,
                        const std::vector<std::size_t>& t_per_layer, std::size_t d_in,
                        std::size_t d_out, std::uint64_t seed) {
    switch (choice) {
        case SamplerChoice::dense: return dense_plan();
        case SamplerChoice::exhaustive: return exhaustive_plan();
        case SamplerChoice::uniform: {
            Rng rng(seed);
            const SamplerDist dist = uniform_distribution(na.n, t_per_layer);
            return sampled_plan(dist, d_in, d_out, 0.0, rng);
        }
        case SamplerChoice::importance: {
            Rng rng(seed);
            const SamplerDist dist = importance_distribution(na, t_per_layer);
            return sampled_plan(dist, d_in, d_out, 0.0, rng);
        }
    }
    throw UsageError("unknown sampler choice");
}

}  // namespace

int run_preprocess(const PreprocessOpts& o) {
    require_input_file(o.records, "records file");
    require_input_file(o.graph, "graph file");
    const RoadGraph g = load_graph(o.graph);
    const std::int64_t interval_s = parse_duration_seconds(o.interval);

    std::int64_t begin_time;
    std::int64_t horizon = o.horizon;
    {
        std::ifstream scan_in(o.records);
        const TimeRange range = scan_record_times(scan_in);
        if (!range.any) throw InputError("records file has no parseable records: " + o.records);
        if (o.begin.empty()) {
            // Midnight of the earliest record's day.
            const std::int64_t day = 86400;
            std::int64_t t = range.min_time;
            begin_time = t - ((t % day) + day) % day;
        } else {
            begin_time = parse_timestamp(o.begin);
        }
        if (horizon < 0) {
            if (range.max_time < begin_time) {
                throw InputError("all records precede begin time " + format_timestamp(begin_time));
            }
            horizon = (range.max_time - begin_time) / interval_s + 1;
        }
    }

    std::ifstream in(o.records);
    IngestStats stats;
    FlowMatrix fm = build_flow_matrix_csv(in, g.node_ids, begin_time, interval_s,
                                          static_cast<std::size_t>(horizon), &stats);
    save_flow(fm, o.out);

    const KV kv = {{"records", o.records},
                   {"graph", o.graph},
                   {"interval", std::to_string(interval_s) + "s"},
                   {"begin", format_timestamp(begin_time)},
                   {"horizon", std::to_string(horizon)},
                   {"out", o.out}};
    print_effective_config("preprocess", kv);
    write_manifest("preprocess", kv, {o.records, o.graph}, {o.out});
    std::cout << "preprocess summary: " << stats.summary() << "\n";
    std::cout << "wrote " << o.out << " (" << fm.row_count() << " roads x " << fm.bucket_count()
              << " buckets)\n";
    return 0;
}

int run_build_graph(const BuildGraphOpts& o) {
    if (o.segments.empty() == o.edges.empty()) {
        throw InputError("build-graph needs exactly one of --segments or --edges");
    }
    RoadGraph g;
    std::string input;
    if (!o.segments.empty()) {
        input = o.segments;
        require_input_file(o.segments, "segments file");
        std::istringstream in(read_file(o.segments));
        std::string line;
        if (!std::getline(in, line)) throw InputError("segments file is empty");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != "road_id,ax,ay,bx,by") {
            throw InputError("segments file must start with header 'road_id,ax,ay,bx,by'");
        }
        std::vector<RoadSegment> segs;
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            RoadSegment s;
            std::istringstream fields(line);
            std::string f;
            std::vector<std::string> parts;
            while (std::getline(fields, f, ',')) parts.push_back(f);
            if (parts.size() != 5) {
                throw InputError(o.segments + ":" + std::to_string(line_no) +
                                 ": expected road_id,ax,ay,bx,by");
            }
            s.road_id = parts[0];
            try {
                s.ax = std::stod(parts[1]);
                s.ay = std::stod(parts[2]);
                s.bx = std::stod(parts[3]);
                s.by = std::stod(parts[4]);
            } catch (const std::exception&) {
                throw InputError(o.segments + ":" + std::to_string(line_no) +
                                 ": bad coordinate");
            }
            segs.push_back(std::move(s));
        }
        g = build_road_graph(segs, o.snap_eps);
    } else {
        input = o.edges;
        require_input_file(o.edges, "edges file");
        g = load_graph(o.edges);
    }
    save_graph(g, o.out);

    const KV kv = {{"input", input},
                   {"snap_eps", format_double(o.snap_eps)},
                   {"out", o.out}};
    print_effective_config("build-graph", kv);
    write_manifest("build-graph", kv, {input}, {o.out});
    std::cout << "wrote " << o.out << " (" << g.n << " nodes, " << g.edges.size()
              << " edges)\n";
    return 0;
}

int run_stats(const StatsOpts& o) {
    require_input_file(o.graph, "graph file");
    const RoadGraph g = load_graph(o.graph);
    const DegreeHistogram h = degree_histogram(g);

    std::ostringstream csv;
    csv << "degree,count,share,cum_share\n";
    std::size_t i = 0;
    for (const auto& [deg, cnt] : h.counts) {
        csv << deg << ',' << cnt << ',' << format_double(static_cast<double>(cnt) / g.n) << ','
            << format_double(h.cumulative[i].second) << "\n";
        ++i;
    }
    std::cout << csv.str();

    const KV kv = {{"graph", o.graph}, {"out", o.out.empty() ? "-" : o.out}};
    print_effective_config("stats", kv);
    if (!o.out.empty()) {
        atomic_write_file(o.out, [&](std::ostream& out) { out << csv.str(); });
        write_manifest("stats", kv, {o.graph}, {o.out});
        std::cout << "wrote " << o.out << "\n";
    }
    return 0;
}

int run_synth(const SynthOpts& o) {
    require_input_file(o.graph, "graph file");
    const RoadGraph g = load_graph(o.graph);
    SynthConfig cfg;
    cfg.steps = o.steps;
    cfg.period = o.period;
    cfg.noise_std = o.noise;
    cfg.spatial_alpha = o.alpha;
    cfg.trend_slope = o.slope;
    cfg.phase_spread = o.phase_spread;
    cfg.seed = o.seed;
    const FlowMatrix fm =
        generate_synthetic(g, cfg, parse_timestamp(o.begin), parse_duration_seconds(o.interval));
    save_flow(fm, o.out);

    const KV kv = {{"graph", o.graph},
                   {"steps", std::to_string(o.steps)},
                   {"period", std::to_string(o.period)},
                   {"noise", format_double(o.noise)},
                   {"alpha", format_double(o.alpha)},
                   {"slope", format_double(o.slope)},
                   {"phase_spread", format_double(o.phase_spread)},
                   {"begin", o.begin},
                   {"interval", o.interval},
                   {"seed", std::to_string(o.seed)},
                   {"out", o.out}};
    print_effective_config("synth", kv);
    write_manifest("synth", kv, {o.graph}, {o.out});
    std::cout << "wrote " << o.out << " (" << fm.row_count() << " roads x " << fm.bucket_count()
              << " buckets)\n";
    return 0;
}

namespace {

KV train_kv(const TrainOpts& o, const std::string& history_path) {
    return {{"graph", o.graph},
            {"flow", o.flow},
            {"epochs", std::to_string(o.epochs)},
            {"lr", format_double(o.lr)},
            {"batch", std::to_string(o.batch)},
            {"tf_ratio", format_double(o.tf_ratio)},
            {"clip", format_double(o.clip)},
            {"seed", std::to_string(o.seed)},
            {"sampler", o.sampler},
            {"tl", fmt_sizes(o.t_per_layer)},
            {"d_in", std::to_string(o.d_in)},
            {"d_out", std::to_string(o.d_out)},
            {"hidden", std::to_string(o.hidden)},
            {"spatial_hidden", std::to_string(o.spatial_hidden)},
            {"spatial_out", std::to_string(o.spatial_out)},
            {"activation", o.activation},
            {"tie_spatial", o.tie_spatial ? "1" : "0"},
            {"stride", std::to_string(o.stride)},
            {"split", fmt_doubles(o.split)},
            {"normalize", o.no_normalize ? "0" : "1"},
            {"out", o.out},
            {"history", history_path}};
}

}  // namespace

int run_train(const TrainOpts& o) {
    require_input_file(o.graph, "graph file");
    require_input_file(o.flow, "flow file");
    const RoadGraph g = load_graph(o.graph);
    const NormAdj na = normalize_adjacency(g);
    const FlowMatrix fm = align_flow_to_graph(load_flow(o.flow), g);
    const std::size_t T = fm.bucket_count();

    const Split split = chronological_split(T, o.split);
    const FlowScaler scaler = o.no_normalize ? FlowScaler::identity(g.n)
                                             : FlowScaler::fit(fm.values, 0, split.train_end);

    const auto train_raw = make_windows(fm.values, o.d_in, o.d_out, o.stride, 0, split.train_end);
    std::vector<ForecastWindow> val_raw;
    if (split.val_end > split.train_end &&
        split.val_end - split.train_end >= o.d_in + o.d_out) {
        val_raw = make_windows(fm.values, o.d_in, o.d_out, o.stride, split.train_end,
                               split.val_end);
    }
    const auto train_windows = transform_windows(train_raw, scaler);
    const auto val_windows = transform_windows(val_raw, scaler);

    ModelConfig mc;
    mc.d_in = o.d_in;
    mc.d_out = o.d_out;
    mc.hidden = o.hidden;
    mc.spatial_hidden = o.spatial_hidden;
    mc.spatial_out = o.spatial_out;
    mc.spatial_activation = activation_from_string(o.activation);
    mc.tie_spatial = o.tie_spatial;
    FastGcrnnModel model(mc);
    Rng rng(o.seed);
    model.init_params(rng);

    TrainConfig tc;
    tc.epochs = o.epochs;
    tc.lr = o.lr;
    tc.batch_size = o.batch;
    tc.tf_ratio = o.tf_ratio;
    tc.clip_norm = o.clip;
    tc.seed = o.seed;
    tc.sampler = parse_sampler(o.sampler);
    tc.t_per_layer = o.t_per_layer;

    const std::string history_path = o.history.empty() ? o.out + ".history.csv" : o.history;
    const KV kv = train_kv(o, history_path);
    print_effective_config("train", kv);
    std::cout << "training on " << train_windows.size() << " windows (" << val_windows.size()
              << " validation)\n";

    const TrainResult result = train(model, na, train_windows, val_windows, scaler, tc);

    std::ostringstream echo;
    for (const auto& [k, v] : kv) echo << k << '=' << v << "\n";
    save_checkpoint(model, o.out, echo.str(), &scaler);
    atomic_write_file(history_path, [&](std::ostream& out) {
        out << "epoch,train_mse,val_rmse\n";
        for (std::size_t e = 0; e < result.history.size(); ++e) {
            out << (e + 1) << ',' << format_double(result.history[e].train_mse) << ',';
            if (result.history[e].val_rmse) out << format_double(*result.history[e].val_rmse);
            out << "\n";
        }
    });
    write_manifest("train", kv, {o.graph, o.flow}, {o.out, history_path});

    const auto& last = result.history.back();
    std::cout << "final train_mse=" << format_double(last.train_mse);
    if (last.val_rmse) std::cout << " val_rmse=" << format_double(*last.val_rmse);
    std::cout << "\nwrote " << o.out << " and " << history_path << "\n";
    return 0;
}

int run_predict(const PredictOpts& o) {
    require_input_file(o.graph, "graph file");
    require_input_file(o.flow, "flow file");
    require_input_file(o.model, "model checkpoint");
    const RoadGraph g = load_graph(o.graph);
    const NormAdj na = normalize_adjacency(g);
    const FlowMatrix fm = align_flow_to_graph(load_flow(o.flow), g);

    FlowScaler scaler;
    const FastGcrnnModel model = load_checkpoint(o.model, nullptr, &scaler);
    if (scaler.mean.empty()) {
        scaler = FlowScaler::identity(g.n);
    } else if (scaler.mean.size() != g.n) {
        throw InputError("checkpoint scaler covers " + std::to_string(scaler.mean.size()) +
                         " roads but graph has " + std::to_string(g.n));
    }

    const std::size_t T = fm.bucket_count();
    if (T < model.cfg.d_in) {
        throw InputError("flow matrix has " + std::to_string(T) + " buckets, model needs " +
                         std::to_string(model.cfg.d_in));
    }
    const std::size_t t0 =
        o.t0 < 0 ? T - model.cfg.d_in : static_cast<std::size_t>(o.t0);
    if (t0 + model.cfg.d_in > T) {
        throw InputError("window start " + std::to_string(t0) + " + d_in " +
                         std::to_string(model.cfg.d_in) + " exceeds " + std::to_string(T) +
                         " buckets");
    }

    Matrix x(g.n, model.cfg.d_in);
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t j = 0; j < model.cfg.d_in; ++j) x(i, j) = fm.values(i, t0 + j);
    }
    const DrawPlan plan = make_eval_plan(parse_sampler(o.sampler), na, o.t_per_layer,
                                         model.cfg.d_in, model.cfg.d_out, o.seed);
    const Matrix pred = scaler.inverse(predict(model, na, scaler.transform(x), plan));
    save_value_csv(o.out, g.node_ids, pred);

    const KV kv = {{"graph", o.graph},        {"flow", o.flow},
                   {"model", o.model},        {"t0", std::to_string(t0)},
                   {"sampler", o.sampler},    {"tl", fmt_sizes(o.t_per_layer)},
                   {"seed", std::to_string(o.seed)}, {"out", o.out}};
    print_effective_config("predict", kv);
    write_manifest("predict", kv, {o.graph, o.flow, o.model}, {o.out});
    std::cout << "wrote " << o.out << " (" << g.n << " roads x " << model.cfg.d_out
              << " steps from bucket " << t0 << ")\n";
    return 0;
}

int run_evaluate(const EvaluateOpts& o) {
    const bool file_mode = !o.pred.empty() || !o.target.empty();
    if (file_mode) {
        if (o.pred.empty() || o.target.empty()) {
            throw InputError("evaluate file mode needs both --pred and --target");
        }
        require_input_file(o.pred, "prediction file");
        require_input_file(o.target, "target file");
        const auto [pred_ids, pred] = load_value_csv(o.pred);
        const auto [target_ids, target] = load_value_csv(o.target);
        if (!pred.same_shape(target)) {
            throw ShapeError("evaluate: prediction " + pred.shape_str() + " vs target " +
                             target.shape_str());
        }
        const double value = rmse(pred, target);
        std::cout << "rmse=" << format_double(value) << "\n";
        const KV kv = {{"pred", o.pred}, {"target", o.target}, {"out", o.out.empty() ? "-" : o.out}};
        print_effective_config("evaluate", kv);
        if (!o.out.empty()) {
            atomic_write_file(o.out, [&](std::ostream& out) {
                out << "metric,value\nrmse," << format_double(value) << "\n";
            });
            write_manifest("evaluate", kv, {o.pred, o.target}, {o.out});
        }
        return 0;
    }

    if (o.graph.empty() || o.flow.empty() || o.model.empty()) {
        throw InputError("evaluate needs --pred/--target or --graph/--flow/--model");
    }
    require_input_file(o.graph, "graph file");
    require_input_file(o.flow, "flow file");
    require_input_file(o.model, "model checkpoint");
    const RoadGraph g = load_graph(o.graph);
    const NormAdj na = normalize_adjacency(g);
    const FlowMatrix fm = align_flow_to_graph(load_flow(o.flow), g);

    FlowScaler scaler;
    const FastGcrnnModel model = load_checkpoint(o.model, nullptr, &scaler);
    if (scaler.mean.empty()) scaler = FlowScaler::identity(g.n);

    const std::size_t T = fm.bucket_count();
    const Split split = chronological_split(T, o.split);
    const std::size_t stride = o.stride == 0 ? model.cfg.d_out : o.stride;
    const auto test_raw =
        make_windows(fm.values, model.cfg.d_in, model.cfg.d_out, stride, split.val_end, T);

    const DrawPlan plan = make_eval_plan(parse_sampler(o.sampler), na, o.t_per_layer,
                                         model.cfg.d_in, model.cfg.d_out, o.seed);

    double model_sq = 0.0, ha_sq = 0.0;
    std::size_t count = 0;
    for (const auto& w : test_raw) {
        const Matrix pred = scaler.inverse(predict(model, na, scaler.transform(w.x), plan));
        Matrix history(g.n, w.t0 + model.cfg.d_in);
        for (std::size_t i = 0; i < g.n; ++i) {
            for (std::size_t t = 0; t < history.cols(); ++t) history(i, t) = fm.values(i, t);
        }
        const Matrix ha = ha_forecast(history, o.period, model.cfg.d_out);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double dm = pred.data()[i] - w.y.data()[i];
            const double dh = ha.data()[i] - w.y.data()[i];
            model_sq += dm * dm;
            ha_sq += dh * dh;
        }
        count += pred.size();
    }
    if (count == 0) throw InputError("evaluate: no test windows");
    const double model_rmse = std::sqrt(model_sq / static_cast<double>(count));
    const double ha_rmse = std::sqrt(ha_sq / static_cast<double>(count));

    const KV kv = {{"graph", o.graph},
                   {"flow", o.flow},
                   {"model", o.model},
                   {"period", std::to_string(o.period)},
                   {"stride", std::to_string(stride)},
                   {"split", fmt_doubles(o.split)},
                   {"sampler", o.sampler},
                   {"seed", std::to_string(o.seed)},
                   {"out", o.out.empty() ? "-" : o.out}};
    print_effective_config("evaluate", kv);
    std::cout << "model_rmse=" << format_double(model_rmse)
              << " ha_rmse=" << format_double(ha_rmse) << " windows=" << test_raw.size() << "\n";
    if (!o.out.empty()) {
        atomic_write_file(o.out, [&](std::ostream& out) {
            out << "metric,value\nmodel_rmse," << format_double(model_rmse) << "\nha_rmse,"
                << format_double(ha_rmse) << "\nwindows," << test_raw.size() << "\n";
        });
        write_manifest("evaluate", kv, {o.graph, o.flow, o.model}, {o.out});
    }
    return 0;
}

int run_benchmark(const BenchmarkOpts& o) {
    BenchConfig cfg;
    cfg.n_list = o.sizes;
    cfg.t_l = o.t_l;
    cfg.reps = o.reps;
    cfg.feat_dim = o.feat_dim;
    cfg.out_dim = o.out_dim;
    cfg.train_step = o.train_step;
    cfg.seed = o.seed;

    const KV kv = {{"sizes", fmt_sizes(o.sizes)},
                   {"tl", std::to_string(o.t_l)},
                   {"reps", std::to_string(o.reps)},
                   {"feat", std::to_string(o.feat_dim)},
                   {"outdim", std::to_string(o.out_dim)},
                   {"train_step", o.train_step ? "1" : "0"},
                   {"seed", std::to_string(o.seed)},
                   {"out", o.out.empty() ? "-" : o.out}};
    print_effective_config("benchmark", kv);

    const auto results = benchmark_layer(cfg);
    const std::string csv = bench_csv(results);
    std::cout << csv;
    std::vector<std::string> outputs;
    if (!o.out.empty()) {
        atomic_write_file(o.out, [&](std::ostream& out) { out << csv; });
        outputs.push_back(o.out);
    }
    if (!o.plot_data.empty()) {
        atomic_write_file(o.plot_data,
                          [&](std::ostream& out) { out << bench_plot_data(results); });
        outputs.push_back(o.plot_data);
    }
    if (!outputs.empty()) write_manifest("benchmark", kv, {}, outputs);
    return 0;
}

}  // namespace fastgcrnn::cli
