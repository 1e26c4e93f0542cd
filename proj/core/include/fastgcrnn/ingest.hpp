#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fastgcrnn/matrix.hpp"

namespace fastgcrnn {

/// "YYYY-MM-DD HH:MM:SS" <-> seconds since 1970-01-01 00:00:00, naive local
/// time (no timezone handling).
std::int64_t parse_timestamp(const std::string& s);
std::string format_timestamp(std::int64_t t);

/// "300", "300s", "5m", "2h" -> seconds.
std::int64_t parse_duration_seconds(const std::string& s);

struct GpsRecord {
    std::string road_id;
    std::string car_id;
    std::int64_t time = 0;
};

/// floor((t - begin_time) / interval_s); throws on t < begin_time.
std::int64_t bucketize(std::int64_t t, std::int64_t begin_time, std::int64_t interval_s);

struct IngestStats {
    std::size_t records_read = 0;    // data lines seen (header excluded)
    std::size_t malformed = 0;       // unparseable lines, skipped
    std::size_t unknown_road = 0;    // road_id outside the road set
    std::size_t before_begin = 0;    // timestamp earlier than begin_time
    std::size_t out_of_horizon = 0;  // bucket index >= T
    std::size_t duplicates = 0;      // repeated (car, road, bucket)
    std::size_t counted = 0;         // increments applied
    std::string summary() const;
};

/// Per-road, per-bucket vehicle counts. Row order and road_index are fixed by
/// the road list handed to build_flow_matrix.
struct FlowMatrix {
    std::vector<std::string> road_ids;
    std::unordered_map<std::string, std::size_t> road_index;
    std::int64_t begin_time = 0;
    std::int64_t interval_s = 300;
    Matrix values;  // n x T, nonnegative integers stored as doubles

    std::size_t n() const { return values.rows(); }
    std::size_t row_count() const { return values.rows(); }
    std::size_t bucket_count() const { return values.cols(); }
};

/// Counts one vehicle per (car, road, bucket) triple; duplicate triples are
/// collapsed. Unknown roads, pre-begin and post-horizon records are skipped
/// and tallied in stats.
FlowMatrix build_flow_matrix(const std::vector<GpsRecord>& records,
                             const std::vector<std::string>& roads, std::int64_t begin_time,
                             std::int64_t interval_s, std::size_t T,
                             IngestStats* stats = nullptr);

/// Streaming CSV form. Expects header "road_id,car_id,time"; malformed data
/// lines are skipped and counted.
FlowMatrix build_flow_matrix_csv(std::istream& in, const std::vector<std::string>& roads,
                                 std::int64_t begin_time, std::int64_t interval_s, std::size_t T,
                                 IngestStats* stats = nullptr);

/// Min/max record timestamps of a records CSV (for defaulting begin/horizon).
struct TimeRange {
    std::int64_t min_time = 0;
    std::int64_t max_time = 0;
    bool any = false;
};
TimeRange scan_record_times(std::istream& in);

struct ForecastWindow {
    Matrix x;  // n x d_in
    Matrix y;  // n x d_out
    std::size_t t0 = 0;
};

/// Windows at t0 = offset, offset+stride, ... while t0 + d_in + d_out <= t_end.
std::vector<ForecastWindow> make_windows(const Matrix& values, std::size_t d_in,
                                         std::size_t d_out, std::size_t stride,
                                         std::size_t t_begin, std::size_t t_end);
std::vector<ForecastWindow> make_windows(const FlowMatrix& fm, std::size_t d_in,
                                         std::size_t d_out, std::size_t stride);

/// Per-node z-score scaler with std floored at 1e-8.
struct FlowScaler {
    std::vector<double> mean;
    std::vector<double> stdev;

    static FlowScaler fit(const Matrix& values, std::size_t t_begin, std::size_t t_end);
    static FlowScaler identity(std::size_t n);

    Matrix transform(const Matrix& m) const;
    Matrix inverse(const Matrix& m) const;
};

std::vector<ForecastWindow> transform_windows(const std::vector<ForecastWindow>& windows,
                                              const FlowScaler& scaler);

/// Flow file: "#begin=<timestamp> interval_s=<int>" metadata line, then one
/// "road_id,c_0,...,c_{T-1}" row per road.
std::string flow_to_string(const FlowMatrix& fm);
FlowMatrix flow_from_string(const std::string& text);
void save_flow(const FlowMatrix& fm, const std::string& path);
FlowMatrix load_flow(const std::string& path);

}  // namespace fastgcrnn
