#include "fastgcrnn/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_set>

#include "fastgcrnn/errors.hpp"
#include "fastgcrnn/io_util.hpp"

namespace fastgcrnn {

namespace {

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

int days_in_month(int y, int m) {
    static const int dm[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return dm[m - 1];
}

bool split_fields(const std::string& line, char sep, std::vector<std::string>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return true;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

}  // namespace

std::int64_t parse_timestamp(const std::string& s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    char tail = 0;
    const int got =
        std::sscanf(s.c_str(), "%4d-%2d-%2d %2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &sec, &tail);
    if (got != 6 || s.size() != 19) {
        throw InputError("bad timestamp (want YYYY-MM-DD HH:MM:SS): '" + s + "'");
    }
    if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo) || h < 0 || h > 23 || mi < 0 ||
        mi > 59 || sec < 0 || sec > 59) {
        throw InputError("timestamp out of range: '" + s + "'");
    }
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + sec;
}

std::string format_timestamp(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

std::int64_t parse_duration_seconds(const std::string& s) {
    if (s.empty()) throw InputError("empty duration");
    std::int64_t mult = 1;
    std::string digits = s;
    switch (s.back()) {
        case 's': mult = 1; digits = s.substr(0, s.size() - 1); break;
        case 'm': mult = 60; digits = s.substr(0, s.size() - 1); break;
        case 'h': mult = 3600; digits = s.substr(0, s.size() - 1); break;
        default: break;
    }
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                       [](char c) { return c >= '0' && c <= '9'; })) {
        throw InputError("bad duration (want e.g. 300, 300s, 5m, 1h): '" + s + "'");
    }
    const std::int64_t v = std::stoll(digits) * mult;
    if (v <= 0) throw InputError("duration must be positive: '" + s + "'");
    return v;
}

std::int64_t bucketize(std::int64_t t, std::int64_t begin_time, std::int64_t interval_s) {
    if (interval_s <= 0) throw InputError("bucketize: interval must be positive");
    if (t < begin_time) {
        throw InputError("bucketize: time " + format_timestamp(t) + " is before begin " +
                         format_timestamp(begin_time));
    }
    return (t - begin_time) / interval_s;
}

std::string IngestStats::summary() const {
    std::ostringstream out;
    out << "records=" << records_read << " counted=" << counted << " duplicates=" << duplicates
        << " malformed=" << malformed << " unknown_road=" << unknown_road
        << " before_begin=" << before_begin << " out_of_horizon=" << out_of_horizon;
    return out.str();
}

namespace {

struct FlowBuilder {
    FlowMatrix fm;
    IngestStats stats;
    std::unordered_set<std::string> seen;  // car|road_idx|bucket dedup keys

    FlowBuilder(const std::vector<std::string>& roads, std::int64_t begin_time,
                std::int64_t interval_s, std::size_t T) {
        if (interval_s <= 0) throw InputError("flow matrix interval must be positive");
        if (T == 0) throw InputError("flow matrix horizon T must be >= 1");
        fm.road_ids = roads;
        fm.begin_time = begin_time;
        fm.interval_s = interval_s;
        fm.values = Matrix(roads.size(), T);
        for (std::size_t i = 0; i < roads.size(); ++i) {
            if (!fm.road_index.emplace(roads[i], i).second) {
                throw InputError("duplicate road_id in road set: " + roads[i]);
            }
        }
    }

    void add(const GpsRecord& rec) {
        ++stats.records_read;
        if (rec.road_id.empty() || rec.car_id.empty()) {
            ++stats.malformed;
            return;
        }
        const auto it = fm.road_index.find(rec.road_id);
        if (it == fm.road_index.end()) {
            ++stats.unknown_road;
            return;
        }
        if (rec.time < fm.begin_time) {
            ++stats.before_begin;
            return;
        }
        const std::int64_t bucket = (rec.time - fm.begin_time) / fm.interval_s;
        if (bucket >= static_cast<std::int64_t>(fm.values.cols())) {
            ++stats.out_of_horizon;
            return;
        }
        std::string key = rec.car_id;
        key += '|';
        key += std::to_string(it->second);
        key += '|';
        key += std::to_string(bucket);
        if (!seen.insert(std::move(key)).second) {
            ++stats.duplicates;
            return;
        }
        fm.values(it->second, static_cast<std::size_t>(bucket)) += 1.0;
        ++stats.counted;
    }
};

}  // namespace

FlowMatrix build_flow_matrix(const std::vector<GpsRecord>& records,
                             const std::vector<std::string>& roads, std::int64_t begin_time,
                             std::int64_t interval_s, std::size_t T, IngestStats* stats) {
    FlowBuilder b(roads, begin_time, interval_s, T);
    for (const auto& rec : records) b.add(rec);
    if (stats) *stats = b.stats;
    return std::move(b.fm);
}

FlowMatrix build_flow_matrix_csv(std::istream& in, const std::vector<std::string>& roads,
                                 std::int64_t begin_time, std::int64_t interval_s, std::size_t T,
                                 IngestStats* stats) {
    FlowBuilder b(roads, begin_time, interval_s, T);
    std::string line;
    if (!std::getline(in, line)) throw InputError("records file is empty");
    if (trim(line) != "road_id,car_id,time") {
        throw InputError("records file must start with header 'road_id,car_id,time', got: '" +
                         trim(line) + "'");
    }
    std::vector<std::string> fields;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        split_fields(t, ',', fields);
        if (fields.size() != 3) {
            ++b.stats.records_read;
            ++b.stats.malformed;
            continue;
        }
        GpsRecord rec;
        rec.road_id = trim(fields[0]);
        rec.car_id = trim(fields[1]);
        try {
            rec.time = parse_timestamp(trim(fields[2]));
        } catch (const InputError&) {
            ++b.stats.records_read;
            ++b.stats.malformed;
            continue;
        }
        b.add(rec);
    }
    if (stats) *stats = b.stats;
    return std::move(b.fm);
}

TimeRange scan_record_times(std::istream& in) {
    TimeRange r;
    std::string line;
    if (!std::getline(in, line)) return r;
    std::vector<std::string> fields;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        split_fields(t, ',', fields);
        if (fields.size() != 3) continue;
        std::int64_t ts;
        try {
            ts = parse_timestamp(trim(fields[2]));
        } catch (const InputError&) {
            continue;
        }
        if (!r.any) {
            r.min_time = r.max_time = ts;
            r.any = true;
        } else {
            r.min_time = std::min(r.min_time, ts);
            r.max_time = std::max(r.max_time, ts);
        }
    }
    return r;
}

std::vector<ForecastWindow> make_windows(const Matrix& values, std::size_t d_in,
                                         std::size_t d_out, std::size_t stride,
                                         std::size_t t_begin, std::size_t t_end) {
    if (d_in < 1 || d_out < 1) throw InputError("window sizes d_in and d_out must be >= 1");
    if (stride < 1) throw InputError("window stride must be >= 1");
    t_end = std::min(t_end, values.cols());
    if (t_begin > t_end || t_end - t_begin < d_in + d_out) {
        throw InputError("empty dataset: need at least d_in + d_out = " +
                         std::to_string(d_in + d_out) + " buckets, range has " +
                         std::to_string(t_end > t_begin ? t_end - t_begin : 0));
    }
    std::vector<ForecastWindow> windows;
    for (std::size_t t0 = t_begin; t0 + d_in + d_out <= t_end; t0 += stride) {
        ForecastWindow w;
        w.t0 = t0;
        w.x = Matrix(values.rows(), d_in);
        w.y = Matrix(values.rows(), d_out);
        for (std::size_t i = 0; i < values.rows(); ++i) {
            for (std::size_t j = 0; j < d_in; ++j) w.x(i, j) = values(i, t0 + j);
            for (std::size_t j = 0; j < d_out; ++j) w.y(i, j) = values(i, t0 + d_in + j);
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<ForecastWindow> make_windows(const FlowMatrix& fm, std::size_t d_in,
                                         std::size_t d_out, std::size_t stride) {
    return make_windows(fm.values, d_in, d_out, stride, 0, fm.values.cols());
}

FlowScaler FlowScaler::fit(const Matrix& values, std::size_t t_begin, std::size_t t_end) {
    t_end = std::min(t_end, values.cols());
    if (t_begin >= t_end) throw InputError("FlowScaler::fit: empty bucket range");
    const std::size_t n = values.rows();
    const double count = static_cast<double>(t_end - t_begin);
    FlowScaler s;
    s.mean.resize(n);
    s.stdev.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double m = 0.0;
        for (std::size_t t = t_begin; t < t_end; ++t) m += values(i, t);
        m /= count;
        double var = 0.0;
        for (std::size_t t = t_begin; t < t_end; ++t) {
            const double d = values(i, t) - m;
            var += d * d;
        }
        var /= count;
        s.mean[i] = m;
        s.stdev[i] = std::max(std::sqrt(var), 1e-8);
    }
    return s;
}

FlowScaler FlowScaler::identity(std::size_t n) {
    FlowScaler s;
    s.mean.assign(n, 0.0);
    s.stdev.assign(n, 1.0);
    return s;
}

Matrix FlowScaler::transform(const Matrix& m) const {
    if (m.rows() != mean.size()) {
        throw ShapeError("FlowScaler::transform: matrix rows " + m.shape_str() +
                         " do not match scaler size " + std::to_string(mean.size()));
    }
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = (m(i, j) - mean[i]) / stdev[i];
        }
    }
    return out;
}

Matrix FlowScaler::inverse(const Matrix& m) const {
    if (m.rows() != mean.size()) {
        throw ShapeError("FlowScaler::inverse: matrix rows " + m.shape_str() +
                         " do not match scaler size " + std::to_string(mean.size()));
    }
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = m(i, j) * stdev[i] + mean[i];
        }
    }
    return out;
}

std::vector<ForecastWindow> transform_windows(const std::vector<ForecastWindow>& windows,
                                              const FlowScaler& scaler) {
    std::vector<ForecastWindow> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        out.push_back({scaler.transform(w.x), scaler.transform(w.y), w.t0});
    }
    return out;
}

std::string flow_to_string(const FlowMatrix& fm) {
    std::ostringstream out;
    out << "#begin=" << format_timestamp(fm.begin_time) << " interval_s=" << fm.interval_s
        << "\n";
    for (std::size_t i = 0; i < fm.values.rows(); ++i) {
        out << fm.road_ids[i];
        for (std::size_t t = 0; t < fm.values.cols(); ++t) {
            out << ',' << static_cast<long long>(std::llround(fm.values(i, t)));
        }
        out << "\n";
    }
    return out.str();
}

FlowMatrix flow_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InputError("flow file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string meta_prefix = "#begin=";
    const std::string interval_key = " interval_s=";
    if (line.rfind(meta_prefix, 0) != 0) {
        throw InputError("flow file must start with '#begin=<timestamp> interval_s=<int>'");
    }
    const std::size_t ipos = line.find(interval_key);
    if (ipos == std::string::npos) {
        throw InputError("flow metadata line missing interval_s");
    }
    FlowMatrix fm;
    fm.begin_time = parse_timestamp(line.substr(meta_prefix.size(), ipos - meta_prefix.size()));
    fm.interval_s = parse_duration_seconds(line.substr(ipos + interval_key.size()));

    std::vector<std::vector<double>> rows;
    std::vector<std::string> fields;
    std::size_t line_no = 1;
    std::size_t T = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        split_fields(line, ',', fields);
        if (fields.size() < 2) {
            throw InputError("flow line " + std::to_string(line_no) + ": expected road_id plus counts");
        }
        const std::string road = fields[0];
        if (road.empty()) throw InputError("flow line " + std::to_string(line_no) + ": empty road_id");
        if (!fm.road_index.emplace(road, fm.road_ids.size()).second) {
            throw InputError("flow line " + std::to_string(line_no) + ": duplicate road_id " + road);
        }
        fm.road_ids.push_back(road);
        std::vector<double> row;
        row.reserve(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(fields[i], &pos);
            } catch (const std::exception&) {
                throw InputError("flow line " + std::to_string(line_no) + ": bad count '" +
                                 fields[i] + "'");
            }
            if (pos != fields[i].size() || v < 0.0) {
                throw InputError("flow line " + std::to_string(line_no) + ": bad count '" +
                                 fields[i] + "'");
            }
            row.push_back(v);
        }
        if (T == 0) {
            T = row.size();
        } else if (row.size() != T) {
            throw InputError("flow line " + std::to_string(line_no) + ": expected " +
                             std::to_string(T) + " counts, got " + std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("flow file has no data rows");
    fm.values = Matrix(rows.size(), T);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t t = 0; t < T; ++t) fm.values(i, t) = rows[i][t];
    }
    return fm;
}

void save_flow(const FlowMatrix& fm, const std::string& path) {
    atomic_write_file(path, [&](std::ostream& out) { out << flow_to_string(fm); });
}

FlowMatrix load_flow(const std::string& path) {
    return flow_from_string(read_file(path));
}

}  // namespace fastgcrnn
