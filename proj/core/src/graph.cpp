#include "fastgcrnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "fastgcrnn/errors.hpp"
#include "fastgcrnn/io_util.hpp"

namespace fastgcrnn {

namespace {

// Union-find over endpoint indices.
struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

RoadGraph finish_graph(std::vector<std::string> sorted_ids,
                       std::set<std::pair<std::size_t, std::size_t>> edge_set) {
    RoadGraph g;
    g.n = sorted_ids.size();
    g.node_ids = std::move(sorted_ids);
    g.edges.assign(edge_set.begin(), edge_set.end());
    g.adjacency = Matrix(g.n, g.n);
    for (const auto& [i, j] : g.edges) {
        g.adjacency(i, j) = 1.0;
        g.adjacency(j, i) = 1.0;
    }
    return g;
}

std::vector<std::string> sorted_unique_ids(std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 1; i < ids.size(); ++i) {
        if (ids[i] == ids[i - 1]) throw InputError("duplicate road_id: " + ids[i]);
    }
    return ids;
}

}  // namespace

std::size_t RoadGraph::index_of(const std::string& road_id) const {
    const auto it = std::lower_bound(node_ids.begin(), node_ids.end(), road_id);
    if (it == node_ids.end() || *it != road_id) {
        throw InputError("unknown road_id: " + road_id);
    }
    return static_cast<std::size_t>(it - node_ids.begin());
}

std::vector<std::size_t> RoadGraph::degrees() const {
    std::vector<std::size_t> d(n, 0);
    for (const auto& [i, j] : edges) {
        ++d[i];
        ++d[j];
    }
    return d;
}

RoadGraph build_road_graph(const std::vector<RoadSegment>& segments, double snap_eps) {
    if (snap_eps < 0.0) throw InputError("snap tolerance must be nonnegative");
    std::vector<std::string> ids;
    ids.reserve(segments.size());
    for (const auto& s : segments) {
        if (s.road_id.empty()) throw InputError("empty road_id in segment list");
        if (!std::isfinite(s.ax) || !std::isfinite(s.ay) || !std::isfinite(s.bx) ||
            !std::isfinite(s.by)) {
            throw InputError("non-finite coordinate for road_id: " + s.road_id);
        }
        ids.push_back(s.road_id);
    }
    ids = sorted_unique_ids(std::move(ids));

    // Endpoint k belongs to road k/2 in sorted order.
    const std::size_t n = ids.size();
    std::vector<double> px(2 * n), py(2 * n);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[ids[i]] = i;
    for (const auto& s : segments) {
        const std::size_t i = index[s.road_id];
        px[2 * i] = s.ax;
        py[2 * i] = s.ay;
        px[2 * i + 1] = s.bx;
        py[2 * i + 1] = s.by;
    }

    // Snap endpoints within snap_eps into intersection clusters using a
    // grid hash; only neighboring cells need pairwise checks.
    DisjointSet ds(2 * n);
    const double cell = snap_eps > 0.0 ? snap_eps : 1.0;
    std::map<std::pair<long long, long long>, std::vector<std::size_t>> grid;
    auto cell_of = [cell](double x, double y) {
        return std::make_pair(static_cast<long long>(std::floor(x / cell)),
                              static_cast<long long>(std::floor(y / cell)));
    };
    for (std::size_t k = 0; k < 2 * n; ++k) grid[cell_of(px[k], py[k])].push_back(k);
    const double eps2 = snap_eps * snap_eps;
    for (std::size_t k = 0; k < 2 * n; ++k) {
        const auto [cx, cy] = cell_of(px[k], py[k]);
        for (long long dx = -1; dx <= 1; ++dx) {
            for (long long dy = -1; dy <= 1; ++dy) {
                const auto it = grid.find({cx + dx, cy + dy});
                if (it == grid.end()) continue;
                for (std::size_t other : it->second) {
                    if (other <= k) continue;
                    const double ddx = px[k] - px[other];
                    const double ddy = py[k] - py[other];
                    if (ddx * ddx + ddy * ddy <= eps2) ds.unite(k, other);
                }
            }
        }
    }

    std::set<std::pair<std::size_t, std::size_t>> edge_set;
    std::unordered_map<std::size_t, std::vector<std::size_t>> cluster_roads;
    for (std::size_t k = 0; k < 2 * n; ++k) cluster_roads[ds.find(k)].push_back(k / 2);
    for (auto& [root, roads] : cluster_roads) {
        std::sort(roads.begin(), roads.end());
        roads.erase(std::unique(roads.begin(), roads.end()), roads.end());
        for (std::size_t a = 0; a < roads.size(); ++a) {
            for (std::size_t b = a + 1; b < roads.size(); ++b) {
                edge_set.emplace(roads[a], roads[b]);
            }
        }
    }
    return finish_graph(std::move(ids), std::move(edge_set));
}

RoadGraph build_road_graph(const std::vector<std::string>& node_ids,
                           const std::vector<std::pair<std::string, std::string>>& edges) {
    for (const auto& id : node_ids) {
        if (id.empty()) throw InputError("empty road_id in node list");
    }
    auto ids = sorted_unique_ids(node_ids);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

    std::set<std::pair<std::size_t, std::size_t>> edge_set;
    for (const auto& [a, b] : edges) {
        const auto ia = index.find(a);
        const auto ib = index.find(b);
        if (ia == index.end()) throw InputError("edge references unknown road_id: " + a);
        if (ib == index.end()) throw InputError("edge references unknown road_id: " + b);
        if (ia->second == ib->second) throw InputError("self edge on road_id: " + a);
        edge_set.emplace(std::min(ia->second, ib->second), std::max(ia->second, ib->second));
    }
    return finish_graph(std::move(ids), std::move(edge_set));
}

NormAdj normalize_adjacency(const RoadGraph& g) {
    NormAdj na;
    na.n = g.n;
    // d_i >= 1 thanks to the self loop, so the rescale never divides by zero.
    std::vector<double> inv_sqrt_d(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        double d = 1.0;
        for (std::size_t j = 0; j < g.n; ++j) d += g.adjacency(i, j);
        inv_sqrt_d[i] = 1.0 / std::sqrt(d);
    }
    na.a_hat = Matrix(g.n, g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t j = 0; j < g.n; ++j) {
            const double a_tilde = g.adjacency(i, j) + (i == j ? 1.0 : 0.0);
            if (a_tilde != 0.0) na.a_hat(i, j) = inv_sqrt_d[i] * a_tilde * inv_sqrt_d[j];
        }
    }
    return na;
}

std::size_t SamplerDist::t_for_layer(std::size_t layer) const {
    if (t_per_layer.empty()) throw UsageError("SamplerDist has no sample sizes");
    return t_per_layer[std::min(layer, t_per_layer.size() - 1)];
}

namespace {

SamplerDist finalize_dist(std::vector<double> probs, SamplerMode mode,
                          std::vector<std::size_t> t_per_layer) {
    if (t_per_layer.empty()) throw InputError("t_per_layer must not be empty");
    for (std::size_t t : t_per_layer) {
        if (t < 1) throw InputError("every per-layer sample count must be >= 1");
    }
    SamplerDist d;
    d.probs = std::move(probs);
    d.mode = mode;
    d.t_per_layer = std::move(t_per_layer);
    d.cumulative.resize(d.probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.probs.size(); ++i) {
        acc += d.probs[i];
        d.cumulative[i] = acc;
    }
    if (!d.cumulative.empty()) d.cumulative.back() = 1.0;
    return d;
}

}  // namespace

SamplerDist uniform_distribution(std::size_t n, std::vector<std::size_t> t_per_layer) {
    if (n == 0) throw InputError("uniform_distribution: empty node set");
    return finalize_dist(std::vector<double>(n, 1.0 / static_cast<double>(n)),
                         SamplerMode::uniform, std::move(t_per_layer));
}

SamplerDist importance_distribution(const NormAdj& na, std::vector<std::size_t> t_per_layer) {
    if (na.n == 0) throw InputError("importance_distribution: empty graph");
    std::vector<double> sq(na.n, 0.0);
    double total = 0.0;
    for (std::size_t u = 0; u < na.n; ++u) {
        double s = 0.0;
        for (std::size_t v = 0; v < na.n; ++v) {
            const double a = na.a_hat(v, u);
            s += a * a;
        }
        sq[u] = s;
        total += s;
    }
    for (double& v : sq) v /= total;
    return finalize_dist(std::move(sq), SamplerMode::importance, std::move(t_per_layer));
}

DegreeHistogram degree_histogram(const RoadGraph& g) {
    DegreeHistogram h;
    for (std::size_t d : g.degrees()) ++h.counts[d];
    std::size_t running = 0;
    for (const auto& [deg, cnt] : h.counts) {
        running += cnt;
        h.cumulative.emplace_back(deg, static_cast<double>(running) / static_cast<double>(g.n));
    }
    return h;
}

std::string graph_to_string(const RoadGraph& g) {
    std::ostringstream out;
    for (const auto& id : g.node_ids) out << "#node " << id << "\n";
    for (const auto& [i, j] : g.edges) out << g.node_ids[i] << "," << g.node_ids[j] << "\n";
    return out.str();
}

RoadGraph graph_from_string(const std::string& text) {
    std::vector<std::string> ids;
    std::vector<std::pair<std::string, std::string>> edges;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("#node ", 0) == 0) {
            std::string id = line.substr(6);
            if (id.empty()) throw InputError("graph line " + std::to_string(line_no) +
                                             ": empty node id");
            ids.push_back(std::move(id));
            continue;
        }
        if (line[0] == '#') continue;  // other comment lines ignored
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InputError("graph line " + std::to_string(line_no) +
                             ": expected 'id_a,id_b', got: " + line);
        }
        edges.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    }
    return build_road_graph(ids, edges);
}

void save_graph(const RoadGraph& g, const std::string& path) {
    atomic_write_file(path, [&](std::ostream& out) { out << graph_to_string(g); });
}

RoadGraph load_graph(const std::string& path) {
    return graph_from_string(read_file(path));
}

}  // namespace fastgcrnn
