#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fastgcrnn/matrix.hpp"

namespace fastgcrnn {

/// Road-dual graph: road segments are nodes, shared intersections are edges.
/// Node ids are canonicalized to sorted order at construction.
struct RoadGraph {
    std::size_t n = 0;
    std::vector<std::string> node_ids;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j, sorted, unique
    Matrix adjacency;                                        // n x n, 0/1, zero diagonal

    std::size_t index_of(const std::string& road_id) const;
    std::vector<std::size_t> degrees() const;  // raw adjacency, no self loop
};

struct RoadSegment {
    std::string road_id;
    double ax = 0.0, ay = 0.0;
    double bx = 0.0, by = 0.0;
};

/// Two roads are adjacent iff they share an endpoint within snap_eps.
RoadGraph build_road_graph(const std::vector<RoadSegment>& segments, double snap_eps = 1e-6);

/// Explicit wiring; edge ids must appear in node_ids.
RoadGraph build_road_graph(const std::vector<std::string>& node_ids,
                           const std::vector<std::pair<std::string, std::string>>& edges);

/// Symmetrically normalized adjacency with self loops:
/// a_hat = D^{-1/2} (A + I) D^{-1/2} with D_i the row sums of A + I.
struct NormAdj {
    std::size_t n = 0;
    Matrix a_hat;
};
NormAdj normalize_adjacency(const RoadGraph& g);

enum class SamplerMode { uniform, importance };

/// Per-node sampling probabilities plus per-layer sample counts.
struct SamplerDist {
    std::vector<double> probs;       // >= 0, sums to 1
    std::vector<double> cumulative;  // prefix sums, back() == 1
    SamplerMode mode = SamplerMode::uniform;
    std::vector<std::size_t> t_per_layer;

    std::size_t n() const { return probs.size(); }
    std::size_t t_for_layer(std::size_t layer) const;
};

SamplerDist uniform_distribution(std::size_t n, std::vector<std::size_t> t_per_layer);

/// q(u) proportional to the squared column norm of a_hat; the
/// variance-minimizing choice for the sampled layer estimator.
SamplerDist importance_distribution(const NormAdj& na, std::vector<std::size_t> t_per_layer);

struct DegreeHistogram {
    std::map<std::size_t, std::size_t> counts;               // degree -> node count
    std::vector<std::pair<std::size_t, double>> cumulative;  // share of nodes with degree <= d
};
DegreeHistogram degree_histogram(const RoadGraph& g);

/// Plain-text graph file: "#node <road_id>" manifest lines first (so isolated
/// nodes survive round trips), then one "<id_a>,<id_b>" line per edge.
std::string graph_to_string(const RoadGraph& g);
RoadGraph graph_from_string(const std::string& text);
void save_graph(const RoadGraph& g, const std::string& path);
RoadGraph load_graph(const std::string& path);

}  // namespace fastgcrnn
