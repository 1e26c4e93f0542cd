#pragma once

#include <cstddef>
#include <vector>

#include "fastgcrnn/activation.hpp"
#include "fastgcrnn/graph.hpp"
#include "fastgcrnn/matrix.hpp"
#include "fastgcrnn/param.hpp"
#include "fastgcrnn/rng.hpp"

namespace fastgcrnn {

struct GcnLayerParams {
    Param w;  // in_dim x out_dim
    Activation activation = Activation::relu;

    GcnLayerParams() = default;
    GcnLayerParams(std::size_t in_dim, std::size_t out_dim, Activation act)
        : w(in_dim, out_dim), activation(act) {}
};

/// One i.i.d. with-replacement draw of t_l node indices. A single draw is
/// shared by every output row of the layer it feeds, which keeps the layer a
/// batched matmul. In exhaustive mode the "draw" is every node exactly once
/// and the layer reproduces the dense convolution.
struct SampleDraw {
    std::size_t layer = 0;
    std::vector<std::size_t> indices;
    std::vector<double> probs_used;
    bool exhaustive = false;
};

SampleDraw draw_sample(const SamplerDist& dist, std::size_t layer, Rng& rng);
SampleDraw exhaustive_draw(std::size_t n, std::size_t layer = 0);

/// Forward-pass values needed by the matching backward call.
struct GcnCache {
    bool valid = false;
    bool sampled = false;
    Matrix mixed;  // adjacency-mixed input: a_hat*h (dense), a_sel*h_w (sampled)
    Matrix out;    // post-activation output
    Matrix a_sel;  // n x t slice of a_hat at the drawn columns (sampled only)
    SampleDraw draw;
    std::size_t in_rows = 0;
    std::size_t in_cols = 0;
};

/// Dense graph convolution sigma(a_hat * h * W); exact oracle for the
/// sampled path.
Matrix gcn_dense_forward(const NormAdj& a_hat, const Matrix& h, const GcnLayerParams& p,
                         GcnCache* cache = nullptr);

/// Monte-Carlo layer: row v of the pre-activation is
/// (1/t) * sum_j a_hat(v, u_j) * h(u_j, :) * W / q(u_j).
Matrix fastgcn_sample_forward(const NormAdj& a_hat, const Matrix& h, const GcnLayerParams& p,
                              const SampleDraw& draw, GcnCache* cache = nullptr);

/// Pre-activation halves of the two paths, for estimator statistics.
Matrix gcn_dense_preactivation(const NormAdj& a_hat, const Matrix& h, const Matrix& w);
Matrix fastgcn_sample_preactivation(const NormAdj& a_hat, const Matrix& h, const Matrix& w,
                                    const SampleDraw& draw);

/// Accumulates dL/dW into p.w.grad and returns dL/dh. Gradients of the
/// sampled path flow only through the drawn terms, with the forward weights.
Matrix gcn_backward(const NormAdj& a_hat, GcnLayerParams& p, const GcnCache& cache,
                    const Matrix& upstream);

/// Two stacked graph-convolution layers (fixed depth; more would over-smooth).
struct SpatialParams {
    GcnLayerParams l0, l1;

    SpatialParams() = default;
    SpatialParams(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
                  Activation act)
        : l0(in_dim, hidden_dim, act), l1(hidden_dim, out_dim, act) {}
};

struct SpatialCache {
    GcnCache c0, c1;
};

/// draws == nullptr runs the dense path; otherwise draws[0] and draws[1]
/// feed the two layers.
Matrix spatial_forward(const NormAdj& a_hat, const Matrix& x, const SpatialParams& p,
                       const SampleDraw* draws, SpatialCache* cache = nullptr);
Matrix spatial_backward(const NormAdj& a_hat, SpatialParams& p, const SpatialCache& cache,
                        const Matrix& upstream);

/// Gated recurrent unit applied per node with shared weights.
struct GruParams {
    Param w_z, u_z, b_z;
    Param w_r, u_r, b_r;
    Param w_h, u_h, b_h;
    std::size_t in_dim = 0;
    std::size_t hidden = 0;

    GruParams() = default;
    GruParams(std::size_t in_dim, std::size_t hidden);
    std::vector<Param*> params();
};

struct GruCache {
    bool valid = false;
    Matrix x, h_prev, z, r, h_tilde, rh;  // rh = r (.) h_prev
};

/// z = sig(xWz + hUz + bz); r = sig(xWr + hUr + br);
/// h~ = tanh(xWh + (r.h)Uh + bh); h' = (1-z).h + z.h~
Matrix gru_cell_forward(const Matrix& x, const Matrix& h_prev, const GruParams& p,
                        GruCache* cache = nullptr);

struct GruGrads {
    Matrix dx;
    Matrix dh_prev;
};
GruGrads gru_cell_backward(GruParams& p, const GruCache& cache, const Matrix& dh_t);

/// Glorot-style uniform(-s, s), s = sqrt(6 / (fan_in + fan_out)).
void init_glorot(Param& p, Rng& rng);

}  // namespace fastgcrnn
