#include "fastgcrnn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "fastgcrnn/errors.hpp"

namespace fastgcrnn {

SampleDraw draw_sample(const SamplerDist& dist, std::size_t layer, Rng& rng) {
    const std::size_t t = dist.t_for_layer(layer);
    SampleDraw d;
    d.layer = layer;
    d.indices.reserve(t);
    d.probs_used.reserve(t);
    for (std::size_t j = 0; j < t; ++j) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(dist.cumulative.begin(), dist.cumulative.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - dist.cumulative.begin());
        if (idx >= dist.probs.size()) idx = dist.probs.size() - 1;
        d.indices.push_back(idx);
        d.probs_used.push_back(dist.probs[idx]);
    }
    return d;
}

SampleDraw exhaustive_draw(std::size_t n, std::size_t layer) {
    SampleDraw d;
    d.layer = layer;
    d.exhaustive = true;
    d.indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.indices[i] = i;
    d.probs_used.assign(n, 1.0 / static_cast<double>(n));
    return d;
}

Matrix gcn_dense_preactivation(const NormAdj& a_hat, const Matrix& h, const Matrix& w) {
    return matmul(matmul(a_hat.a_hat, h), w);
}

Matrix gcn_dense_forward(const NormAdj& a_hat, const Matrix& h, const GcnLayerParams& p,
                         GcnCache* cache) {
    Matrix mixed = matmul(a_hat.a_hat, h);
    Matrix out = apply_activation(p.activation, matmul(mixed, p.w.value));
    if (cache) {
        cache->valid = true;
        cache->sampled = false;
        cache->in_rows = h.rows();
        cache->in_cols = h.cols();
        cache->mixed = std::move(mixed);
        cache->out = out;
    }
    return out;
}

namespace {

// a_sel: n x t gather of a_hat columns; h_w: t x d rows h(u_j,:) scaled by
// 1 / (t * q(u_j)) (exactly 1 in exhaustive mode).
void gather_draw(const NormAdj& a_hat, const Matrix& h, const SampleDraw& draw, Matrix& a_sel,
                 Matrix& h_w, std::vector<double>& weights) {
    const std::size_t n = a_hat.n;
    const std::size_t t = draw.indices.size();
    if (t == 0) throw UsageError("sample draw is empty");
    if (draw.probs_used.size() != t) {
        throw UsageError("sample draw indices/probs length mismatch");
    }
    a_sel = Matrix(n, t);
    h_w = Matrix(t, h.cols());
    weights.resize(t);
    for (std::size_t j = 0; j < t; ++j) {
        const std::size_t u = draw.indices[j];
        if (u >= n || u >= h.rows()) {
            throw InputError("sampled node index " + std::to_string(u) + " out of range [0, " +
                             std::to_string(std::min<std::size_t>(n, h.rows())) + ")");
        }
        double wj = 1.0;
        if (!draw.exhaustive) {
            const double q = draw.probs_used[j];
            if (!(q > 0.0)) {
                throw NumericError("zero probability at drawn index " + std::to_string(u));
            }
            wj = 1.0 / (static_cast<double>(t) * q);
        }
        weights[j] = wj;
        for (std::size_t v = 0; v < n; ++v) a_sel(v, j) = a_hat.a_hat(v, u);
        for (std::size_t c = 0; c < h.cols(); ++c) h_w(j, c) = h(u, c) * wj;
    }
}

}  // namespace

Matrix fastgcn_sample_preactivation(const NormAdj& a_hat, const Matrix& h, const Matrix& w,
                                    const SampleDraw& draw) {
    Matrix a_sel, h_w;
    std::vector<double> weights;
    gather_draw(a_hat, h, draw, a_sel, h_w, weights);
    return matmul(a_sel, matmul(h_w, w));
}

Matrix fastgcn_sample_forward(const NormAdj& a_hat, const Matrix& h, const GcnLayerParams& p,
                              const SampleDraw& draw, GcnCache* cache) {
    Matrix a_sel, h_w;
    std::vector<double> weights;
    gather_draw(a_hat, h, draw, a_sel, h_w, weights);
    Matrix mixed = matmul(a_sel, h_w);  // n x d
    Matrix out = apply_activation(p.activation, matmul(mixed, p.w.value));
    if (cache) {
        cache->valid = true;
        cache->sampled = true;
        cache->in_rows = h.rows();
        cache->in_cols = h.cols();
        cache->mixed = std::move(mixed);
        cache->out = out;
        cache->a_sel = std::move(a_sel);
        cache->draw = draw;
    }
    return out;
}

Matrix gcn_backward(const NormAdj& a_hat, GcnLayerParams& p, const GcnCache& cache,
                    const Matrix& upstream) {
    if (!cache.valid) throw UsageError("gcn_backward called without a matching forward cache");
    require_same_shape(upstream, cache.out, "gcn_backward");
    // dL/d(pre) through the activation.
    const Matrix g = hadamard(upstream, activation_grad_from_output(p.activation, cache.out));
    add_in_place(p.w.grad, matmul(transpose(cache.mixed), g));
    const Matrix gw = matmul(g, transpose(p.w.value));  // n x d
    if (!cache.sampled) {
        return matmul(transpose(a_hat.a_hat), gw);
    }
    // Scatter the per-sample gradient back to the drawn input rows with the
    // same 1/(t*q) weights the forward pass used.
    const Matrix ds = matmul(transpose(cache.a_sel), gw);  // t x d
    const std::size_t t = cache.draw.indices.size();
    Matrix dh(cache.in_rows, cache.in_cols);
    for (std::size_t j = 0; j < t; ++j) {
        const std::size_t u = cache.draw.indices[j];
        const double wj = cache.draw.exhaustive
                              ? 1.0
                              : 1.0 / (static_cast<double>(t) * cache.draw.probs_used[j]);
        for (std::size_t c = 0; c < cache.in_cols; ++c) dh(u, c) += wj * ds(j, c);
    }
    return dh;
}

Matrix spatial_forward(const NormAdj& a_hat, const Matrix& x, const SpatialParams& p,
                       const SampleDraw* draws, SpatialCache* cache) {
    GcnCache* c0 = cache ? &cache->c0 : nullptr;
    GcnCache* c1 = cache ? &cache->c1 : nullptr;
    if (!draws) {
        const Matrix h1 = gcn_dense_forward(a_hat, x, p.l0, c0);
        return gcn_dense_forward(a_hat, h1, p.l1, c1);
    }
    const Matrix h1 = fastgcn_sample_forward(a_hat, x, p.l0, draws[0], c0);
    return fastgcn_sample_forward(a_hat, h1, p.l1, draws[1], c1);
}

Matrix spatial_backward(const NormAdj& a_hat, SpatialParams& p, const SpatialCache& cache,
                        const Matrix& upstream) {
    const Matrix d1 = gcn_backward(a_hat, p.l1, cache.c1, upstream);
    return gcn_backward(a_hat, p.l0, cache.c0, d1);
}

GruParams::GruParams(std::size_t in_dim, std::size_t hidden)
    : w_z(in_dim, hidden),
      u_z(hidden, hidden),
      b_z(1, hidden),
      w_r(in_dim, hidden),
      u_r(hidden, hidden),
      b_r(1, hidden),
      w_h(in_dim, hidden),
      u_h(hidden, hidden),
      b_h(1, hidden),
      in_dim(in_dim),
      hidden(hidden) {}

std::vector<Param*> GruParams::params() {
    return {&w_z, &u_z, &b_z, &w_r, &u_r, &b_r, &w_h, &u_h, &b_h};
}

Matrix gru_cell_forward(const Matrix& x, const Matrix& h_prev, const GruParams& p,
                        GruCache* cache) {
    if (x.rows() != h_prev.rows()) {
        throw ShapeError("gru_cell_forward: x " + x.shape_str() + " vs h_prev " +
                         h_prev.shape_str());
    }
    if (x.cols() != p.in_dim || h_prev.cols() != p.hidden) {
        throw ShapeError("gru_cell_forward: expected x cols " + std::to_string(p.in_dim) +
                         " and h cols " + std::to_string(p.hidden) + ", got " + x.shape_str() +
                         " and " + h_prev.shape_str());
    }
    const Matrix z = apply_activation(
        Activation::sigmoid,
        add_row_vector(add(matmul(x, p.w_z.value), matmul(h_prev, p.u_z.value)), p.b_z.value));
    const Matrix r = apply_activation(
        Activation::sigmoid,
        add_row_vector(add(matmul(x, p.w_r.value), matmul(h_prev, p.u_r.value)), p.b_r.value));
    const Matrix rh = hadamard(r, h_prev);
    const Matrix h_tilde = apply_activation(
        Activation::tanh,
        add_row_vector(add(matmul(x, p.w_h.value), matmul(rh, p.u_h.value)), p.b_h.value));
    Matrix h_t(h_prev.rows(), h_prev.cols());
    for (std::size_t i = 0; i < h_t.size(); ++i) {
        const double zi = z.data()[i];
        h_t.data()[i] = (1.0 - zi) * h_prev.data()[i] + zi * h_tilde.data()[i];
    }
    if (cache) {
        cache->valid = true;
        cache->x = x;
        cache->h_prev = h_prev;
        cache->z = z;
        cache->r = r;
        cache->h_tilde = h_tilde;
        cache->rh = rh;
    }
    return h_t;
}

GruGrads gru_cell_backward(GruParams& p, const GruCache& cache, const Matrix& dh_t) {
    if (!cache.valid) {
        throw UsageError("gru_cell_backward called without a matching forward cache");
    }
    require_same_shape(dh_t, cache.z, "gru_cell_backward");

    // h_t = (1-z).h_prev + z.h_tilde
    Matrix dz(dh_t.rows(), dh_t.cols());
    Matrix dh_tilde(dh_t.rows(), dh_t.cols());
    Matrix dh_prev(dh_t.rows(), dh_t.cols());
    for (std::size_t i = 0; i < dh_t.size(); ++i) {
        const double g = dh_t.data()[i];
        dz.data()[i] = g * (cache.h_tilde.data()[i] - cache.h_prev.data()[i]);
        dh_tilde.data()[i] = g * cache.z.data()[i];
        dh_prev.data()[i] = g * (1.0 - cache.z.data()[i]);
    }

    // Candidate branch.
    const Matrix da_h =
        hadamard(dh_tilde, activation_grad_from_output(Activation::tanh, cache.h_tilde));
    add_in_place(p.w_h.grad, matmul(transpose(cache.x), da_h));
    add_in_place(p.u_h.grad, matmul(transpose(cache.rh), da_h));
    add_in_place(p.b_h.grad, column_sums(da_h));
    const Matrix drh = matmul(da_h, transpose(p.u_h.value));
    const Matrix dr = hadamard(drh, cache.h_prev);
    add_in_place(dh_prev, hadamard(drh, cache.r));

    // Reset gate.
    const Matrix da_r = hadamard(dr, activation_grad_from_output(Activation::sigmoid, cache.r));
    add_in_place(p.w_r.grad, matmul(transpose(cache.x), da_r));
    add_in_place(p.u_r.grad, matmul(transpose(cache.h_prev), da_r));
    add_in_place(p.b_r.grad, column_sums(da_r));
    add_in_place(dh_prev, matmul(da_r, transpose(p.u_r.value)));

    // Update gate.
    const Matrix da_z = hadamard(dz, activation_grad_from_output(Activation::sigmoid, cache.z));
    add_in_place(p.w_z.grad, matmul(transpose(cache.x), da_z));
    add_in_place(p.u_z.grad, matmul(transpose(cache.h_prev), da_z));
    add_in_place(p.b_z.grad, column_sums(da_z));
    add_in_place(dh_prev, matmul(da_z, transpose(p.u_z.value)));

    GruGrads grads;
    grads.dx = add(add(matmul(da_h, transpose(p.w_h.value)), matmul(da_r, transpose(p.w_r.value))),
                   matmul(da_z, transpose(p.w_z.value)));
    grads.dh_prev = std::move(dh_prev);
    return grads;
}

void init_glorot(Param& p, Rng& rng) {
    const double fan_in = static_cast<double>(p.value.rows());
    const double fan_out = static_cast<double>(p.value.cols());
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.uniform(-s, s);
    p.zero_grad();
}

}  // namespace fastgcrnn
