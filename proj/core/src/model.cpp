#include "fastgcrnn/model.hpp"

#include <cmath>

#include "fastgcrnn/errors.hpp"

namespace fastgcrnn {

DrawPlan dense_plan() {
    return DrawPlan{};
}

DrawPlan exhaustive_plan() {
    DrawPlan p;
    p.mode = PlanMode::exhaustive;
    return p;
}

DrawPlan sampled_plan(const SamplerDist& dist, std::size_t d_in, std::size_t d_out,
                      double tf_ratio, Rng& rng) {
    if (tf_ratio < 0.0 || tf_ratio > 1.0) {
        throw InputError("teacher forcing ratio must be in [0, 1]");
    }
    DrawPlan p;
    p.mode = PlanMode::sampled;
    p.encoder_draws.resize(d_in);
    for (std::size_t t = 0; t < d_in; ++t) {
        p.encoder_draws[t] = {draw_sample(dist, 0, rng), draw_sample(dist, 1, rng)};
    }
    p.decoder_draws.resize(d_out);
    for (std::size_t t = 0; t < d_out; ++t) {
        p.decoder_draws[t] = {draw_sample(dist, 0, rng), draw_sample(dist, 1, rng)};
    }
    if (d_out > 1) {
        p.teacher.resize(d_out - 1);
        for (std::size_t t = 0; t + 1 < d_out; ++t) p.teacher[t] = rng.uniform() < tf_ratio;
    }
    return p;
}

FastGcrnnModel::FastGcrnnModel(const ModelConfig& c)
    : cfg(c),
      spatial_enc(1, c.spatial_hidden, c.spatial_out, c.spatial_activation),
      spatial_dec(1, c.spatial_hidden, c.spatial_out, c.spatial_activation),
      encoder_gru(c.spatial_out, c.hidden),
      decoder_gru(c.spatial_out, c.hidden),
      readout(c.hidden, 1) {}

void FastGcrnnModel::init_params(Rng& rng) {
    for (auto& [name, p] : named_params()) {
        // Biases start at zero; weight matrices get fan-scaled uniform noise.
        if (name.rfind("b_", 0) == 0 || name.find(".b_") != std::string::npos) {
            p->value = Matrix(p->value.rows(), p->value.cols());
            p->zero_grad();
        } else {
            init_glorot(*p, rng);
        }
    }
}

std::vector<Param*> FastGcrnnModel::params() {
    std::vector<Param*> out;
    for (auto& [name, p] : named_params()) out.push_back(p);
    return out;
}

std::vector<std::pair<std::string, Param*>> FastGcrnnModel::named_params() {
    std::vector<std::pair<std::string, Param*>> out;
    auto add_spatial = [&out](const std::string& prefix, SpatialParams& sp) {
        out.emplace_back(prefix + ".l0.w", &sp.l0.w);
        out.emplace_back(prefix + ".l1.w", &sp.l1.w);
    };
    auto add_gru = [&out](const std::string& prefix, GruParams& g) {
        out.emplace_back(prefix + ".w_z", &g.w_z);
        out.emplace_back(prefix + ".u_z", &g.u_z);
        out.emplace_back(prefix + ".b_z", &g.b_z);
        out.emplace_back(prefix + ".w_r", &g.w_r);
        out.emplace_back(prefix + ".u_r", &g.u_r);
        out.emplace_back(prefix + ".b_r", &g.b_r);
        out.emplace_back(prefix + ".w_h", &g.w_h);
        out.emplace_back(prefix + ".u_h", &g.u_h);
        out.emplace_back(prefix + ".b_h", &g.b_h);
    };
    add_spatial("spatial_enc", spatial_enc);
    if (!cfg.tie_spatial) add_spatial("spatial_dec", spatial_dec);
    add_gru("encoder_gru", encoder_gru);
    add_gru("decoder_gru", decoder_gru);
    out.emplace_back("readout", &readout);
    return out;
}

std::vector<std::pair<std::string, const Param*>> FastGcrnnModel::named_params() const {
    std::vector<std::pair<std::string, const Param*>> out;
    for (auto& [name, p] : const_cast<FastGcrnnModel*>(this)->named_params()) {
        out.emplace_back(name, p);
    }
    return out;
}

namespace {

const SampleDraw* step_draws(const DrawPlan& plan, bool decoder, std::size_t step,
                             std::array<SampleDraw, 2>& exhaustive_storage, std::size_t n) {
    switch (plan.mode) {
        case PlanMode::dense:
            return nullptr;
        case PlanMode::exhaustive:
            exhaustive_storage = {exhaustive_draw(n, 0), exhaustive_draw(n, 1)};
            return exhaustive_storage.data();
        case PlanMode::sampled: {
            const auto& vec = decoder ? plan.decoder_draws : plan.encoder_draws;
            if (step >= vec.size()) {
                throw UsageError("draw plan does not cover step " + std::to_string(step));
            }
            return vec[step].data();
        }
    }
    throw UsageError("unknown plan mode");
}

}  // namespace

Context encode(const FastGcrnnModel& m, const NormAdj& a_hat, const Matrix& x,
               const DrawPlan& plan, EncoderCache* cache) {
    if (x.cols() != m.cfg.d_in) {
        throw ShapeError("encode: input has " + std::to_string(x.cols()) +
                         " columns, model expects d_in = " + std::to_string(m.cfg.d_in));
    }
    if (cache) cache->steps.resize(m.cfg.d_in);
    Matrix h(x.rows(), m.cfg.hidden);
    std::array<SampleDraw, 2> storage;
    for (std::size_t t = 0; t < m.cfg.d_in; ++t) {
        const SampleDraw* draws = step_draws(plan, false, t, storage, a_hat.n);
        StepCache* sc = cache ? &cache->steps[t] : nullptr;
        const Matrix z = spatial_forward(a_hat, column(x, t), m.spatial_enc, draws,
                                         sc ? &sc->spatial : nullptr);
        h = gru_cell_forward(z, h, m.encoder_gru, sc ? &sc->gru : nullptr);
    }
    return Context{std::move(h)};
}

Matrix decode(const FastGcrnnModel& m, const NormAdj& a_hat, const Context& ctx,
              const Matrix& last_frame, const Matrix* y_teacher, const DrawPlan& plan,
              DecoderCache* cache) {
    const std::size_t n = ctx.c.rows();
    const std::size_t d_out = m.cfg.d_out;
    bool any_teacher = false;
    for (bool b : plan.teacher) any_teacher |= b;
    if (any_teacher && !y_teacher) {
        throw UsageError("decode: teacher forcing requested but no teacher data supplied");
    }
    if (cache) cache->steps.resize(d_out);
    Matrix pred(n, d_out);
    Matrix h = ctx.c;
    Matrix step_input = last_frame;
    DecoderInputSource source = DecoderInputSource::last_frame;
    std::array<SampleDraw, 2> storage;
    Matrix prev_pred;
    for (std::size_t t = 0; t < d_out; ++t) {
        if (t > 0) {
            const bool use_teacher = t - 1 < plan.teacher.size() && plan.teacher[t - 1];
            if (use_teacher) {
                step_input = column(*y_teacher, t - 1);
                source = DecoderInputSource::teacher;
            } else {
                step_input = prev_pred;
                source = DecoderInputSource::self_prediction;
            }
        }
        const SampleDraw* draws = step_draws(plan, true, t, storage, a_hat.n);
        DecoderStepCache* sc = cache ? &cache->steps[t] : nullptr;
        const Matrix z = spatial_forward(a_hat, step_input, m.dec_spatial(), draws,
                                         sc ? &sc->spatial : nullptr);
        h = gru_cell_forward(z, h, m.decoder_gru, sc ? &sc->gru : nullptr);
        Matrix p_t = matmul(h, m.readout.value);  // n x 1
        for (std::size_t i = 0; i < n; ++i) pred(i, t) = p_t(i, 0);
        if (sc) {
            sc->h_t = h;
            sc->input = step_input;
            sc->source = source;
        }
        prev_pred = std::move(p_t);
    }
    return pred;
}

Matrix predict(const FastGcrnnModel& m, const NormAdj& a_hat, const Matrix& x,
               const DrawPlan& plan) {
    const Context ctx = encode(m, a_hat, x, plan);
    return decode(m, a_hat, ctx, column(x, x.cols() - 1), nullptr, plan);
}

double mse_loss(const Matrix& pred, const Matrix& target) {
    require_same_shape(pred, target, "mse_loss");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data()[i] - target.data()[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

double forward_loss(const FastGcrnnModel& m, const NormAdj& a_hat, const ForecastWindow& w,
                    const DrawPlan& plan, ForwardCache* cache) {
    const Matrix last_frame = column(w.x, w.x.cols() - 1);
    const Context ctx = encode(m, a_hat, w.x, plan, cache ? &cache->enc : nullptr);
    Matrix pred =
        decode(m, a_hat, ctx, last_frame, &w.y, plan, cache ? &cache->dec : nullptr);
    const double loss = mse_loss(pred, w.y);
    if (cache) {
        cache->pred = std::move(pred);
        cache->last_frame = last_frame;
    }
    return loss;
}

void backward(FastGcrnnModel& m, const NormAdj& a_hat, const ForecastWindow& w,
              const ForwardCache& cache, double upstream_scale) {
    const std::size_t n = cache.pred.rows();
    const std::size_t d_out = m.cfg.d_out;
    if (cache.dec.steps.size() != d_out || cache.enc.steps.size() != m.cfg.d_in) {
        throw UsageError("backward called without a matching forward cache");
    }
    const double scale = 2.0 * upstream_scale / static_cast<double>(cache.pred.size());

    // d(loss)/d(pred_t); later steps add their input gradient to earlier
    // predictions along the autoregressive chain.
    std::vector<Matrix> dpred(d_out);
    for (std::size_t t = 0; t < d_out; ++t) {
        dpred[t] = Matrix(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            dpred[t](i, 0) = scale * (cache.pred(i, t) - w.y(i, t));
        }
    }

    Matrix dh_next;  // dL/dh_t flowing backward through decoder time steps
    for (std::size_t t = d_out; t-- > 0;) {
        const DecoderStepCache& sc = cache.dec.steps[t];
        Matrix dh = matmul(dpred[t], transpose(m.readout.value));  // readout into h_t
        add_in_place(m.readout.grad, matmul(transpose(sc.h_t), dpred[t]));
        if (!dh_next.empty()) add_in_place(dh, dh_next);
        GruGrads g = gru_cell_backward(m.decoder_gru, sc.gru, dh);
        const Matrix dinput = spatial_backward(a_hat, m.dec_spatial(), sc.spatial, g.dx);
        if (sc.source == DecoderInputSource::self_prediction) {
            add_in_place(dpred[t - 1], dinput);
        }
        dh_next = std::move(g.dh_prev);
    }

    // dh_next is now dL/d(context); unroll the encoder.
    for (std::size_t t = m.cfg.d_in; t-- > 0;) {
        const StepCache& sc = cache.enc.steps[t];
        GruGrads g = gru_cell_backward(m.encoder_gru, sc.gru, dh_next);
        spatial_backward(a_hat, m.spatial_enc, sc.spatial, g.dx);  // input frame grads unused
        dh_next = std::move(g.dh_prev);
    }
}

AdamOptimizer::AdamOptimizer(std::vector<Param*> params, double lr, double beta1, double beta2,
                             double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Param* p : params_) {
        m_.emplace_back(p->value.rows(), p->value.cols());
        v_.emplace_back(p->value.rows(), p->value.cols());
    }
}

void AdamOptimizer::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Param* p = params_[k];
        double* m = m_[k].data();
        double* v = v_[k].data();
        const double* g = p->grad.data();
        double* val = p->value.data();
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            val[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
        }
    }
}

SamplerChoice sampler_choice_from_string(const std::string& s) {
    if (s == "dense") return SamplerChoice::dense;
    if (s == "exhaustive") return SamplerChoice::exhaustive;
    if (s == "uniform") return SamplerChoice::uniform;
    if (s == "importance") return SamplerChoice::importance;
    throw InputError("unknown sampler: " + s + " (want dense|exhaustive|uniform|importance)");
}

std::string to_string(SamplerChoice c) {
    switch (c) {
        case SamplerChoice::dense: return "dense";
        case SamplerChoice::exhaustive: return "exhaustive";
        case SamplerChoice::uniform: return "uniform";
        case SamplerChoice::importance: return "importance";
    }
    throw InputError("unknown sampler enum value");
}

double evaluate_rmse(const FastGcrnnModel& m, const NormAdj& a_hat,
                     const std::vector<ForecastWindow>& windows, const FlowScaler& scaler,
                     const DrawPlan& plan) {
    if (windows.empty()) throw InputError("evaluate_rmse: no windows");
    double sq_sum = 0.0;
    std::size_t count = 0;
    for (const auto& w : windows) {
        const Matrix pred_raw = scaler.inverse(predict(m, a_hat, w.x, plan));
        const Matrix target_raw = scaler.inverse(w.y);
        for (std::size_t i = 0; i < pred_raw.size(); ++i) {
            const double d = pred_raw.data()[i] - target_raw.data()[i];
            sq_sum += d * d;
        }
        count += pred_raw.size();
    }
    return std::sqrt(sq_sum / static_cast<double>(count));
}

}  // namespace fastgcrnn
