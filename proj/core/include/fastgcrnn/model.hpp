#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fastgcrnn/ingest.hpp"
#include "fastgcrnn/layers.hpp"

namespace fastgcrnn {

/// How the spatial extractor mixes node information during one pass.
/// dense      - exact convolution, no sampling machinery (reference path)
/// exhaustive - sampled machinery fed every node once (equals dense)
/// sampled    - Monte-Carlo draws from a SamplerDist
enum class PlanMode { dense, exhaustive, sampled };

/// Every random choice of one forward pass, fixed up front so the pass can
/// be replayed exactly (finite-difference checks, reproducible evaluation).
struct DrawPlan {
    PlanMode mode = PlanMode::dense;
    std::vector<std::array<SampleDraw, 2>> encoder_draws;  // per input step
    std::vector<std::array<SampleDraw, 2>> decoder_draws;  // per output step
    std::vector<bool> teacher;                             // decoder steps 2..d_out
};

DrawPlan dense_plan();
DrawPlan exhaustive_plan();
DrawPlan sampled_plan(const SamplerDist& dist, std::size_t d_in, std::size_t d_out,
                      double tf_ratio, Rng& rng);

struct ModelConfig {
    std::size_t d_in = 12;
    std::size_t d_out = 12;
    std::size_t spatial_hidden = 16;
    std::size_t spatial_out = 16;
    std::size_t hidden = 64;
    Activation spatial_activation = Activation::relu;
    bool tie_spatial = false;  // decoder reuses encoder spatial weights
};

/// Seq2Seq encoder-decoder with a two-layer graph-convolution front end per
/// step and a linear readout from hidden state to per-node flow.
struct FastGcrnnModel {
    ModelConfig cfg;
    SpatialParams spatial_enc;
    SpatialParams spatial_dec;  // unused when cfg.tie_spatial
    GruParams encoder_gru;
    GruParams decoder_gru;
    Param readout;  // hidden x 1

    FastGcrnnModel() = default;
    explicit FastGcrnnModel(const ModelConfig& cfg);

    void init_params(Rng& rng);
    const SpatialParams& dec_spatial() const { return cfg.tie_spatial ? spatial_enc : spatial_dec; }
    SpatialParams& dec_spatial() { return cfg.tie_spatial ? spatial_enc : spatial_dec; }

    std::vector<Param*> params();
    std::vector<std::pair<std::string, Param*>> named_params();
    std::vector<std::pair<std::string, const Param*>> named_params() const;
};

struct Context {
    Matrix c;  // n x hidden
};

struct StepCache {
    SpatialCache spatial;
    GruCache gru;
};

struct EncoderCache {
    std::vector<StepCache> steps;
};

enum class DecoderInputSource { last_frame, teacher, self_prediction };

struct DecoderStepCache {
    SpatialCache spatial;
    GruCache gru;
    Matrix h_t;     // n x hidden, feeds the readout
    Matrix input;   // n x 1 frame fed to the spatial extractor
    DecoderInputSource source = DecoderInputSource::last_frame;
};

struct DecoderCache {
    std::vector<DecoderStepCache> steps;
};

Context encode(const FastGcrnnModel& m, const NormAdj& a_hat, const Matrix& x,
               const DrawPlan& plan, EncoderCache* cache = nullptr);

/// Autoregressive decode. Step 1 consumes last_frame (the final observed
/// input column); later steps consume the teacher frame or the previous
/// prediction according to plan.teacher.
Matrix decode(const FastGcrnnModel& m, const NormAdj& a_hat, const Context& ctx,
              const Matrix& last_frame, const Matrix* y_teacher, const DrawPlan& plan,
              DecoderCache* cache = nullptr);

Matrix predict(const FastGcrnnModel& m, const NormAdj& a_hat, const Matrix& x,
               const DrawPlan& plan);

/// Mean squared error over all n * d_out entries.
double mse_loss(const Matrix& pred, const Matrix& target);

struct ForwardCache {
    EncoderCache enc;
    DecoderCache dec;
    Matrix pred;
    Matrix last_frame;
};

double forward_loss(const FastGcrnnModel& m, const NormAdj& a_hat, const ForecastWindow& w,
                    const DrawPlan& plan, ForwardCache* cache = nullptr);

/// Accumulates gradients of upstream_scale * mse_loss(pred, w.y) into the
/// model parameters. Needs the caches of the matching forward_loss call.
void backward(FastGcrnnModel& m, const NormAdj& a_hat, const ForecastWindow& w,
              const ForwardCache& cache, double upstream_scale = 1.0);

/// Adaptive-moment gradient descent with bias correction.
class AdamOptimizer {
public:
    AdamOptimizer(std::vector<Param*> params, double lr, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8);
    void step();
    double lr() const { return lr_; }

private:
    std::vector<Param*> params_;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
};

enum class SamplerChoice { dense, exhaustive, uniform, importance };
SamplerChoice sampler_choice_from_string(const std::string& s);
std::string to_string(SamplerChoice c);

struct TrainConfig {
    std::size_t epochs = 20;
    double lr = 1e-3;
    std::size_t batch_size = 8;
    double tf_ratio = 0.5;
    double clip_norm = 5.0;
    std::uint64_t seed = 1;
    SamplerChoice sampler = SamplerChoice::importance;
    std::vector<std::size_t> t_per_layer = {5, 5};
};

struct EpochStats {
    double train_mse = 0.0;
    std::optional<double> val_rmse;  // raw counts, exhaustive sampler
};

struct TrainResult {
    std::vector<EpochStats> history;
};

/// Windows must already be in scaler space; val RMSE is reported in raw
/// counts via scaler.inverse. Deterministic for a fixed cfg.seed.
TrainResult train(FastGcrnnModel& m, const NormAdj& a_hat,
                  const std::vector<ForecastWindow>& train_windows,
                  const std::vector<ForecastWindow>& val_windows, const FlowScaler& scaler,
                  const TrainConfig& cfg);

/// RMSE in raw counts of model predictions over scaled windows.
double evaluate_rmse(const FastGcrnnModel& m, const NormAdj& a_hat,
                     const std::vector<ForecastWindow>& windows, const FlowScaler& scaler,
                     const DrawPlan& plan);

/// Binary checkpoint, little-endian, magic "FGCRNN1\n"; self-describing
/// tensor records plus a free-form config echo string. A fitted flow scaler
/// rides along so predictions can be mapped back to raw counts.
void save_checkpoint(const FastGcrnnModel& m, const std::string& path,
                     const std::string& config_echo, const FlowScaler* scaler = nullptr);
FastGcrnnModel load_checkpoint(const std::string& path, std::string* config_echo = nullptr,
                               FlowScaler* scaler = nullptr);

}  // namespace fastgcrnn
