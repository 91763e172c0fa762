#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "aqcast/adam.hpp"
#include "aqcast/layers.hpp"
#include "aqcast/timeseries.hpp"
#include "aqcast/windowing.hpp"

namespace aqcast {

enum class ModelKind { FNN, LSTM, BDLSTM, EDLSTM };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Architecture description. Layer sizes default to the reference topology:
/// FNN hidden (64, 32); the recurrent models use 50-cell layers.
struct ModelSpec {
  ModelKind kind = ModelKind::LSTM;
  std::size_t lookback = 5;
  std::size_t input_features = 11;
  std::size_t horizon = 10;
  std::size_t fnn_hidden1 = 64;
  std::size_t fnn_hidden2 = 32;
  std::size_t lstm_hidden = 50;

  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

/// A batch of windows in step-major layout: `steps[j]` is B x F_in holding
/// lookback step j for every window in the batch.
struct WindowBatch {
  std::vector<Matrix> steps;
  Matrix targets;  // B x horizon
  std::size_t batch_size() const { return targets.rows(); }
};

WindowBatch make_batch(const WindowedDataset& ds, std::size_t first, std::size_t count);

/// Per-forward activation record, produced by the matching model. The
/// concrete types are exposed so tests can assert on cached intermediates.
struct ModelCache {
  virtual ~ModelCache() = default;
};

struct FnnCache : ModelCache {
  DenseCache h1, h2, out;
};

struct LstmModelCache : ModelCache {
  LstmCache seq;
  DenseCache out;
};

struct BdCache : ModelCache {
  LstmCache fwd, bwd;
  DenseCache out;
};

struct EdCache : ModelCache {
  LstmCache enc, dec;
  std::vector<DenseCache> head;
};

/// Uniform train/predict surface over the four architectures. forward() is
/// const and safe to call concurrently on a finished model; backward()
/// accumulates gradients and requires exclusive ownership.
class Model {
 public:
  explicit Model(ModelSpec spec) : spec_(spec) {}
  virtual ~Model() = default;

  const ModelSpec& spec() const { return spec_; }

  virtual std::unique_ptr<ModelCache> make_cache() const = 0;
  /// steps: lookback matrices of B x F_in. Returns B x horizon predictions.
  virtual Matrix forward(const std::vector<Matrix>& steps, ModelCache* cache) const = 0;
  /// dy: B x horizon loss gradient; cache must come from the matching forward.
  virtual void backward(const Matrix& dy, const ModelCache& cache) = 0;
  virtual void zero_grads() = 0;
  virtual std::vector<ParamRef> params() = 0;
  virtual void init(Rng& rng) = 0;

  std::size_t param_count();

 protected:
  ModelSpec spec_;
};

/// Dense N*F_in -> h1 -> h2 -> horizon with ReLU hidden activations
/// (activations overridable for linear-model tests).
class FnnModel : public Model {
 public:
  FnnModel(ModelSpec spec, Activation hidden_act = Activation::relu);
  std::unique_ptr<ModelCache> make_cache() const override;
  Matrix forward(const std::vector<Matrix>& steps, ModelCache* cache) const override;
  void backward(const Matrix& dy, const ModelCache& cache) override;
  void zero_grads() override;
  std::vector<ParamRef> params() override;
  void init(Rng& rng) override;

  DenseLayer& hidden1() { return h1_; }
  DenseLayer& hidden2() { return h2_; }
  DenseLayer& output() { return out_; }

 private:
  DenseLayer h1_, h2_, out_;
};

/// LSTM(F_in -> H) over the window; final hidden state -> dense H -> horizon.
class LstmModel : public Model {
 public:
  explicit LstmModel(ModelSpec spec);
  std::unique_ptr<ModelCache> make_cache() const override;
  Matrix forward(const std::vector<Matrix>& steps, ModelCache* cache) const override;
  void backward(const Matrix& dy, const ModelCache& cache) override;
  void zero_grads() override;
  std::vector<ParamRef> params() override;
  void init(Rng& rng) override;

  LstmLayer& lstm() { return lstm_; }
  DenseLayer& output() { return out_; }

 private:
  LstmLayer lstm_;
  DenseLayer out_;
};

/// Forward and reverse-time LSTM layers; their final hidden states are
/// concatenated [forward | backward] into one dense output layer.
class BdLstmModel : public Model {
 public:
  explicit BdLstmModel(ModelSpec spec);
  std::unique_ptr<ModelCache> make_cache() const override;
  Matrix forward(const std::vector<Matrix>& steps, ModelCache* cache) const override;
  void backward(const Matrix& dy, const ModelCache& cache) override;
  void zero_grads() override;
  std::vector<ParamRef> params() override;
  void init(Rng& rng) override;

  LstmLayer& forward_layer() { return fwd_; }
  LstmLayer& backward_layer() { return bwd_; }
  DenseLayer& output() { return out_; }

 private:
  LstmLayer fwd_, bwd_;
  DenseLayer out_;
};

/// Encoder LSTM summarizes the window; its final hidden state, repeated
/// horizon times, drives a decoder LSTM (fresh zero state) whose per-step
/// outputs go through one shared dense H -> 1 head.
class EdLstmModel : public Model {
 public:
  explicit EdLstmModel(ModelSpec spec);
  std::unique_ptr<ModelCache> make_cache() const override;
  Matrix forward(const std::vector<Matrix>& steps, ModelCache* cache) const override;
  void backward(const Matrix& dy, const ModelCache& cache) override;
  void zero_grads() override;
  std::vector<ParamRef> params() override;
  void init(Rng& rng) override;

  LstmLayer& encoder() { return encoder_; }
  LstmLayer& decoder() { return decoder_; }
  DenseLayer& head() { return head_; }

 private:
  LstmLayer encoder_, decoder_;
  DenseLayer head_;
};

/// A model plus everything needed to reproduce and apply it.
struct TrainedModel {
  ModelSpec spec;
  std::unique_ptr<Model> net;
  ScalerParams scaler;  // empty feature set = identity denormalization
  std::vector<double> loss_history;
  std::uint64_t seed = 0;
};

/// Seed-deterministic untrained model realizing the spec.
TrainedModel build_model(const ModelSpec& spec, std::uint64_t seed);

struct TrainOptions {
  std::size_t epochs = 200;
  std::size_t batch_size = 20;
  AdamHyper adam;
};

/// Runs epochs * ceil(M/batch) Adam steps on mean-batch MSE over all
/// horizon outputs, appending the exact per-element mean training loss of
/// each epoch to loss_history. Deterministic given the model's seed.
/// Non-finite loss raises DivergenceError naming the epoch.
void train(TrainedModel& model, const WindowedDataset& train_set, const TrainOptions& opt);

struct Predictions {
  Matrix scaled;        // M x horizon, model units
  Matrix denormalized;  // M x horizon, PM2.5 units via the model's scaler
};

Predictions predict_batch(const TrainedModel& model, const WindowedDataset& ds);

/// Value-exact textual checkpoint (shortest round-trip numbers).
void save_checkpoint(const TrainedModel& model, std::ostream& out);
TrainedModel load_checkpoint(std::istream& in);

/// Layer shapes and parameter counts for audit.
std::string describe_model(const ModelSpec& spec);

/// Max relative error between analytic and central finite-difference
/// gradients of the batch MSE over every parameter; denominator
/// max(|analytic|, |numeric|, 1e-8).
double grad_check(Model& model, const WindowBatch& batch, double epsilon = 1e-5);

}  // namespace aqcast
