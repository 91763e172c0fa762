#include "aqcast/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "aqcast/errors.hpp"

namespace aqcast {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::FNN: return "FNN";
    case ModelKind::LSTM: return "LSTM";
    case ModelKind::BDLSTM: return "BDLSTM";
    case ModelKind::EDLSTM: return "EDLSTM";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "FNN") return ModelKind::FNN;
  if (name == "LSTM") return ModelKind::LSTM;
  if (name == "BDLSTM") return ModelKind::BDLSTM;
  if (name == "EDLSTM") return ModelKind::EDLSTM;
  throw ConfigError("unknown model kind '" + name + "'");
}

void ModelSpec::validate() const {
  if (lookback == 0 || input_features == 0 || horizon == 0)
    throw ShapeError("model spec: lookback, input_features and horizon must be positive");
  if (kind == ModelKind::FNN) {
    if (fnn_hidden1 == 0 || fnn_hidden2 == 0)
      throw ShapeError("model spec: FNN hidden sizes must be positive");
  } else if (lstm_hidden == 0) {
    throw ShapeError("model spec: lstm_hidden must be positive");
  }
}

WindowBatch make_batch(const WindowedDataset& ds, std::size_t first, std::size_t count) {
  if (first + count > ds.window_count()) throw RangeError("make_batch: range out of bounds");
  WindowBatch batch;
  batch.steps.reserve(ds.lookback);
  for (std::size_t step = 0; step < ds.lookback; ++step) {
    Matrix m(count, ds.feature_count);
    for (std::size_t b = 0; b < count; ++b)
      for (std::size_t f = 0; f < ds.feature_count; ++f)
        m(b, f) = ds.input(first + b, step, f);
    batch.steps.push_back(std::move(m));
  }
  batch.targets = Matrix(count, ds.horizon);
  for (std::size_t b = 0; b < count; ++b)
    for (std::size_t h = 0; h < ds.horizon; ++h)
      batch.targets(b, h) = ds.target(first + b, h);
  return batch;
}

std::size_t Model::param_count() {
  std::size_t n = 0;
  for (const ParamRef& p : params()) n += p.value->size();
  return n;
}

namespace {

void check_steps(const std::vector<Matrix>& steps, const ModelSpec& spec) {
  if (steps.size() != spec.lookback)
    throw ShapeError("model forward: expected " + std::to_string(spec.lookback) +
                     " steps, got " + std::to_string(steps.size()));
  for (const Matrix& s : steps)
    if (s.cols() != spec.input_features)
      throw ShapeError("model forward: feature count mismatch");
}

// Window steps flattened to one row per window, column = step * F + f.
Matrix flatten_steps(const std::vector<Matrix>& steps) {
  const std::size_t batch = steps.front().rows();
  const std::size_t f_count = steps.front().cols();
  Matrix flat(batch, steps.size() * f_count);
  for (std::size_t j = 0; j < steps.size(); ++j)
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t f = 0; f < f_count; ++f)
        flat(b, j * f_count + f) = steps[j](b, f);
  return flat;
}

}  // namespace

// --- FNN --------------------------------------------------------------------

FnnModel::FnnModel(ModelSpec spec, Activation hidden_act)
    : Model(spec),
      h1_(spec.lookback * spec.input_features, spec.fnn_hidden1, hidden_act),
      h2_(spec.fnn_hidden1, spec.fnn_hidden2, hidden_act),
      out_(spec.fnn_hidden2, spec.horizon, Activation::identity) {}

std::unique_ptr<ModelCache> FnnModel::make_cache() const { return std::make_unique<FnnCache>(); }

Matrix FnnModel::forward(const std::vector<Matrix>& steps, ModelCache* cache) const {
  check_steps(steps, spec_);
  auto* c = dynamic_cast<FnnCache*>(cache);
  if (cache && !c) throw StateError("fnn: wrong cache type");
  const Matrix flat = flatten_steps(steps);
  const Matrix a1 = h1_.forward(flat, c ? &c->h1 : nullptr);
  const Matrix a2 = h2_.forward(a1, c ? &c->h2 : nullptr);
  return out_.forward(a2, c ? &c->out : nullptr);
}

void FnnModel::backward(const Matrix& dy, const ModelCache& cache) {
  const auto& c = dynamic_cast<const FnnCache&>(cache);
  const Matrix d2 = out_.backward(dy, c.out);
  const Matrix d1 = h2_.backward(d2, c.h2);
  h1_.backward(d1, c.h1);
}

void FnnModel::zero_grads() {
  h1_.zero_grads();
  h2_.zero_grads();
  out_.zero_grads();
}

std::vector<ParamRef> FnnModel::params() {
  std::vector<ParamRef> all;
  for (auto& p : h1_.params("h1")) all.push_back(p);
  for (auto& p : h2_.params("h2")) all.push_back(p);
  for (auto& p : out_.params("out")) all.push_back(p);
  return all;
}

void FnnModel::init(Rng& rng) {
  h1_.init(rng);
  h2_.init(rng);
  out_.init(rng);
}

// --- LSTM -------------------------------------------------------------------

LstmModel::LstmModel(ModelSpec spec)
    : Model(spec),
      lstm_(spec.input_features, spec.lstm_hidden),
      out_(spec.lstm_hidden, spec.horizon, Activation::identity) {}

std::unique_ptr<ModelCache> LstmModel::make_cache() const {
  return std::make_unique<LstmModelCache>();
}

Matrix LstmModel::forward(const std::vector<Matrix>& steps, ModelCache* cache) const {
  check_steps(steps, spec_);
  auto* c = dynamic_cast<LstmModelCache*>(cache);
  if (cache && !c) throw StateError("lstm: wrong cache type");
  const auto hs = lstm_.forward(steps, c ? &c->seq : nullptr);
  return out_.forward(hs.back(), c ? &c->out : nullptr);
}

void LstmModel::backward(const Matrix& dy, const ModelCache& cache) {
  const auto& c = dynamic_cast<const LstmModelCache&>(cache);
  const Matrix dh_last = out_.backward(dy, c.out);
  std::vector<Matrix> dh_seq(c.seq.steps(), Matrix(dh_last.rows(), dh_last.cols()));
  dh_seq.back() = dh_last;
  lstm_.backward(dh_seq, c.seq);
}

void LstmModel::zero_grads() {
  lstm_.zero_grads();
  out_.zero_grads();
}

std::vector<ParamRef> LstmModel::params() {
  std::vector<ParamRef> all;
  for (auto& p : lstm_.params("lstm")) all.push_back(p);
  for (auto& p : out_.params("out")) all.push_back(p);
  return all;
}

void LstmModel::init(Rng& rng) {
  lstm_.init(rng);
  out_.init(rng);
}

// --- BD-LSTM ------------------------------------------------------------

BdLstmModel::BdLstmModel(ModelSpec spec)
    : Model(spec),
      fwd_(spec.input_features, spec.lstm_hidden),
      bwd_(spec.input_features, spec.lstm_hidden),
      out_(2 * spec.lstm_hidden, spec.horizon, Activation::identity) {}

std::unique_ptr<ModelCache> BdLstmModel::make_cache() const {
  return std::make_unique<BdCache>();
}

Matrix BdLstmModel::forward(const std::vector<Matrix>& steps, ModelCache* cache) const {
  check_steps(steps, spec_);
  auto* c = dynamic_cast<BdCache*>(cache);
  if (cache && !c) throw StateError("bdlstm: wrong cache type");

  const auto hs_fwd = fwd_.forward(steps, c ? &c->fwd : nullptr);
  std::vector<Matrix> reversed(steps.rbegin(), steps.rend());
  const auto hs_bwd = bwd_.forward(reversed, c ? &c->bwd : nullptr);

  const Matrix& hf = hs_fwd.back();
  const Matrix& hb = hs_bwd.back();
  Matrix concat(hf.rows(), hf.cols() + hb.cols());
  for (std::size_t r = 0; r < hf.rows(); ++r) {
    for (std::size_t col = 0; col < hf.cols(); ++col) concat(r, col) = hf(r, col);
    for (std::size_t col = 0; col < hb.cols(); ++col) concat(r, hf.cols() + col) = hb(r, col);
  }
  return out_.forward(concat, c ? &c->out : nullptr);
}

void BdLstmModel::backward(const Matrix& dy, const ModelCache& cache) {
  const auto& c = dynamic_cast<const BdCache&>(cache);
  const Matrix d_concat = out_.backward(dy, c.out);

  const std::size_t hidden = spec_.lstm_hidden;
  const std::size_t batch = d_concat.rows();
  Matrix dh_fwd(batch, hidden), dh_bwd(batch, hidden);
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t col = 0; col < hidden; ++col) {
      dh_fwd(r, col) = d_concat(r, col);
      dh_bwd(r, col) = d_concat(r, hidden + col);
    }
  }

  std::vector<Matrix> dh_seq(c.fwd.steps(), Matrix(batch, hidden));
  dh_seq.back() = dh_fwd;
  fwd_.backward(dh_seq, c.fwd);

  std::vector<Matrix> dh_seq_rev(c.bwd.steps(), Matrix(batch, hidden));
  dh_seq_rev.back() = dh_bwd;
  bwd_.backward(dh_seq_rev, c.bwd);
}

void BdLstmModel::zero_grads() {
  fwd_.zero_grads();
  bwd_.zero_grads();
  out_.zero_grads();
}

std::vector<ParamRef> BdLstmModel::params() {
  std::vector<ParamRef> all;
  for (auto& p : fwd_.params("fwd")) all.push_back(p);
  for (auto& p : bwd_.params("bwd")) all.push_back(p);
  for (auto& p : out_.params("out")) all.push_back(p);
  return all;
}

void BdLstmModel::init(Rng& rng) {
  fwd_.init(rng);
  bwd_.init(rng);
  out_.init(rng);
}

// --- ED-LSTM ------------------------------------------------------------

EdLstmModel::EdLstmModel(ModelSpec spec)
    : Model(spec),
      encoder_(spec.input_features, spec.lstm_hidden),
      decoder_(spec.lstm_hidden, spec.lstm_hidden),
      head_(spec.lstm_hidden, 1, Activation::identity) {}

std::unique_ptr<ModelCache> EdLstmModel::make_cache() const { return std::make_unique<EdCache>(); }

Matrix EdLstmModel::forward(const std::vector<Matrix>& steps, ModelCache* cache) const {
  check_steps(steps, spec_);
  auto* c = dynamic_cast<EdCache*>(cache);
  if (cache && !c) throw StateError("edlstm: wrong cache type");

  const auto enc_hs = encoder_.forward(steps, c ? &c->enc : nullptr);
  const Matrix& context = enc_hs.back();

  // Repeat vector: the encoder's final hidden state is the decoder's input
  // at every output step.
  std::vector<Matrix> dec_inputs(spec_.horizon, context);
  const auto dec_hs = decoder_.forward(dec_inputs, c ? &c->dec : nullptr);

  if (c) c->head.resize(spec_.horizon);
  Matrix y(context.rows(), spec_.horizon);
  for (std::size_t t = 0; t < spec_.horizon; ++t) {
    const Matrix y_t = head_.forward(dec_hs[t], c ? &c->head[t] : nullptr);
    for (std::size_t b = 0; b < y.rows(); ++b) y(b, t) = y_t(b, 0);
  }
  return y;
}

void EdLstmModel::backward(const Matrix& dy, const ModelCache& cache) {
  const auto& c = dynamic_cast<const EdCache&>(cache);
  const std::size_t batch = dy.rows();
  const std::size_t hidden = spec_.lstm_hidden;

  std::vector<Matrix> dh_dec(spec_.horizon);
  for (std::size_t t = 0; t < spec_.horizon; ++t) {
    Matrix dy_t(batch, 1);
    for (std::size_t b = 0; b < batch; ++b) dy_t(b, 0) = dy(b, t);
    dh_dec[t] = head_.backward(dy_t, c.head[t]);
  }

  const auto d_dec_inputs = decoder_.backward(dh_dec, c.dec);

  // Every decoder step consumed the same repeated context vector.
  Matrix d_context(batch, hidden);
  for (const Matrix& d : d_dec_inputs) add_inplace(d_context, d);

  std::vector<Matrix> dh_enc(c.enc.steps(), Matrix(batch, hidden));
  dh_enc.back() = std::move(d_context);
  encoder_.backward(dh_enc, c.enc);
}

void EdLstmModel::zero_grads() {
  encoder_.zero_grads();
  decoder_.zero_grads();
  head_.zero_grads();
}

std::vector<ParamRef> EdLstmModel::params() {
  std::vector<ParamRef> all;
  for (auto& p : encoder_.params("enc")) all.push_back(p);
  for (auto& p : decoder_.params("dec")) all.push_back(p);
  for (auto& p : head_.params("head")) all.push_back(p);
  return all;
}

void EdLstmModel::init(Rng& rng) {
  encoder_.init(rng);
  decoder_.init(rng);
  head_.init(rng);
}

// --- build / train / predict ----------------------------------------------

namespace {

std::unique_ptr<Model> instantiate(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::FNN: return std::make_unique<FnnModel>(spec);
    case ModelKind::LSTM: return std::make_unique<LstmModel>(spec);
    case ModelKind::BDLSTM: return std::make_unique<BdLstmModel>(spec);
    case ModelKind::EDLSTM: return std::make_unique<EdLstmModel>(spec);
  }
  throw ConfigError("unknown model kind");
}

}  // namespace

TrainedModel build_model(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  TrainedModel model;
  model.spec = spec;
  model.net = instantiate(spec);
  model.seed = seed;
  Rng rng(seed);
  model.net->init(rng);
  return model;
}

void train(TrainedModel& model, const WindowedDataset& train_set, const TrainOptions& opt) {
  if (opt.batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (train_set.feature_count != model.spec.input_features ||
      train_set.lookback != model.spec.lookback || train_set.horizon != model.spec.horizon)
    throw ShapeError("train: dataset shape does not match model spec");

  const std::size_t window_count = train_set.window_count();
  if (window_count == 0) throw InsufficientDataError("train: empty dataset");

  AdamOptimizer adam(opt.adam);
  const auto refs = model.net->params();
  adam.attach(refs);

  const double total_elements =
      static_cast<double>(window_count) * static_cast<double>(train_set.horizon);

  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    double epoch_sq_sum = 0.0;
    for (std::size_t first = 0; first < window_count; first += opt.batch_size) {
      const std::size_t count = std::min(opt.batch_size, window_count - first);
      const WindowBatch batch = make_batch(train_set, first, count);

      auto cache = model.net->make_cache();
      const Matrix pred = model.net->forward(batch.steps, cache.get());
      const auto [loss, grad] = mse_loss(pred, batch.targets);
      if (!std::isfinite(loss))
        throw DivergenceError("train: non-finite loss in epoch " + std::to_string(epoch),
                              epoch);
      epoch_sq_sum += loss * static_cast<double>(pred.size());

      model.net->zero_grads();
      model.net->backward(grad, *cache);
      adam.step(refs);
    }
    model.loss_history.push_back(epoch_sq_sum / total_elements);
  }
}

Predictions predict_batch(const TrainedModel& model, const WindowedDataset& ds) {
  if (ds.window_count() == 0)
    return {Matrix(0, model.spec.horizon), Matrix(0, model.spec.horizon)};
  if (ds.feature_count != model.spec.input_features || ds.lookback != model.spec.lookback)
    throw ShapeError("predict: dataset shape does not match model spec");

  const WindowBatch batch = make_batch(ds, 0, ds.window_count());
  Predictions out;
  out.scaled = model.net->forward(batch.steps, nullptr);

  out.denormalized = out.scaled;
  if (!model.scaler.feature_names.empty()) {
    const std::size_t pm25 = model.scaler.feature_index(kPm25);
    for (std::size_t i = 0; i < out.denormalized.size(); ++i)
      out.denormalized.data()[i] = model.scaler.invert_value(pm25, out.denormalized.data()[i]);
  }
  return out;
}

// --- checkpoint ------------------------------------------------------------

namespace {

void write_double(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

double read_double(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw ParseError("checkpoint: unexpected end of stream");
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw ParseError("checkpoint: bad number '" + token + "'");
  return v;
}

std::string expect_key(std::istream& in, const std::string& key) {
  std::string k, v;
  if (!(in >> k >> v) || k != key)
    throw ParseError("checkpoint: expected '" + key + "', got '" + k + "'");
  return v;
}

}  // namespace

void save_checkpoint(const TrainedModel& model, std::ostream& out) {
  out << "aqcast-checkpoint v1\n";
  out << "kind " << to_string(model.spec.kind) << '\n';
  out << "lookback " << model.spec.lookback << '\n';
  out << "features " << model.spec.input_features << '\n';
  out << "horizon " << model.spec.horizon << '\n';
  out << "fnn_hidden " << model.spec.fnn_hidden1 << ' ' << model.spec.fnn_hidden2 << '\n';
  out << "lstm_hidden " << model.spec.lstm_hidden << '\n';
  out << "seed " << model.seed << '\n';

  out << "scaler " << model.scaler.feature_names.size() << '\n';
  for (std::size_t f = 0; f < model.scaler.feature_names.size(); ++f) {
    out << model.scaler.feature_names[f] << ' ';
    write_double(out, model.scaler.minimum[f]);
    out << ' ';
    write_double(out, model.scaler.maximum[f]);
    out << '\n';
  }

  out << "loss_history " << model.loss_history.size() << '\n';
  for (double v : model.loss_history) {
    write_double(out, v);
    out << '\n';
  }

  auto refs = const_cast<Model*>(model.net.get())->params();
  out << "blocks " << refs.size() << '\n';
  for (const ParamRef& p : refs) {
    out << p.name << ' ' << p.value->rows() << ' ' << p.value->cols() << '\n';
    for (std::size_t r = 0; r < p.value->rows(); ++r) {
      for (std::size_t c = 0; c < p.value->cols(); ++c) {
        if (c) out << ' ';
        write_double(out, (*p.value)(r, c));
      }
      out << '\n';
    }
  }
}

TrainedModel load_checkpoint(std::istream& in) {
  std::string magic, version;
  if (!(in >> magic >> version) || magic != "aqcast-checkpoint" || version != "v1")
    throw ParseError("checkpoint: bad magic/version");

  ModelSpec spec;
  spec.kind = model_kind_from_string(expect_key(in, "kind"));
  spec.lookback = std::stoull(expect_key(in, "lookback"));
  spec.input_features = std::stoull(expect_key(in, "features"));
  spec.horizon = std::stoull(expect_key(in, "horizon"));
  {
    std::string k;
    std::size_t h1, h2;
    if (!(in >> k >> h1 >> h2) || k != "fnn_hidden")
      throw ParseError("checkpoint: expected fnn_hidden");
    spec.fnn_hidden1 = h1;
    spec.fnn_hidden2 = h2;
  }
  spec.lstm_hidden = std::stoull(expect_key(in, "lstm_hidden"));
  const std::uint64_t seed = std::stoull(expect_key(in, "seed"));

  TrainedModel model = build_model(spec, seed);

  const std::size_t scaler_n = std::stoull(expect_key(in, "scaler"));
  for (std::size_t f = 0; f < scaler_n; ++f) {
    std::string name;
    if (!(in >> name)) throw ParseError("checkpoint: truncated scaler");
    model.scaler.feature_names.push_back(name);
    model.scaler.minimum.push_back(read_double(in));
    model.scaler.maximum.push_back(read_double(in));
  }

  const std::size_t loss_n = std::stoull(expect_key(in, "loss_history"));
  model.loss_history.resize(loss_n);
  for (std::size_t i = 0; i < loss_n; ++i) model.loss_history[i] = read_double(in);

  const std::size_t block_n = std::stoull(expect_key(in, "blocks"));
  auto refs = model.net->params();
  if (block_n != refs.size()) throw ParseError("checkpoint: block count mismatch");
  for (ParamRef& p : refs) {
    std::string name;
    std::size_t rows, cols;
    if (!(in >> name >> rows >> cols)) throw ParseError("checkpoint: truncated block header");
    if (name != p.name || rows != p.value->rows() || cols != p.value->cols())
      throw ParseError("checkpoint: block '" + name + "' does not match spec");
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) (*p.value)(r, c) = read_double(in);
  }
  return model;
}

// --- describe ----------------------------------------------------------------

std::string describe_model(const ModelSpec& spec) {
  spec.validate();
  std::ostringstream out;
  auto dense_line = [&out](const char* name, std::size_t out_n, std::size_t in_n) {
    out << "  layer " << name << ": " << out_n << 'x' << in_n << " + " << out_n
        << " bias, params " << (out_n * in_n + out_n) << '\n';
  };
  auto lstm_line = [&out](const char* name, std::size_t in_n, std::size_t hidden) {
    const std::size_t count = 4 * (hidden * (in_n + hidden) + hidden);
    out << "  layer " << name << ": hidden " << hidden << ", input " << in_n << ", params "
        << count << '\n';
  };

  out << "model " << to_string(spec.kind) << '\n';
  std::size_t total = 0;
  switch (spec.kind) {
    case ModelKind::FNN: {
      const std::size_t width = spec.lookback * spec.input_features;
      out << "  input_width " << width << '\n';
      dense_line("dense_h1", spec.fnn_hidden1, width);
      dense_line("dense_h2", spec.fnn_hidden2, spec.fnn_hidden1);
      dense_line("dense_out", spec.horizon, spec.fnn_hidden2);
      total = spec.fnn_hidden1 * width + spec.fnn_hidden1 +
              spec.fnn_hidden2 * spec.fnn_hidden1 + spec.fnn_hidden2 +
              spec.horizon * spec.fnn_hidden2 + spec.horizon;
      break;
    }
    case ModelKind::LSTM: {
      out << "  input (" << spec.lookback << ',' << spec.input_features << ")\n";
      lstm_line("lstm", spec.input_features, spec.lstm_hidden);
      dense_line("dense_out", spec.horizon, spec.lstm_hidden);
      total = 4 * (spec.lstm_hidden * (spec.input_features + spec.lstm_hidden) +
                   spec.lstm_hidden) +
              spec.horizon * spec.lstm_hidden + spec.horizon;
      break;
    }
    case ModelKind::BDLSTM: {
      out << "  input (" << spec.lookback << ',' << spec.input_features << ")\n";
      lstm_line("lstm_forward", spec.input_features, spec.lstm_hidden);
      lstm_line("lstm_backward", spec.input_features, spec.lstm_hidden);
      dense_line("dense_out", spec.horizon, 2 * spec.lstm_hidden);
      total = 2 * 4 *
                  (spec.lstm_hidden * (spec.input_features + spec.lstm_hidden) +
                   spec.lstm_hidden) +
              spec.horizon * 2 * spec.lstm_hidden + spec.horizon;
      break;
    }
    case ModelKind::EDLSTM: {
      out << "  input (" << spec.lookback << ',' << spec.input_features << ")\n";
      lstm_line("lstm_encoder", spec.input_features, spec.lstm_hidden);
      lstm_line("lstm_decoder", spec.lstm_hidden, spec.lstm_hidden);
      dense_line("dense_head", 1, spec.lstm_hidden);
      total = 4 * (spec.lstm_hidden * (spec.input_features + spec.lstm_hidden) +
                   spec.lstm_hidden) +
              4 * (spec.lstm_hidden * (2 * spec.lstm_hidden) + spec.lstm_hidden) +
              spec.lstm_hidden + 1;
      break;
    }
  }
  out << "  output " << spec.horizon << '\n';
  out << "  total_params " << total << '\n';
  return out.str();
}

// --- gradient check ---------------------------------------------------------

double grad_check(Model& model, const WindowBatch& batch, double epsilon) {
  if (epsilon <= 0.0) throw RangeError("grad_check: epsilon must be positive");

  auto cache = model.make_cache();
  const Matrix pred = model.forward(batch.steps, cache.get());
  const auto [loss, dpred] = mse_loss(pred, batch.targets);
  (void)loss;
  model.zero_grads();
  model.backward(dpred, *cache);

  std::vector<Matrix> analytic;
  for (const ParamRef& p : model.params()) analytic.push_back(*p.grad);

  auto loss_at = [&]() {
    const Matrix y = model.forward(batch.steps, nullptr);
    return mse_loss(y, batch.targets).loss;
  };

  double max_rel = 0.0;
  const auto refs = model.params();
  for (std::size_t b = 0; b < refs.size(); ++b) {
    Matrix& value = *refs[b].value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      value.data()[i] = saved + epsilon;
      const double loss_plus = loss_at();
      value.data()[i] = saved - epsilon;
      const double loss_minus = loss_at();
      value.data()[i] = saved;

      const double numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
      const double a = analytic[b].data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace aqcast
