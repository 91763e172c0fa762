#include "aqcast/layers.hpp"

#include <cmath>

#include "aqcast/errors.hpp"

namespace aqcast {

namespace {

void apply_sigmoid(Matrix& m) {
  double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = 1.0 / (1.0 + std::exp(-p[i]));
}

void apply_tanh(Matrix& m) {
  double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = std::tanh(p[i]);
}

void init_uniform(Matrix& m, Rng& rng, std::size_t fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = rng.next_range(-bound, bound);
}

}  // namespace

// --- DenseLayer ---------------------------------------------------------

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation act)
    : in_(in), out_(out), act_(act), w_(out, in), b_(1, out), gw_(out, in), gb_(1, out) {
  if (in == 0 || out == 0) throw ShapeError("dense: dimensions must be positive");
}

void DenseLayer::init(Rng& rng) {
  init_uniform(w_, rng, in_);
  b_.fill(0.0);
}

Matrix DenseLayer::forward(const Matrix& x, DenseCache* cache) const {
  if (x.cols() != in_) throw ShapeError("dense forward: input width mismatch");
  Matrix pre = matmul_nt(x, w_);
  add_row_broadcast(pre, b_);
  if (cache) {
    cache->x = x;
    cache->pre = pre;
  }
  if (act_ == Activation::relu) {
    double* p = pre.data();
    for (std::size_t i = 0; i < pre.size(); ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
  }
  return pre;
}

Matrix DenseLayer::backward(const Matrix& dy, const DenseCache& cache) {
  if (!dy.same_shape(cache.pre)) throw StateError("dense backward: cache mismatch");
  Matrix dpre = dy;
  if (act_ == Activation::relu) {
    double* p = dpre.data();
    const double* pre = cache.pre.data();
    for (std::size_t i = 0; i < dpre.size(); ++i)
      if (pre[i] <= 0.0) p[i] = 0.0;
  }
  add_inplace(gw_, matmul_tn(dpre, cache.x));
  add_inplace(gb_, column_sums(dpre));
  return matmul(dpre, w_);
}

void DenseLayer::zero_grads() {
  gw_.fill(0.0);
  gb_.fill(0.0);
}

std::vector<ParamRef> DenseLayer::params(const std::string& prefix) {
  return {{prefix + ".w", &w_, &gw_}, {prefix + ".b", &b_, &gb_}};
}

// --- LstmLayer ------------------------------------------------------------

LstmLayer::LstmLayer(std::size_t input, std::size_t hidden)
    : input_(input),
      hidden_(hidden),
      wi_(hidden, input), wf_(hidden, input), wg_(hidden, input), wo_(hidden, input),
      ri_(hidden, hidden), rf_(hidden, hidden), rg_(hidden, hidden), ro_(hidden, hidden),
      bi_(1, hidden), bf_(1, hidden), bg_(1, hidden), bo_(1, hidden),
      gwi_(hidden, input), gwf_(hidden, input), gwg_(hidden, input), gwo_(hidden, input),
      gri_(hidden, hidden), grf_(hidden, hidden), grg_(hidden, hidden), gro_(hidden, hidden),
      gbi_(1, hidden), gbf_(1, hidden), gbg_(1, hidden), gbo_(1, hidden) {
  if (input == 0 || hidden == 0) throw ShapeError("lstm: dimensions must be positive");
}

void LstmLayer::init(Rng& rng) {
  init_uniform(wi_, rng, input_);
  init_uniform(wf_, rng, input_);
  init_uniform(wg_, rng, input_);
  init_uniform(wo_, rng, input_);
  init_uniform(ri_, rng, hidden_);
  init_uniform(rf_, rng, hidden_);
  init_uniform(rg_, rng, hidden_);
  init_uniform(ro_, rng, hidden_);
  bi_.fill(0.0);
  bf_.fill(1.0);  // open forget gates at the start of training
  bg_.fill(0.0);
  bo_.fill(0.0);
}

void LstmLayer::cell_step(const Matrix& x_t, const Matrix& h_prev, const Matrix& c_prev,
                          Matrix& h_t, Matrix& c_t, LstmCache* cache) const {
  if (x_t.cols() != input_) throw ShapeError("lstm step: input width mismatch");
  if (h_prev.cols() != hidden_ || c_prev.cols() != hidden_ ||
      h_prev.rows() != x_t.rows() || c_prev.rows() != x_t.rows())
    throw ShapeError("lstm step: state shape mismatch");

  auto gate = [&](const Matrix& w, const Matrix& r, const Matrix& b) {
    Matrix a = matmul_nt(x_t, w);
    add_inplace(a, matmul_nt(h_prev, r));
    add_row_broadcast(a, b);
    return a;
  };

  Matrix gi = gate(wi_, ri_, bi_);
  Matrix gf = gate(wf_, rf_, bf_);
  Matrix gg = gate(wg_, rg_, bg_);
  Matrix go = gate(wo_, ro_, bo_);
  apply_sigmoid(gi);
  apply_sigmoid(gf);
  apply_tanh(gg);
  apply_sigmoid(go);

  c_t = hadamard(gf, c_prev);
  add_inplace(c_t, hadamard(gi, gg));
  Matrix tc = c_t;
  apply_tanh(tc);
  h_t = hadamard(go, tc);

  if (cache) {
    cache->x.push_back(x_t);
    cache->gate_i.push_back(std::move(gi));
    cache->gate_f.push_back(std::move(gf));
    cache->gate_g.push_back(std::move(gg));
    cache->gate_o.push_back(std::move(go));
    cache->c.push_back(c_t);
    cache->h.push_back(h_t);
    cache->tanh_c.push_back(std::move(tc));
  }
}

std::vector<Matrix> LstmLayer::forward(const std::vector<Matrix>& xs, LstmCache* cache) const {
  if (xs.empty()) throw ShapeError("lstm forward: empty sequence");
  const std::size_t batch = xs.front().rows();
  Matrix h(batch, hidden_);
  Matrix c(batch, hidden_);
  std::vector<Matrix> hs;
  hs.reserve(xs.size());
  for (const Matrix& x_t : xs) {
    Matrix h_next, c_next;
    cell_step(x_t, h, c, h_next, c_next, cache);
    h = std::move(h_next);
    c = std::move(c_next);
    hs.push_back(h);
  }
  return hs;
}

std::vector<Matrix> LstmLayer::backward(const std::vector<Matrix>& dh_seq,
                                        const LstmCache& cache) {
  const std::size_t steps = cache.steps();
  if (dh_seq.size() != steps || steps == 0)
    throw StateError("lstm backward: gradient/cache step mismatch");
  const std::size_t batch = cache.x.front().rows();

  std::vector<Matrix> dx(steps);
  Matrix dh_carry(batch, hidden_);
  Matrix dc(batch, hidden_);
  const Matrix zero_state(batch, hidden_);

  for (std::size_t s = steps; s-- > 0;) {
    if (!dh_seq[s].same_shape(dh_carry))
      throw StateError("lstm backward: gradient shape mismatch");

    Matrix dh = dh_seq[s];
    add_inplace(dh, dh_carry);

    const Matrix& gi = cache.gate_i[s];
    const Matrix& gf = cache.gate_f[s];
    const Matrix& gg = cache.gate_g[s];
    const Matrix& go = cache.gate_o[s];
    const Matrix& tc = cache.tanh_c[s];
    const Matrix& c_prev = s > 0 ? cache.c[s - 1] : zero_state;
    const Matrix& h_prev = s > 0 ? cache.h[s - 1] : zero_state;

    // dc += dh * o * (1 - tanh(c)^2)
    for (std::size_t i = 0; i < dc.size(); ++i)
      dc.data()[i] += dh.data()[i] * go.data()[i] * (1.0 - tc.data()[i] * tc.data()[i]);

    Matrix da_i(batch, hidden_), da_f(batch, hidden_), da_g(batch, hidden_),
        da_o(batch, hidden_);
    for (std::size_t i = 0; i < dc.size(); ++i) {
      da_o.data()[i] = dh.data()[i] * tc.data()[i] * go.data()[i] * (1.0 - go.data()[i]);
      da_f.data()[i] = dc.data()[i] * c_prev.data()[i] * gf.data()[i] * (1.0 - gf.data()[i]);
      da_i.data()[i] = dc.data()[i] * gg.data()[i] * gi.data()[i] * (1.0 - gi.data()[i]);
      da_g.data()[i] = dc.data()[i] * gi.data()[i] * (1.0 - gg.data()[i] * gg.data()[i]);
    }

    add_inplace(gwi_, matmul_tn(da_i, cache.x[s]));
    add_inplace(gwf_, matmul_tn(da_f, cache.x[s]));
    add_inplace(gwg_, matmul_tn(da_g, cache.x[s]));
    add_inplace(gwo_, matmul_tn(da_o, cache.x[s]));
    add_inplace(gri_, matmul_tn(da_i, h_prev));
    add_inplace(grf_, matmul_tn(da_f, h_prev));
    add_inplace(grg_, matmul_tn(da_g, h_prev));
    add_inplace(gro_, matmul_tn(da_o, h_prev));
    add_inplace(gbi_, column_sums(da_i));
    add_inplace(gbf_, column_sums(da_f));
    add_inplace(gbg_, column_sums(da_g));
    add_inplace(gbo_, column_sums(da_o));

    Matrix d_input = matmul(da_i, wi_);
    add_inplace(d_input, matmul(da_f, wf_));
    add_inplace(d_input, matmul(da_g, wg_));
    add_inplace(d_input, matmul(da_o, wo_));
    dx[s] = std::move(d_input);

    Matrix dh_prev = matmul(da_i, ri_);
    add_inplace(dh_prev, matmul(da_f, rf_));
    add_inplace(dh_prev, matmul(da_g, rg_));
    add_inplace(dh_prev, matmul(da_o, ro_));
    dh_carry = std::move(dh_prev);

    dc = hadamard(dc, gf);
  }
  return dx;
}

void LstmLayer::zero_grads() {
  for (Matrix* g : {&gwi_, &gwf_, &gwg_, &gwo_, &gri_, &grf_, &grg_, &gro_, &gbi_, &gbf_,
                    &gbg_, &gbo_})
    g->fill(0.0);
}

std::vector<ParamRef> LstmLayer::params(const std::string& prefix) {
  return {
      {prefix + ".wi", &wi_, &gwi_}, {prefix + ".wf", &wf_, &gwf_},
      {prefix + ".wg", &wg_, &gwg_}, {prefix + ".wo", &wo_, &gwo_},
      {prefix + ".ri", &ri_, &gri_}, {prefix + ".rf", &rf_, &grf_},
      {prefix + ".rg", &rg_, &grg_}, {prefix + ".ro", &ro_, &gro_},
      {prefix + ".bi", &bi_, &gbi_}, {prefix + ".bf", &bf_, &gbf_},
      {prefix + ".bg", &bg_, &gbg_}, {prefix + ".bo", &bo_, &gbo_},
  };
}

std::size_t LstmLayer::param_count() const {
  return 4 * (hidden_ * (input_ + hidden_) + hidden_);
}

Matrix& LstmLayer::w(char gate) {
  switch (gate) {
    case 'i': return wi_;
    case 'f': return wf_;
    case 'g': return wg_;
    case 'o': return wo_;
  }
  throw RangeError("lstm: unknown gate");
}

Matrix& LstmLayer::r(char gate) {
  switch (gate) {
    case 'i': return ri_;
    case 'f': return rf_;
    case 'g': return rg_;
    case 'o': return ro_;
  }
  throw RangeError("lstm: unknown gate");
}

Matrix& LstmLayer::b(char gate) {
  switch (gate) {
    case 'i': return bi_;
    case 'f': return bf_;
    case 'g': return bg_;
    case 'o': return bo_;
  }
  throw RangeError("lstm: unknown gate");
}

// --- loss -----------------------------------------------------------------

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
  if (!pred.same_shape(target)) throw ShapeError("mse: shape mismatch");
  if (pred.size() == 0) throw ShapeError("mse: empty input");
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double loss = 0.0;
  Matrix grad(pred.rows(), pred.cols());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - target.data()[i];
    loss += d * d;
    grad.data()[i] = 2.0 * d * inv_n;
  }
  return {loss * inv_n, std::move(grad)};
}

}  // namespace aqcast
