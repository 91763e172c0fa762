#include "aqcast/adam.hpp"

#include <cmath>

#include "aqcast/errors.hpp"

namespace aqcast {

AdamOptimizer::AdamOptimizer(AdamHyper hyper) : hyper_(hyper) {}

void AdamOptimizer::attach(const std::vector<ParamRef>& params) {
  m_.clear();
  v_.clear();
  t_ = 0;
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const ParamRef& p : params) {
    m_.emplace_back(p.value->size(), 0.0);
    v_.emplace_back(p.value->size(), 0.0);
  }
}

void AdamOptimizer::step(const std::vector<ParamRef>& params) {
  if (params.size() != m_.size()) throw ShapeError("adam: parameter set changed since attach");
  ++t_;
  const double corr1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(t_));
  const double corr2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));
  for (std::size_t b = 0; b < params.size(); ++b) {
    Matrix& value = *params[b].value;
    const Matrix& grad = *params[b].grad;
    if (value.size() != m_[b].size() || !value.same_shape(grad))
      throw ShapeError("adam: block shape mismatch at '" + params[b].name + "'");
    double* theta = value.data();
    const double* g = grad.data();
    double* m = m_[b].data();
    double* v = v_[b].data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = hyper_.beta1 * m[i] + (1.0 - hyper_.beta1) * g[i];
      v[i] = hyper_.beta2 * v[i] + (1.0 - hyper_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / corr1;
      const double v_hat = v[i] / corr2;
      theta[i] -= hyper_.alpha * m_hat / (std::sqrt(v_hat) + hyper_.epsilon);
    }
  }
}

}  // namespace aqcast
