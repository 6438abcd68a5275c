#include "stca/harness/optimizer.hpp"

#include <cmath>

namespace stca::harness {

template <typename T>
Adam<T>::Adam(const model::StcaParams<T>& params, AdamConfig config) : config_(config) {
  for (const auto* p : params.all()) {
    m_.emplace_back(p->value.rows(), p->value.cols());
    v_.emplace_back(p->value.rows(), p->value.cols());
  }
}

template <typename T>
void Adam<T>::step(model::StcaParams<T>& params) {
  auto all = params.all();
  if (all.size() != m_.size()) throw DimensionError("Adam: parameter set changed since construction");
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto& p = *all[i];
    const double lr = model::is_embedding(p.name) ? config_.lr_embedding : config_.lr_dense;
    if (lr == 0.0) continue;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      const double mk = b1 * m[k] + (1 - b1) * g;
      const double vk = b2 * v[k] + (1 - b2) * g * g;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      p.value[k] -= static_cast<T>(lr * (mk / c1) / (std::sqrt(vk / c2) + config_.eps));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace stca::harness
