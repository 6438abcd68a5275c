#pragma once

#include <vector>

#include "stca/model/params.hpp"

namespace stca::harness {

struct AdamConfig {
  double lr_dense = 1e-3;
  double lr_embedding = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with a separate learning rate for tables named "embed.*".
template <typename T>
class Adam {
 public:
  Adam(const model::StcaParams<T>& params, AdamConfig config);

  void step(model::StcaParams<T>& params);
  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::size_t t_ = 0;
  std::vector<numerics::Matrix<T>> m_;
  std::vector<numerics::Matrix<T>> v_;
};

}  // namespace stca::harness
