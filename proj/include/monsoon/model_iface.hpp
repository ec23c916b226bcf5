#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "monsoon/rng.hpp"
#include "monsoon/tape.hpp"
#include "monsoon/tensor.hpp"

namespace monsoon {

// One (sequence, target) pair. `input` is T x C day-major; `target` holds H
// values in the model's output units.
struct TrainSample {
  std::vector<double> input;
  std::vector<double> target;
  int year = 0;
};

struct TrainData {
  int steps = 0;     // T
  int channels = 0;  // C
  int horizon = 0;   // H
  std::vector<TrainSample> samples;
};

struct ForwardResult {
  Var output;                     // (B, H) predictions
  std::vector<Var> param_leaves;  // aligned with params(), for gradient collection
};

// Anything the shared training loop can fit: named parameters plus a forward
// pass mapping an input batch (B, T, C) to predictions (B, H). forward() is
// const w.r.t. model state, so independent tapes may run concurrently.
class TrainableModel {
 public:
  virtual ~TrainableModel() = default;
  virtual std::vector<NamedTensor>& params() = 0;
  virtual const std::vector<NamedTensor>& params() const = 0;
  // rng supplies dropout masks; may be null when train_mode is false
  virtual ForwardResult forward(Tape& tape, const Tensor& inputs, bool train_mode, Rng* rng) = 0;
};

// Shared parameter bookkeeping for concrete models.
class ModelBase : public TrainableModel {
 public:
  std::vector<NamedTensor>& params() override { return params_; }
  const std::vector<NamedTensor>& params() const override { return params_; }

 protected:
  int add_param(std::string name, Tensor value);
  int index_of(const std::string& name) const;
  Tensor& tensor_of(const std::string& name);
  // pushes every parameter onto the tape in declaration order
  std::vector<Var> bind(Tape& tape) const;

  std::vector<NamedTensor> params_;
  std::unordered_map<std::string, int> index_;
};

// Packs samples listed in `order[first, last)` (or [first, last) directly
// when order is null) into a (B, T, C) input tensor / (B, H) target tensor.
Tensor pack_inputs(const TrainData& data, std::size_t first, std::size_t last,
                   const std::vector<int>* order = nullptr);
Tensor pack_targets(const TrainData& data, std::size_t first, std::size_t last,
                    const std::vector<int>* order = nullptr);

}  // namespace monsoon
