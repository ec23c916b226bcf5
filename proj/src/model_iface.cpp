#include "monsoon/model_iface.hpp"

#include "monsoon/errors.hpp"

namespace monsoon {

int ModelBase::add_param(std::string name, Tensor value) {
  const int id = static_cast<int>(params_.size());
  index_[name] = id;
  params_.push_back(NamedTensor{std::move(name), std::move(value)});
  return id;
}

int ModelBase::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) raise(ErrorCode::ShapeMismatch, "unknown parameter " + name);
  return it->second;
}

Tensor& ModelBase::tensor_of(const std::string& name) {
  return params_[static_cast<std::size_t>(index_of(name))].value;
}

std::vector<Var> ModelBase::bind(Tape& tape) const {
  std::vector<Var> leaves;
  leaves.reserve(params_.size());
  for (const auto& p : params_) leaves.push_back(tape.leaf(p.value));
  return leaves;
}

Tensor pack_inputs(const TrainData& data, std::size_t first, std::size_t last,
                   const std::vector<int>* order) {
  const int B = static_cast<int>(last - first);
  Tensor out({B, data.steps, data.channels});
  const std::size_t row = static_cast<std::size_t>(data.steps) * data.channels;
  for (std::size_t i = first; i < last; ++i) {
    const auto& s =
        data.samples[order ? static_cast<std::size_t>((*order)[i]) : i];
    std::copy(s.input.begin(), s.input.end(), out.data() + (i - first) * row);
  }
  return out;
}

Tensor pack_targets(const TrainData& data, std::size_t first, std::size_t last,
                    const std::vector<int>* order) {
  const int B = static_cast<int>(last - first);
  Tensor out({B, data.horizon});
  for (std::size_t i = first; i < last; ++i) {
    const auto& s =
        data.samples[order ? static_cast<std::size_t>((*order)[i]) : i];
    std::copy(s.target.begin(), s.target.end(),
              out.data() + (i - first) * static_cast<std::size_t>(data.horizon));
  }
  return out;
}

}  // namespace monsoon
