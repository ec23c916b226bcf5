#include "gradient_check.hpp"

namespace monsoon::testing {

std::vector<OpGradientReport> run_gradient_suite(std::uint64_t seed) {
  std::vector<OpSpec> specs;
  auto away_from_zero = [](double z) { return z >= 0.0 ? z + 0.05 : z - 0.05; };
  auto positive = [](double z) { return std::abs(z) + 0.1; };

  specs.push_back({"add", {{3, 4}, {3, 4}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.add(v[0], v[1]);
                   }});
  specs.push_back({"add_broadcast", {{3, 4}, {4}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.add(v[0], v[1]);
                   }});
  specs.push_back({"sub", {{2, 5}, {2, 5}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.sub(v[0], v[1]);
                   }});
  specs.push_back({"mul", {{2, 5}, {2, 5}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.mul(v[0], v[1]);
                   }});
  specs.push_back({"smul", {{3, 3}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.smul(v[0], -1.7);
                   }});
  specs.push_back({"sadd", {{3, 3}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.sadd(v[0], 0.45);
                   }});
  specs.push_back({"tanh", {{4, 3}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.tanh(v[0]);
                   }});
  specs.push_back({"sigmoid", {{4, 3}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.sigmoid(v[0]);
                   }});
  specs.push_back({"relu", {{4, 3}},
                   [](Tape& t, const std::vector<Var>& v) { return t.relu(v[0]); },
                   away_from_zero});
  specs.push_back({"exp", {{3, 3}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.exp(v[0]);
                   }});
  specs.push_back({"log", {{3, 3}},
                   [](Tape& t, const std::vector<Var>& v) { return t.log(v[0]); }, positive});
  specs.push_back({"reshape", {{2, 6}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.reshape(v[0], {3, 4});
                   }});
  specs.push_back({"permute", {{2, 3, 4}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.permute(v[0], {2, 0, 1});
                   }});
  specs.push_back({"concat", {{2, 3}, {2, 2}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.concat({v[0], v[1]}, 1);
                   }});
  specs.push_back({"slice", {{3, 6}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.slice(v[0], 1, 2, 3);
                   }});
  specs.push_back({"sum_axis", {{3, 4, 2}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.sum_axis(v[0], 1);
                   }});
  specs.push_back({"mean_axis", {{3, 4, 2}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.mean_axis(v[0], 2);
                   }});
  specs.push_back({"matmul", {{3, 4}, {4, 5}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.matmul(v[0], v[1]);
                   }});
  specs.push_back({"bmm", {{2, 3, 4}, {2, 4, 2}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.bmm(v[0], v[1]);
                   }});
  specs.push_back({"softmax", {{2, 4, 3}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.softmax(v[0], 1);
                   }});
  specs.push_back({"layer_norm", {{4, 6}, {6}, {6}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.layer_norm(v[0], v[1], v[2]);
                   }});
  {
    Rng mask_rng(123);
    Tensor mask({4, 5});
    for (std::int64_t i = 0; i < mask.size(); ++i)
      mask[i] = mask_rng.uniform() < 0.3 ? 0.0 : 1.0;
    specs.push_back({"dropout", {{4, 5}}, [mask](Tape& t, const std::vector<Var>& v) {
                       return t.dropout(v[0], mask, 0.3);
                     }});
  }
  specs.push_back({"conv1d", {{2, 8, 3}, {3, 3, 2}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.conv1d(v[0], v[1]);
                   }});
  specs.push_back({"mse_loss", {{3, 4}, {3, 4}}, [](Tape& t, const std::vector<Var>& v) {
                     return t.mse_loss(v[0], v[1]);
                   }});

  std::vector<OpGradientReport> reports;
  std::uint64_t op_seed = seed;
  for (const auto& spec : specs) reports.push_back(check_op_gradients(spec, ++op_seed));
  return reports;
}

}  // namespace monsoon::testing
