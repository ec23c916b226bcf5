#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "monsoon/checkpoint.hpp"
#include "monsoon/errors.hpp"
#include "monsoon/optim.hpp"
#include "monsoon/rng.hpp"
#include "monsoon/tape.hpp"
#include "monsoon/util.hpp"
#include "support/gradient_check.hpp"

using namespace monsoon;

TEST_CASE("rng: same seed gives identical draw sequences") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(42), d(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(c.uniform() == d.uniform());
    CHECK(c.normal() == d.normal());
  }
}

TEST_CASE("rng: permutation is a permutation") {
  Rng rng(7);
  const auto p3 = rng.permutation(3);
  CHECK(std::set<int>(p3.begin(), p3.end()) == std::set<int>{0, 1, 2});
  const auto p100 = rng.permutation(100);
  CHECK(std::set<int>(p100.begin(), p100.end()).size() == 100);
}

TEST_CASE("rng: bernoulli mask statistics and degenerate rate") {
  Rng rng(11);
  const auto all_keep = rng.bernoulli_keep_mask(1000, 0.0);
  for (auto m : all_keep) CHECK(m == 1);

  const std::size_t n = 100000;
  const double rate = 0.3;
  const auto mask = rng.bernoulli_keep_mask(n, rate);
  double mean = 0.0;
  for (auto m : mask) mean += m;
  mean /= static_cast<double>(n);
  // expected keep fraction 0.7, 3-sigma band for a binomial sample
  const double sigma = std::sqrt(rate * (1 - rate) / static_cast<double>(n));
  CHECK(std::abs(mean - (1.0 - rate)) < 3.0 * sigma);
}

TEST_CASE("tensor shape contracts") {
  const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.size() == 6);
  CHECK_THROWS_AS(Tensor({2, 3}, {1.0}), MonsoonError);
  CHECK_THROWS_AS(Tensor({0, 3}), MonsoonError);
}

TEST_CASE("matmul shape contract and values") {
  Tape tape;
  auto a = tape.leaf(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
  auto b = tape.leaf(Tensor({3, 4}));
  auto c = tape.matmul(a, b);
  CHECK(tape.value(c).shape() == std::vector<int>{2, 4});
  auto bad = tape.leaf(Tensor({2, 2}));
  CHECK_THROWS_AS(tape.matmul(a, bad), MonsoonError);
}

TEST_CASE("softmax on a constant pair is uniform") {
  Tape tape;
  auto x = tape.leaf(Tensor({2}, {0.0, 0.0}));
  auto y = tape.softmax(x, 0);
  CHECK(tape.value(y)[0] == doctest::Approx(0.5));
  CHECK(tape.value(y)[1] == doctest::Approx(0.5));
}

TEST_CASE("mse of identical tensors is zero, and the worked gradient") {
  Tape tape;
  auto x = tape.leaf(Tensor({3}, {1.0, -2.0, 0.5}));
  CHECK(tape.value(tape.mse_loss(x, x)).item() == 0.0);

  // loss = mse(w, target), w=3, target=1 -> d/dw = 2*(3-1)/1 = 4
  Tape t2;
  auto w = t2.leaf(Tensor::scalar(3.0));
  auto loss = t2.mse_loss(w, t2.leaf(Tensor::scalar(1.0)));
  t2.backward(loss);
  CHECK(t2.grad(w)[0] == doctest::Approx(4.0));
}

TEST_CASE("backward: linear loss gives the fixed input as gradient") {
  // loss = sum(w * x) with x fixed -> grad w = x
  Tape tape;
  auto w = tape.leaf(Tensor({4}, {0.3, -1.0, 2.0, 0.7}));
  auto x = tape.leaf(Tensor({4}, {2.0, 3.0, -1.0, 0.5}));
  auto loss = tape.sum_axis(tape.mul(w, x), 0);
  tape.backward(loss);
  for (int i = 0; i < 4; ++i) CHECK(tape.grad(w)[i] == tape.value(x)[i]);
}

TEST_CASE("backward: off-path parameters get zero gradient") {
  Tape tape;
  auto used = tape.leaf(Tensor::scalar(2.0));
  auto unused = tape.leaf(Tensor({2}, {5.0, 6.0}));
  auto loss = tape.mul(used, used);
  tape.backward(loss);
  CHECK(tape.grad(unused)[0] == 0.0);
  CHECK(tape.grad(unused)[1] == 0.0);
}

TEST_CASE("backward twice from identical inputs is identical") {
  auto run = [] {
    Tape tape;
    auto a = tape.leaf(Tensor({2, 2}, {1.0, 2.0, 3.0, 4.0}));
    auto b = tape.leaf(Tensor({2, 2}, {0.5, -0.5, 1.5, 2.5}));
    auto loss = tape.mse_loss(tape.tanh(tape.matmul(a, b)), tape.leaf(Tensor({2, 2})));
    tape.backward(loss);
    return tape.grad(a).buffer();
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite forward values abort the step") {
  Tape tape;
  auto x = tape.leaf(Tensor({1}, {-1.0}));
  CHECK_THROWS_AS(tape.log(x), MonsoonError);
  try {
    auto y = tape.leaf(Tensor({1}, {2000.0}));
    tape.exp(y);
    FAIL("expected NonFiniteValue");
  } catch (const MonsoonError& e) {
    CHECK(e.code() == ErrorCode::NonFiniteValue);
  }
}

TEST_CASE("layer_norm normalizes rows before the affine terms") {
  Tape tape;
  Rng rng(3);
  Tensor x({5, 8});
  for (std::int64_t i = 0; i < x.size(); ++i) x[i] = 3.0 * rng.normal() + 1.0;
  auto out = tape.layer_norm(tape.leaf(x), tape.leaf(Tensor::full({8}, 1.0)),
                             tape.leaf(Tensor({8})), 1e-12);
  const Tensor& y = tape.value(out);
  for (int r = 0; r < 5; ++r) {
    double mean = 0.0, var = 0.0;
    for (int j = 0; j < 8; ++j) mean += y[r * 8 + j];
    mean /= 8;
    for (int j = 0; j < 8; ++j) var += (y[r * 8 + j] - mean) * (y[r * 8 + j] - mean);
    var /= 8;
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
}

TEST_CASE("dropout with rate 0 is the identity") {
  Tape tape;
  auto x = tape.leaf(Tensor({3}, {1.0, 2.0, 3.0}));
  auto y = tape.dropout(x, Tensor({3}), 0.0);
  CHECK(y.id == x.id);
}

TEST_CASE("finite-difference suite: every differentiable op") {
  for (const auto& report : monsoon::testing::run_gradient_suite(2024)) {
    INFO(report.name);
    CHECK(report.max_rel_err <= 1e-4);
  }
}

TEST_CASE("clip_gradients: spec examples") {
  std::vector<Tensor> g;
  g.push_back(Tensor({2}, {3.0, 4.0}));
  clip_gradients(g, 10.0);
  CHECK(g[0][0] == 3.0);  // norm 5, below threshold: untouched
  CHECK(g[0][1] == 4.0);
  clip_gradients(g, 1.0);
  CHECK(g[0][0] == doctest::Approx(0.6));
  CHECK(g[0][1] == doctest::Approx(0.8));
  CHECK(global_grad_norm(g) <= 1.0 + 1e-9);

  std::vector<Tensor> zero;
  zero.push_back(Tensor({3}));
  clip_gradients(zero, 1.0);
  CHECK(global_grad_norm(zero) == 0.0);
}

TEST_CASE("clip_gradients preserves direction when clipping") {
  Rng rng(17);
  std::vector<Tensor> g;
  g.push_back(Tensor({5}));
  for (int i = 0; i < 5; ++i) g[0][i] = rng.normal() * 10.0;
  std::vector<Tensor> orig = g;
  clip_gradients(g, 0.5);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int i = 0; i < 5; ++i) {
    dot += g[0][i] * orig[0][i];
    na += g[0][i] * g[0][i];
    nb += orig[0][i] * orig[0][i];
  }
  CHECK(dot / std::sqrt(na * nb) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("adam: zero gradient leaves parameters, first step has unit direction") {
  std::vector<Tensor> params;
  params.push_back(Tensor({2}, {1.0, -2.0}));
  Adam adam(AdamConfig{0.01, 0.9, 0.999, 1e-8}, params);

  std::vector<Tensor> zero;
  zero.push_back(Tensor({2}));
  adam.step(params, zero);
  CHECK(params[0][0] == 1.0);
  CHECK(params[0][1] == -2.0);
  CHECK(adam.step_count() == 1);

  // fresh state: first update moves against the gradient sign by ~lr
  std::vector<Tensor> p2;
  p2.push_back(Tensor({2}, {0.0, 0.0}));
  Adam a2(AdamConfig{0.01, 0.9, 0.999, 1e-8}, p2);
  std::vector<Tensor> g;
  g.push_back(Tensor({2}, {0.5, -3.0}));
  a2.step(p2, g);
  CHECK(p2[0][0] == doctest::Approx(-0.01).epsilon(1e-4));
  CHECK(p2[0][1] == doctest::Approx(0.01).epsilon(1e-4));
}

TEST_CASE("adam: identical runs are bitwise identical") {
  auto run = [] {
    std::vector<Tensor> p;
    p.push_back(Tensor({3}, {1.0, 2.0, 3.0}));
    Adam adam(AdamConfig{}, p);
    Rng rng(5);
    for (int step = 0; step < 25; ++step) {
      std::vector<Tensor> g;
      g.push_back(Tensor({3}));
      for (int i = 0; i < 3; ++i) g[0][i] = rng.normal();
      adam.step(p, g);
    }
    return p[0].buffer();
  };
  CHECK(run() == run());
}

TEST_CASE("checkpoint round-trips bitwise and rejects corruption") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "monsoon_ckpt_test";
  fs::create_directories(dir);
  const std::string path = (dir / "model.ckpt").string();

  Rng rng(9);
  std::vector<NamedTensor> params;
  params.push_back({"w", Tensor({4, 3})});
  params.push_back({"b", Tensor({3})});
  for (auto& p : params)
    for (std::int64_t i = 0; i < p.value.size(); ++i) p.value[i] = rng.normal();

  save_checkpoint(params, nlohmann::json{{"kind", "test"}, {"window", 30}}, path);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.config.at("window") == 30);
  REQUIRE(loaded.params.size() == 2);
  CHECK(loaded.params[0].value.buffer() == params[0].value.buffer());
  CHECK(loaded.params[1].value.buffer() == params[1].value.buffer());

  // truncation -> CorruptCheckpoint
  {
    const std::string full = read_text_file(path);
    write_text_file(path + ".trunc", full.substr(0, full.size() - 9));
    CHECK_THROWS_AS(load_checkpoint(path + ".trunc"), MonsoonError);
    try {
      load_checkpoint(path + ".trunc");
    } catch (const MonsoonError& e) {
      CHECK(e.code() == ErrorCode::CorruptCheckpoint);
    }
  }

  // shape disagreement -> VersionMismatch on load-into
  {
    std::vector<NamedTensor> other;
    other.push_back({"w", Tensor({2, 2})});
    other.push_back({"b", Tensor({3})});
    try {
      load_into(other, loaded);
      FAIL("expected VersionMismatch");
    } catch (const MonsoonError& e) {
      CHECK(e.code() == ErrorCode::VersionMismatch);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("format_double round-trips exactly") {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.normal() * std::pow(10.0, static_cast<int>(rng.below(7)) - 3);
    CHECK(std::stod(format_double(v)) == v);
  }
}
