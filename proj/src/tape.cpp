#include "monsoon/tape.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "monsoon/errors.hpp"

namespace monsoon {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const EMat>;
using Map = Eigen::Map<EMat>;

std::int64_t outer_size(const std::vector<int>& shape, int axis) {
  std::int64_t n = 1;
  for (int i = 0; i < axis; ++i) n *= shape[static_cast<std::size_t>(i)];
  return n;
}

std::int64_t inner_size(const std::vector<int>& shape, int axis) {
  std::int64_t n = 1;
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < shape.size(); ++i) n *= shape[i];
  return n;
}

void require(bool ok, const std::string& msg) {
  if (!ok) raise(ErrorCode::ShapeMismatch, msg);
}

}  // namespace

void Tape::check_var(Var v) const {
  if (v.tape != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
    raise(ErrorCode::ShapeMismatch, "Var does not belong to this tape");
}

Var Tape::push(Tensor value, std::function<void(Tape&, const Tensor&)> backprop, const char* op) {
  if (!value.all_finite())
    raise(ErrorCode::NonFiniteValue, std::string("non-finite forward value in op '") + op + "'");
  nodes_.push_back(Node{std::move(value), std::move(backprop)});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Tensor value) { return push(std::move(value), nullptr, "leaf"); }

const Tensor& Tape::value(Var v) const {
  check_var(v);
  return nodes_[static_cast<std::size_t>(v.id)].value;
}

const Tensor& Tape::grad(Var v) {
  check_var(v);
  if (grads_.size() != nodes_.size()) grads_.resize(nodes_.size());
  Tensor& g = grads_[static_cast<std::size_t>(v.id)];
  if (g.empty()) g = Tensor(value(v).shape());  // off-path: zero gradient
  return g;
}

void Tape::accumulate(int id, const Tensor& g) {
  Tensor& slot = grads_[static_cast<std::size_t>(id)];
  if (slot.empty()) {
    slot = g;
    return;
  }
  double* d = slot.data();
  const double* s = g.data();
  const std::int64_t n = slot.size();
  for (std::int64_t i = 0; i < n; ++i) d[i] += s[i];
}

void Tape::accumulate_move(int id, Tensor&& g) {
  Tensor& slot = grads_[static_cast<std::size_t>(id)];
  if (slot.empty()) {
    slot = std::move(g);
    return;
  }
  accumulate(id, g);
}

void Tape::backward(Var loss) {
  check_var(loss);
  if (value(loss).size() != 1)
    raise(ErrorCode::ShapeMismatch, "backward target must be scalar, got " + value(loss).shape_str());
  grads_.assign(nodes_.size(), Tensor());
  grads_[static_cast<std::size_t>(loss.id)] = Tensor(value(loss).shape(), {1.0});
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    const Tensor& g = grads_[static_cast<std::size_t>(i)];
    if (!n.backprop || g.empty()) continue;
    n.backprop(*this, g);
  }
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    if (!grads_[i].empty() && !grads_[i].all_finite())
      raise(ErrorCode::NonFiniteGradient, "non-finite gradient at node " + std::to_string(i));
  }
}

// --- elementwise and scalar ---

Var Tape::add(Var a, Var b) {
  check_var(a);
  check_var(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  const auto& sa = ta.shape();
  const auto& sb = tb.shape();
  const bool suffix =
      sb.size() <= sa.size() && std::equal(sb.rbegin(), sb.rend(), sa.rbegin());
  require(suffix, "add: shape " + tb.shape_str() + " is not a suffix of " + ta.shape_str());
  const std::int64_t nb = tb.size();
  const std::int64_t repeat = ta.size() / nb;
  Tensor out(sa);
  for (std::int64_t r = 0; r < repeat; ++r)
    for (std::int64_t j = 0; j < nb; ++j) out[r * nb + j] = ta[r * nb + j] + tb[j];
  return push(std::move(out),
              [ia = a.id, ib = b.id, nb, repeat](Tape& t, const Tensor& g) {
                t.accumulate(ia, g);
                Tensor gb(t.node_value(ib).shape());
                for (std::int64_t r = 0; r < repeat; ++r)
                  for (std::int64_t j = 0; j < nb; ++j) gb[j] += g[r * nb + j];
                t.accumulate_move(ib, std::move(gb));
              },
              "add");
}

Var Tape::sub(Var a, Var b) {
  check_var(a);
  check_var(b);
  require(value(a).same_shape(value(b)), "sub: shape mismatch");
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  Tensor out(ta.shape());
  for (std::int64_t i = 0; i < ta.size(); ++i) out[i] = ta[i] - tb[i];
  return push(std::move(out),
              [ia = a.id, ib = b.id](Tape& t, const Tensor& g) {
                t.accumulate(ia, g);
                Tensor gb(g.shape());
                for (std::int64_t i = 0; i < g.size(); ++i) gb[i] = -g[i];
                t.accumulate_move(ib, std::move(gb));
              },
              "sub");
}

Var Tape::mul(Var a, Var b) {
  check_var(a);
  check_var(b);
  require(value(a).same_shape(value(b)), "mul: shape mismatch");
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  Tensor out(ta.shape());
  for (std::int64_t i = 0; i < ta.size(); ++i) out[i] = ta[i] * tb[i];
  return push(std::move(out),
              [ia = a.id, ib = b.id](Tape& t, const Tensor& g) {
                const Tensor& va = t.node_value(ia);
                const Tensor& vb = t.node_value(ib);
                Tensor ga(g.shape()), gb(g.shape());
                for (std::int64_t i = 0; i < g.size(); ++i) {
                  ga[i] = g[i] * vb[i];
                  gb[i] = g[i] * va[i];
                }
                t.accumulate_move(ia, std::move(ga));
                t.accumulate_move(ib, std::move(gb));
              },
              "mul");
}

Var Tape::smul(Var a, double c) {
  check_var(a);
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  for (std::int64_t i = 0; i < ta.size(); ++i) out[i] = ta[i] * c;
  return push(std::move(out),
              [ia = a.id, c](Tape& t, const Tensor& g) {
                Tensor ga(g.shape());
                for (std::int64_t i = 0; i < g.size(); ++i) ga[i] = g[i] * c;
                t.accumulate_move(ia, std::move(ga));
              },
              "smul");
}

Var Tape::sadd(Var a, double c) {
  check_var(a);
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  for (std::int64_t i = 0; i < ta.size(); ++i) out[i] = ta[i] + c;
  return push(std::move(out),
              [ia = a.id](Tape& t, const Tensor& g) { t.accumulate(ia, g); }, "sadd");
}

Var Tape::tanh(Var a) {
  check_var(a);
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  for (std::int64_t i = 0; i < ta.size(); ++i) out[i] = std::tanh(ta[i]);
  Var v = push(std::move(out), nullptr, "tanh");
  nodes_[static_cast<std::size_t>(v.id)].backprop = [ia = a.id, self = v.id](Tape& t,
                                                                             const Tensor& g) {
    const Tensor& y = t.node_value(self);
    Tensor ga(g.shape());
    for (std::int64_t i = 0; i < g.size(); ++i) ga[i] = g[i] * (1.0 - y[i] * y[i]);
    t.accumulate_move(ia, std::move(ga));
  };
  return v;
}

Var Tape::sigmoid(Var a) {
  check_var(a);
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  for (std::int64_t i = 0; i < ta.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-ta[i]));
  Var v = push(std::move(out), nullptr, "sigmoid");
  nodes_[static_cast<std::size_t>(v.id)].backprop = [ia = a.id, self = v.id](Tape& t,
                                                                             const Tensor& g) {
    const Tensor& y = t.node_value(self);
    Tensor ga(g.shape());
    for (std::int64_t i = 0; i < g.size(); ++i) ga[i] = g[i] * y[i] * (1.0 - y[i]);
    t.accumulate_move(ia, std::move(ga));
  };
  return v;
}

Var Tape::relu(Var a) {
  check_var(a);
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  for (std::int64_t i = 0; i < ta.size(); ++i) out[i] = ta[i] > 0.0 ? ta[i] : 0.0;
  return push(std::move(out),
              [ia = a.id](Tape& t, const Tensor& g) {
                const Tensor& x = t.node_value(ia);
                Tensor ga(g.shape());
                for (std::int64_t i = 0; i < g.size(); ++i) ga[i] = x[i] > 0.0 ? g[i] : 0.0;
                t.accumulate_move(ia, std::move(ga));
              },
              "relu");
}

Var Tape::exp(Var a) {
  check_var(a);
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  for (std::int64_t i = 0; i < ta.size(); ++i) out[i] = std::exp(ta[i]);
  Var v = push(std::move(out), nullptr, "exp");
  nodes_[static_cast<std::size_t>(v.id)].backprop = [ia = a.id, self = v.id](Tape& t,
                                                                             const Tensor& g) {
    const Tensor& y = t.node_value(self);
    Tensor ga(g.shape());
    for (std::int64_t i = 0; i < g.size(); ++i) ga[i] = g[i] * y[i];
    t.accumulate_move(ia, std::move(ga));
  };
  return v;
}

Var Tape::log(Var a) {
  check_var(a);
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  for (std::int64_t i = 0; i < ta.size(); ++i) out[i] = std::log(ta[i]);
  return push(std::move(out),
              [ia = a.id](Tape& t, const Tensor& g) {
                const Tensor& x = t.node_value(ia);
                Tensor ga(g.shape());
                for (std::int64_t i = 0; i < g.size(); ++i) ga[i] = g[i] / x[i];
                t.accumulate_move(ia, std::move(ga));
              },
              "log");
}

// --- shape ---

Var Tape::reshape(Var a, std::vector<int> shape) {
  check_var(a);
  require(shape_size(shape) == value(a).size(),
          "reshape: size mismatch " + value(a).shape_str());
  Tensor out(std::move(shape), value(a).buffer());
  return push(std::move(out),
              [ia = a.id](Tape& t, const Tensor& g) {
                Tensor ga(t.node_value(ia).shape(), g.buffer());
                t.accumulate_move(ia, std::move(ga));
              },
              "reshape");
}

namespace {

Tensor permute_tensor(const Tensor& in, const std::vector<int>& axes) {
  const int r = in.rank();
  std::vector<int> out_shape(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) out_shape[static_cast<std::size_t>(i)] = in.dim(axes[static_cast<std::size_t>(i)]);
  std::vector<std::int64_t> in_strides(static_cast<std::size_t>(r), 1);
  for (int i = r - 2; i >= 0; --i)
    in_strides[static_cast<std::size_t>(i)] = in_strides[static_cast<std::size_t>(i) + 1] * in.dim(i + 1);
  std::vector<std::int64_t> step(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) step[static_cast<std::size_t>(i)] = in_strides[static_cast<std::size_t>(axes[static_cast<std::size_t>(i)])];
  Tensor out(out_shape);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(r), 0);
  const std::int64_t n = in.size();
  std::int64_t src = 0;
  for (std::int64_t lin = 0; lin < n; ++lin) {
    out[lin] = in[src];
    for (int d = r - 1; d >= 0; --d) {
      idx[static_cast<std::size_t>(d)]++;
      src += step[static_cast<std::size_t>(d)];
      if (idx[static_cast<std::size_t>(d)] < out_shape[static_cast<std::size_t>(d)]) break;
      src -= step[static_cast<std::size_t>(d)] * out_shape[static_cast<std::size_t>(d)];
      idx[static_cast<std::size_t>(d)] = 0;
    }
  }
  return out;
}

}  // namespace

Var Tape::permute(Var a, std::vector<int> axes) {
  check_var(a);
  const Tensor& ta = value(a);
  require(static_cast<int>(axes.size()) == ta.rank(), "permute: axes rank mismatch");
  std::vector<int> seen(axes.size(), 0);
  for (int ax : axes) {
    require(ax >= 0 && ax < ta.rank() && !seen[static_cast<std::size_t>(ax)], "permute: invalid axes");
    seen[static_cast<std::size_t>(ax)] = 1;
  }
  std::vector<int> inverse(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) inverse[static_cast<std::size_t>(axes[i])] = static_cast<int>(i);
  return push(permute_tensor(ta, axes),
              [ia = a.id, inverse](Tape& t, const Tensor& g) {
                t.accumulate_move(ia, permute_tensor(g, inverse));
              },
              "permute");
}

Var Tape::concat(const std::vector<Var>& parts, int axis) {
  require(!parts.empty(), "concat: no parts");
  for (Var p : parts) check_var(p);
  const Tensor& first = value(parts[0]);
  const int r = first.rank();
  require(axis >= 0 && axis < r, "concat: bad axis");
  std::vector<int> out_shape = first.shape();
  int total_axis = 0;
  for (Var p : parts) {
    const Tensor& tp = value(p);
    require(tp.rank() == r, "concat: rank mismatch");
    for (int d = 0; d < r; ++d)
      if (d != axis) require(tp.dim(d) == first.dim(d), "concat: shape mismatch off axis");
    total_axis += tp.dim(axis);
  }
  out_shape[static_cast<std::size_t>(axis)] = total_axis;
  const std::int64_t outer = outer_size(out_shape, axis);
  const std::int64_t inner = inner_size(out_shape, axis);
  Tensor out(out_shape);
  std::vector<int> offsets;
  int off = 0;
  for (Var p : parts) {
    const Tensor& tp = value(p);
    const int len = tp.dim(axis);
    offsets.push_back(off);
    for (std::int64_t o = 0; o < outer; ++o)
      for (std::int64_t j = 0; j < len; ++j)
        for (std::int64_t i = 0; i < inner; ++i)
          out[(o * total_axis + off + j) * inner + i] = tp[(o * len + j) * inner + i];
    off += len;
  }
  std::vector<int> ids;
  for (Var p : parts) ids.push_back(p.id);
  return push(std::move(out),
              [ids, offsets, axis, outer, inner, total_axis](Tape& t, const Tensor& g) {
                for (std::size_t k = 0; k < ids.size(); ++k) {
                  const Tensor& vp = t.node_value(ids[k]);
                  const int len = vp.dim(axis);
                  Tensor gp(vp.shape());
                  for (std::int64_t o = 0; o < outer; ++o)
                    for (std::int64_t j = 0; j < len; ++j)
                      for (std::int64_t i = 0; i < inner; ++i)
                        gp[(o * len + j) * inner + i] =
                            g[(o * total_axis + offsets[k] + j) * inner + i];
                  t.accumulate_move(ids[k], std::move(gp));
                }
              },
              "concat");
}

Var Tape::slice(Var a, int axis, int start, int len) {
  check_var(a);
  const Tensor& ta = value(a);
  require(axis >= 0 && axis < ta.rank(), "slice: bad axis");
  require(start >= 0 && len >= 1 && start + len <= ta.dim(axis), "slice: out of range");
  const std::int64_t outer = outer_size(ta.shape(), axis);
  const std::int64_t inner = inner_size(ta.shape(), axis);
  const int alen = ta.dim(axis);
  std::vector<int> out_shape = ta.shape();
  out_shape[static_cast<std::size_t>(axis)] = len;
  Tensor out(out_shape);
  for (std::int64_t o = 0; o < outer; ++o)
    for (std::int64_t j = 0; j < len; ++j)
      for (std::int64_t i = 0; i < inner; ++i)
        out[(o * len + j) * inner + i] = ta[(o * alen + start + j) * inner + i];
  return push(std::move(out),
              [ia = a.id, axis, start, len, outer, inner, alen](Tape& t, const Tensor& g) {
                Tensor ga(t.node_value(ia).shape());
                for (std::int64_t o = 0; o < outer; ++o)
                  for (std::int64_t j = 0; j < len; ++j)
                    for (std::int64_t i = 0; i < inner; ++i)
                      ga[(o * alen + start + j) * inner + i] = g[(o * len + j) * inner + i];
                t.accumulate_move(ia, std::move(ga));
              },
              "slice");
}

// --- reductions ---

Var Tape::sum_axis(Var a, int axis) {
  check_var(a);
  const Tensor& ta = value(a);
  require(axis >= 0 && axis < ta.rank(), "sum_axis: bad axis");
  const std::int64_t outer = outer_size(ta.shape(), axis);
  const std::int64_t inner = inner_size(ta.shape(), axis);
  const int alen = ta.dim(axis);
  std::vector<int> out_shape;
  for (int d = 0; d < ta.rank(); ++d)
    if (d != axis) out_shape.push_back(ta.dim(d));
  if (out_shape.empty()) out_shape.push_back(1);
  Tensor out(out_shape);
  for (std::int64_t o = 0; o < outer; ++o)
    for (std::int64_t j = 0; j < alen; ++j)
      for (std::int64_t i = 0; i < inner; ++i)
        out[o * inner + i] += ta[(o * alen + j) * inner + i];
  return push(std::move(out),
              [ia = a.id, outer, inner, alen](Tape& t, const Tensor& g) {
                Tensor ga(t.node_value(ia).shape());
                for (std::int64_t o = 0; o < outer; ++o)
                  for (std::int64_t j = 0; j < alen; ++j)
                    for (std::int64_t i = 0; i < inner; ++i)
                      ga[(o * alen + j) * inner + i] = g[o * inner + i];
                t.accumulate_move(ia, std::move(ga));
              },
              "sum_axis");
}

Var Tape::mean_axis(Var a, int axis) {
  check_var(a);
  const int alen = value(a).dim(axis);
  return smul(sum_axis(a, axis), 1.0 / alen);
}

// --- linear algebra ---

Var Tape::matmul(Var a, Var b) {
  check_var(a);
  check_var(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.rank() == 2 && tb.rank() == 2, "matmul: expects rank-2 operands");
  require(ta.dim(1) == tb.dim(0),
          "matmul: inner dims " + ta.shape_str() + " x " + tb.shape_str());
  const int m = ta.dim(0), k = ta.dim(1), n = tb.dim(1);
  Tensor out({m, n});
  Map(out.data(), m, n).noalias() = MapC(ta.data(), m, k) * MapC(tb.data(), k, n);
  return push(std::move(out),
              [ia = a.id, ib = b.id, m, k, n](Tape& t, const Tensor& g) {
                const Tensor& va = t.node_value(ia);
                const Tensor& vb = t.node_value(ib);
                Tensor ga({m, k}), gb({k, n});
                Map(ga.data(), m, k).noalias() =
                    MapC(g.data(), m, n) * MapC(vb.data(), k, n).transpose();
                Map(gb.data(), k, n).noalias() =
                    MapC(va.data(), m, k).transpose() * MapC(g.data(), m, n);
                t.accumulate_move(ia, std::move(ga));
                t.accumulate_move(ib, std::move(gb));
              },
              "matmul");
}

Var Tape::bmm(Var a, Var b) {
  check_var(a);
  check_var(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.rank() == 3 && tb.rank() == 3, "bmm: expects rank-3 operands");
  require(ta.dim(0) == tb.dim(0) && ta.dim(2) == tb.dim(1),
          "bmm: shapes " + ta.shape_str() + " x " + tb.shape_str());
  const int B = ta.dim(0), m = ta.dim(1), k = ta.dim(2), n = tb.dim(2);
  Tensor out({B, m, n});
  for (int i = 0; i < B; ++i) {
    Map(out.data() + static_cast<std::int64_t>(i) * m * n, m, n).noalias() =
        MapC(ta.data() + static_cast<std::int64_t>(i) * m * k, m, k) *
        MapC(tb.data() + static_cast<std::int64_t>(i) * k * n, k, n);
  }
  return push(std::move(out),
              [ia = a.id, ib = b.id, B, m, k, n](Tape& t, const Tensor& g) {
                const Tensor& va = t.node_value(ia);
                const Tensor& vb = t.node_value(ib);
                Tensor ga({B, m, k}), gb({B, k, n});
                for (int i = 0; i < B; ++i) {
                  const std::int64_t oa = static_cast<std::int64_t>(i) * m * k;
                  const std::int64_t ob = static_cast<std::int64_t>(i) * k * n;
                  const std::int64_t og = static_cast<std::int64_t>(i) * m * n;
                  Map(ga.data() + oa, m, k).noalias() =
                      MapC(g.data() + og, m, n) * MapC(vb.data() + ob, k, n).transpose();
                  Map(gb.data() + ob, k, n).noalias() =
                      MapC(va.data() + oa, m, k).transpose() * MapC(g.data() + og, m, n);
                }
                t.accumulate_move(ia, std::move(ga));
                t.accumulate_move(ib, std::move(gb));
              },
              "bmm");
}

// --- neural net ---

Var Tape::softmax(Var a, int axis) {
  check_var(a);
  const Tensor& ta = value(a);
  require(axis >= 0 && axis < ta.rank(), "softmax: bad axis");
  const std::int64_t outer = outer_size(ta.shape(), axis);
  const std::int64_t inner = inner_size(ta.shape(), axis);
  const int alen = ta.dim(axis);
  Tensor out(ta.shape());
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t i = 0; i < inner; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < alen; ++j) mx = std::max(mx, ta[(o * alen + j) * inner + i]);
      double sum = 0.0;
      for (int j = 0; j < alen; ++j) {
        const double e = std::exp(ta[(o * alen + j) * inner + i] - mx);
        out[(o * alen + j) * inner + i] = e;
        sum += e;
      }
      for (int j = 0; j < alen; ++j) out[(o * alen + j) * inner + i] /= sum;
    }
  }
  Var v = push(std::move(out), nullptr, "softmax");
  nodes_[static_cast<std::size_t>(v.id)].backprop = [ia = a.id, self = v.id, outer, inner,
                                                     alen](Tape& t, const Tensor& g) {
    const Tensor& y = t.node_value(self);
    Tensor ga(g.shape());
    for (std::int64_t o = 0; o < outer; ++o) {
      for (std::int64_t i = 0; i < inner; ++i) {
        double dot = 0.0;
        for (int j = 0; j < alen; ++j) {
          const std::int64_t ix = (o * alen + j) * inner + i;
          dot += g[ix] * y[ix];
        }
        for (int j = 0; j < alen; ++j) {
          const std::int64_t ix = (o * alen + j) * inner + i;
          ga[ix] = y[ix] * (g[ix] - dot);
        }
      }
    }
    t.accumulate_move(ia, std::move(ga));
  };
  return v;
}

Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  check_var(x);
  check_var(gamma);
  check_var(beta);
  const Tensor& tx = value(x);
  const int d = tx.dim(tx.rank() - 1);
  require(value(gamma).rank() == 1 && value(gamma).dim(0) == d, "layer_norm: gamma length");
  require(value(beta).rank() == 1 && value(beta).dim(0) == d, "layer_norm: beta length");
  const std::int64_t rows = tx.size() / d;
  Tensor out(tx.shape());
  std::vector<double> norm(static_cast<std::size_t>(tx.size()));
  std::vector<double> inv_std(static_cast<std::size_t>(rows));
  const Tensor& tg = value(gamma);
  const Tensor& tb = value(beta);
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* row = tx.data() + r * d;
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += row[j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= d;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(r)] = is;
    for (int j = 0; j < d; ++j) {
      const double y = (row[j] - mean) * is;
      norm[static_cast<std::size_t>(r * d + j)] = y;
      out[r * d + j] = tg[j] * y + tb[j];
    }
  }
  return push(std::move(out),
              [ix = x.id, ig = gamma.id, ib = beta.id, d, rows, norm = std::move(norm),
               inv_std = std::move(inv_std)](Tape& t, const Tensor& g) {
                const Tensor& tg = t.node_value(ig);
                Tensor gx(t.node_value(ix).shape());
                Tensor gg({d}), gb({d});
                for (std::int64_t r = 0; r < rows; ++r) {
                  double m1 = 0.0, m2 = 0.0;
                  for (int j = 0; j < d; ++j) {
                    const std::int64_t ixx = r * d + j;
                    const double gh = g[ixx] * tg[j];
                    m1 += gh;
                    m2 += gh * norm[static_cast<std::size_t>(ixx)];
                    gg[j] += g[ixx] * norm[static_cast<std::size_t>(ixx)];
                    gb[j] += g[ixx];
                  }
                  m1 /= d;
                  m2 /= d;
                  const double is = inv_std[static_cast<std::size_t>(r)];
                  for (int j = 0; j < d; ++j) {
                    const std::int64_t ixx = r * d + j;
                    const double gh = g[ixx] * tg[j];
                    gx[ixx] = (gh - m1 - norm[static_cast<std::size_t>(ixx)] * m2) * is;
                  }
                }
                t.accumulate_move(ix, std::move(gx));
                t.accumulate_move(ig, std::move(gg));
                t.accumulate_move(ib, std::move(gb));
              },
              "layer_norm");
}

Var Tape::dropout(Var x, const Tensor& keep_mask, double rate) {
  check_var(x);
  require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0, 1)");
  if (rate == 0.0) return x;  // identity, no node
  require(keep_mask.same_shape(value(x)), "dropout: mask shape mismatch");
  const double scale = 1.0 / (1.0 - rate);
  const Tensor& tx = value(x);
  Tensor out(tx.shape());
  for (std::int64_t i = 0; i < tx.size(); ++i) out[i] = tx[i] * keep_mask[i] * scale;
  return push(std::move(out),
              [ix = x.id, mask = keep_mask, scale](Tape& t, const Tensor& g) {
                Tensor gx(g.shape());
                for (std::int64_t i = 0; i < g.size(); ++i) gx[i] = g[i] * mask[i] * scale;
                t.accumulate_move(ix, std::move(gx));
              },
              "dropout");
}

Var Tape::conv1d(Var x, Var kernel) {
  check_var(x);
  check_var(kernel);
  const Tensor& tx = value(x);
  const Tensor& tk = value(kernel);
  require(tx.rank() == 3 && tk.rank() == 3, "conv1d: x (B,T,Cin), kernel (K,Cin,Cout)");
  require(tx.dim(2) == tk.dim(1), "conv1d: channel mismatch");
  const int B = tx.dim(0), T = tx.dim(1), Ci = tx.dim(2);
  const int K = tk.dim(0), Co = tk.dim(2);
  require(K <= T, "conv1d: kernel longer than sequence");
  const int To = T - K + 1;
  Tensor out({B, To, Co});
  for (int b = 0; b < B; ++b) {
    Map yb(out.data() + static_cast<std::int64_t>(b) * To * Co, To, Co);
    for (int k = 0; k < K; ++k) {
      MapC xb(tx.data() + (static_cast<std::int64_t>(b) * T + k) * Ci, To, Ci);
      MapC kk(tk.data() + static_cast<std::int64_t>(k) * Ci * Co, Ci, Co);
      if (k == 0)
        yb.noalias() = xb * kk;
      else
        yb.noalias() += xb * kk;
    }
  }
  return push(std::move(out),
              [ix = x.id, ik = kernel.id, B, T, Ci, K, Co, To](Tape& t, const Tensor& g) {
                const Tensor& vx = t.node_value(ix);
                const Tensor& vk = t.node_value(ik);
                Tensor gx({B, T, Ci}), gk({K, Ci, Co});
                for (int b = 0; b < B; ++b) {
                  MapC gb(g.data() + static_cast<std::int64_t>(b) * To * Co, To, Co);
                  for (int k = 0; k < K; ++k) {
                    Map gxb(gx.data() + (static_cast<std::int64_t>(b) * T + k) * Ci, To, Ci);
                    MapC xb(vx.data() + (static_cast<std::int64_t>(b) * T + k) * Ci, To, Ci);
                    MapC kk(vk.data() + static_cast<std::int64_t>(k) * Ci * Co, Ci, Co);
                    Map gkk(gk.data() + static_cast<std::int64_t>(k) * Ci * Co, Ci, Co);
                    gxb.noalias() += gb * kk.transpose();
                    gkk.noalias() += xb.transpose() * gb;
                  }
                }
                t.accumulate_move(ix, std::move(gx));
                t.accumulate_move(ik, std::move(gk));
              },
              "conv1d");
}

Var Tape::mse_loss(Var pred, Var target) {
  check_var(pred);
  check_var(target);
  require(value(pred).same_shape(value(target)), "mse_loss: shape mismatch");
  const Tensor& tp = value(pred);
  const Tensor& tt = value(target);
  const std::int64_t n = tp.size();
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = tp[i] - tt[i];
    acc += d * d;
  }
  return push(Tensor::scalar(acc / static_cast<double>(n)),
              [ip = pred.id, it = target.id, n](Tape& t, const Tensor& g) {
                const Tensor& vp = t.node_value(ip);
                const Tensor& vt = t.node_value(it);
                const double s = 2.0 * g[0] / static_cast<double>(n);
                Tensor gp(vp.shape()), gt(vt.shape());
                for (std::int64_t i = 0; i < n; ++i) {
                  const double d = s * (vp[i] - vt[i]);
                  gp[i] = d;
                  gt[i] = -d;
                }
                t.accumulate_move(ip, std::move(gp));
                t.accumulate_move(it, std::move(gt));
              },
              "mse_loss");
}

}  // namespace monsoon
