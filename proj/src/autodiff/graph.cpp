#include "nerkit/autodiff/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nerkit/error.hpp"

namespace nerkit::ad {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(t.shape()));
  }
}

}  // namespace

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Matmul: return "matmul";
    case OpKind::Linear: return "linear";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Scale: return "scale";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Tanh: return "tanh";
    case OpKind::Exp: return "exp";
    case OpKind::Log: return "log";
    case OpKind::Gelu: return "gelu";
    case OpKind::AddBroadcast: return "add_broadcast";
    case OpKind::Concat: return "concat";
    case OpKind::Slice: return "slice";
    case OpKind::Stack: return "stack";
    case OpKind::Row: return "row";
    case OpKind::GatherRows: return "gather_rows";
    case OpKind::Transpose: return "transpose";
    case OpKind::LogSumExp: return "log_sum_exp";
    case OpKind::Softmax: return "softmax";
    case OpKind::LayerNorm: return "layer_norm";
    case OpKind::Dropout: return "dropout";
    case OpKind::Sum: return "sum";
    case OpKind::SumSquares: return "sum_squares";
    case OpKind::Pick: return "pick";
  }
  return "?";
}

bool Graph::needs_grad(std::initializer_list<const Tensor*> parents) const {
  if (!record_) return false;
  for (const Tensor* p : parents) {
    if (p->defined() && p->requires_grad()) return true;
  }
  return false;
}

bool Graph::needs_grad(std::span<const Tensor> parents) const {
  if (!record_) return false;
  return std::any_of(parents.begin(), parents.end(), [](const Tensor& p) { return p.requires_grad(); });
}

Tensor Graph::make(Shape shape, bool requires_grad) const {
  return Tensor::zeros(std::move(shape), requires_grad);
}

std::size_t Graph::node_of(const Tensor& t) const {
  auto it = index_.find(t.id());
  return it == index_.end() ? static_cast<std::size_t>(-1) : it->second;
}

void Graph::record(OpKind kind, std::vector<Tensor> parents, const Tensor& output, Backward backward) {
  if (!output.requires_grad()) return;
  Node node{kind, {}, output, std::move(backward)};
  for (const Tensor& p : parents) {
    if (!p.defined()) continue;
    std::size_t id = node_of(p);
    if (id != static_cast<std::size_t>(-1)) node.parent_ids.push_back(id);
  }
  index_.emplace(output.id(), nodes_.size());
  nodes_.push_back(std::move(node));
}

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1);
  if (b.dim(0) != k || b.rank() > 2) {
    throw ShapeError("matmul: cannot multiply " + shape_string(a.shape()) + " by " + shape_string(b.shape()));
  }
  const bool vec = b.rank() == 1;
  const std::size_t n = vec ? 1 : b.dim(1);
  Tensor out = make(vec ? Shape{m} : Shape{m, n}, needs_grad({&a, &b}));
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = &bv[p * n];
      double* orow = &ov[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  record(OpKind::Matmul, {a, b}, out, [a, b, out, m, k, n]() mutable {
    auto g = out.grad();
    if (a.requires_grad()) {
      auto ag = a.grad();
      auto bv = b.values();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
          ag[i * k + p] += acc;
        }
    }
    if (b.requires_grad()) {
      auto bg = b.grad();
      auto av = a.values();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) bg[p * n + j] += aip * g[i * n + j];
        }
    }
  });
  return out;
}

Tensor Graph::linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(weight, 2, "linear");
  const std::size_t m = weight.dim(0), k = weight.dim(1);
  const bool vec = x.rank() == 1;
  if (x.rank() > 2 || x.shape().back() != k) {
    throw ShapeError("linear: input " + shape_string(x.shape()) + " incompatible with weight " +
                     shape_string(weight.shape()));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != m)) {
    throw ShapeError("linear: bias " + shape_string(bias.shape()) + " incompatible with weight " +
                     shape_string(weight.shape()));
  }
  const std::size_t rows = vec ? 1 : x.dim(0);
  Tensor out = make(vec ? Shape{m} : Shape{rows, m}, needs_grad({&x, &weight, &bias}));
  auto xv = x.values();
  auto wv = weight.values();
  auto ov = out.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = &xv[r * k];
    for (std::size_t i = 0; i < m; ++i) {
      const double* wi = &wv[i * k];
      double acc = bias.defined() ? bias[i] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += wi[p] * xr[p];
      ov[r * m + i] = acc;
    }
  }
  record(OpKind::Linear, {x, weight, bias}, out, [x, weight, bias, out, m, k, rows]() mutable {
    auto g = out.grad();
    if (x.requires_grad()) {
      auto xg = x.grad();
      auto wv = weight.values();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < m; ++i) {
          const double gi = g[r * m + i];
          if (gi == 0.0) continue;
          const double* wi = &wv[i * k];
          double* xr = &xg[r * k];
          for (std::size_t p = 0; p < k; ++p) xr[p] += gi * wi[p];
        }
    }
    if (weight.requires_grad()) {
      auto wg = weight.grad();
      auto xv = x.values();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < m; ++i) {
          const double gi = g[r * m + i];
          if (gi == 0.0) continue;
          const double* xr = &xv[r * k];
          double* wi = &wg[i * k];
          for (std::size_t p = 0; p < k; ++p) wi[p] += gi * xr[p];
        }
    }
    if (bias.defined() && bias.requires_grad()) {
      auto bg = bias.grad();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < m; ++i) bg[i] += g[r * m + i];
    }
  });
  return out;
}

Tensor Graph::add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = make(a.shape(), needs_grad({&a, &b}));
  auto av = a.values(), bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  record(OpKind::Add, {a, b}, out, [a, b, out]() mutable {
    auto g = out.grad();
    if (a.requires_grad()) {
      auto ag = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ag[i] += g[i];
    }
    if (b.requires_grad()) {
      auto bg = b.grad();
      for (std::size_t i = 0; i < g.size(); ++i) bg[i] += g[i];
    }
  });
  return out;
}

Tensor Graph::sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = make(a.shape(), needs_grad({&a, &b}));
  auto av = a.values(), bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
  record(OpKind::Sub, {a, b}, out, [a, b, out]() mutable {
    auto g = out.grad();
    if (a.requires_grad()) {
      auto ag = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ag[i] += g[i];
    }
    if (b.requires_grad()) {
      auto bg = b.grad();
      for (std::size_t i = 0; i < g.size(); ++i) bg[i] -= g[i];
    }
  });
  return out;
}

Tensor Graph::mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = make(a.shape(), needs_grad({&a, &b}));
  auto av = a.values(), bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  record(OpKind::Mul, {a, b}, out, [a, b, out]() mutable {
    auto g = out.grad();
    if (a.requires_grad()) {
      auto ag = a.grad();
      auto bv = b.values();
      for (std::size_t i = 0; i < g.size(); ++i) ag[i] += g[i] * bv[i];
    }
    if (b.requires_grad()) {
      auto bg = b.grad();
      auto av = a.values();
      for (std::size_t i = 0; i < g.size(); ++i) bg[i] += g[i] * av[i];
    }
  });
  return out;
}

Tensor Graph::scale(const Tensor& a, double factor) {
  Tensor out = make(a.shape(), needs_grad({&a}));
  auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * factor;
  record(OpKind::Scale, {a}, out, [a, out, factor]() mutable {
    auto g = out.grad();
    auto ag = a.grad();
    for (std::size_t i = 0; i < g.size(); ++i) ag[i] += g[i] * factor;
  });
  return out;
}

Tensor Graph::sigmoid(const Tensor& x) {
  Tensor out = make(x.shape(), needs_grad({&x}));
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    const double v = xv[i];
    ov[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  record(OpKind::Sigmoid, {x}, out, [x, out]() mutable {
    auto g = out.grad();
    auto y = out.values();
    auto xg = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * y[i] * (1.0 - y[i]);
  });
  return out;
}

Tensor Graph::tanh(const Tensor& x) {
  Tensor out = make(x.shape(), needs_grad({&x}));
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::tanh(xv[i]);
  record(OpKind::Tanh, {x}, out, [x, out]() mutable {
    auto g = out.grad();
    auto y = out.values();
    auto xg = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * (1.0 - y[i] * y[i]);
  });
  return out;
}

Tensor Graph::exp(const Tensor& x) {
  Tensor out = make(x.shape(), needs_grad({&x}));
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::exp(xv[i]);
  record(OpKind::Exp, {x}, out, [x, out]() mutable {
    auto g = out.grad();
    auto y = out.values();
    auto xg = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * y[i];
  });
  return out;
}

Tensor Graph::log(const Tensor& x) {
  auto xv = x.values();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    if (!(xv[i] > 0.0)) {
      throw DomainError("log: non-positive value " + std::to_string(xv[i]) + " at index " + std::to_string(i));
    }
  }
  Tensor out = make(x.shape(), needs_grad({&x}));
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::log(xv[i]);
  record(OpKind::Log, {x}, out, [x, out]() mutable {
    auto g = out.grad();
    auto xv = x.values();
    auto xg = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] / xv[i];
  });
  return out;
}

Tensor Graph::gelu(const Tensor& x) {
  Tensor out = make(x.shape(), needs_grad({&x}));
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = 0.5 * xv[i] * (1.0 + std::erf(xv[i] * std::numbers::sqrt2 / 2.0));
  record(OpKind::Gelu, {x}, out, [x, out]() mutable {
    auto g = out.grad();
    auto xv = x.values();
    auto xg = x.grad();
    const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = xv[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      xg[i] += g[i] * (cdf + v * pdf);
    }
  });
  return out;
}

Tensor Graph::add_broadcast(const Tensor& m, const Tensor& v, std::size_t axis) {
  require_rank(m, 2, "add_broadcast");
  require_rank(v, 1, "add_broadcast");
  const std::size_t r = m.dim(0), c = m.dim(1);
  if (axis > 1 || v.dim(0) != (axis == 0 ? r : c)) {
    throw ShapeError("add_broadcast: cannot broadcast " + shape_string(v.shape()) + " over " +
                     shape_string(m.shape()) + " along axis " + std::to_string(axis));
  }
  Tensor out = make(m.shape(), needs_grad({&m, &v}));
  auto mv = m.values(), vv = v.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) ov[i * c + j] = mv[i * c + j] + vv[axis == 0 ? i : j];
  record(OpKind::AddBroadcast, {m, v}, out, [m, v, out, r, c, axis]() mutable {
    auto g = out.grad();
    if (m.requires_grad()) {
      auto mg = m.grad();
      for (std::size_t i = 0; i < g.size(); ++i) mg[i] += g[i];
    }
    if (v.requires_grad()) {
      auto vg = v.grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) vg[axis == 0 ? i : j] += g[i * c + j];
    }
  });
  return out;
}

Tensor Graph::concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no parts");
  const std::size_t rank = parts[0].rank();
  if (axis >= rank || rank > 2) {
    throw ShapeError("concat: invalid axis " + std::to_string(axis) + " for " + shape_string(parts[0].shape()));
  }
  for (const Tensor& p : parts) {
    bool ok = p.rank() == rank;
    if (ok && rank == 2) ok = p.dim(1 - axis) == parts[0].dim(1 - axis);
    if (!ok) {
      throw ShapeError("concat: part " + shape_string(p.shape()) + " does not match " +
                       shape_string(parts[0].shape()) + " off axis " + std::to_string(axis));
    }
  }
  if (parts.size() == 1) return parts[0];
  // Rank 1 and rank 2 along axis 0 are flat appends; axis 1 interleaves rows.
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    widths.push_back(p.dim(axis));
    total += p.dim(axis);
  }
  Shape shape = parts[0].shape();
  shape[axis] = total;
  Tensor out = make(shape, needs_grad(parts));
  auto ov = out.values();
  const bool interleave = rank == 2 && axis == 1;
  const std::size_t rows = interleave ? shape[0] : 1;
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    auto pv = p.values();
    if (!interleave) {
      std::copy(pv.begin(), pv.end(), ov.begin() + offset);
      offset += pv.size();
    } else {
      const std::size_t w = p.dim(1);
      for (std::size_t r = 0; r < rows; ++r)
        std::copy(pv.begin() + r * w, pv.begin() + (r + 1) * w, ov.begin() + r * total + offset);
      offset += w;
    }
  }
  std::vector<Tensor> saved(parts.begin(), parts.end());
  record(OpKind::Concat, saved, out, [saved, out, interleave, rows, total]() mutable {
    auto g = out.grad();
    std::size_t offset = 0;
    for (Tensor& p : saved) {
      if (!interleave) {
        if (p.requires_grad()) {
          auto pg = p.grad();
          for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += g[offset + i];
        }
        offset += p.numel();
      } else {
        const std::size_t w = p.dim(1);
        if (p.requires_grad()) {
          auto pg = p.grad();
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < w; ++j) pg[r * w + j] += g[r * total + offset + j];
        }
        offset += w;
      }
    }
  });
  return out;
}

Tensor Graph::slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  if (axis >= x.rank() || x.rank() > 2 || begin >= end || end > x.dim(axis)) {
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) + ") on axis " +
                     std::to_string(axis) + " invalid for " + shape_string(x.shape()));
  }
  Shape shape = x.shape();
  shape[axis] = end - begin;
  Tensor out = make(shape, needs_grad({&x}));
  const std::size_t rows = x.rank() == 2 ? x.dim(0) : 1;
  const std::size_t cols = x.rank() == 2 ? x.dim(1) : x.dim(0);
  // Normalize to a (row range, column range) window.
  const bool by_row = x.rank() == 2 && axis == 0;
  const std::size_t r0 = by_row ? begin : 0, r1 = by_row ? end : rows;
  const std::size_t c0 = by_row ? 0 : begin, c1 = by_row ? cols : end;
  const std::size_t w = c1 - c0;
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = c0; c < c1; ++c) ov[(r - r0) * w + (c - c0)] = xv[r * cols + c];
  record(OpKind::Slice, {x}, out, [x, out, r0, r1, c0, c1, cols, w]() mutable {
    auto g = out.grad();
    auto xg = x.grad();
    for (std::size_t r = r0; r < r1; ++r)
      for (std::size_t c = c0; c < c1; ++c) xg[r * cols + c] += g[(r - r0) * w + (c - c0)];
  });
  return out;
}

Tensor Graph::stack(std::span<const Tensor> rows) {
  if (rows.empty()) throw ShapeError("stack: no rows");
  for (const Tensor& r : rows) {
    if (r.rank() != 1 || r.dim(0) != rows[0].dim(0)) {
      throw ShapeError("stack: row " + shape_string(r.shape()) + " does not match " + shape_string(rows[0].shape()));
    }
  }
  const std::size_t n = rows.size(), d = rows[0].dim(0);
  Tensor out = make({n, d}, needs_grad(rows));
  auto ov = out.values();
  for (std::size_t i = 0; i < n; ++i) std::copy(rows[i].values().begin(), rows[i].values().end(), ov.begin() + i * d);
  std::vector<Tensor> saved(rows.begin(), rows.end());
  record(OpKind::Stack, saved, out, [saved, out, d]() mutable {
    auto g = out.grad();
    for (std::size_t i = 0; i < saved.size(); ++i) {
      if (!saved[i].requires_grad()) continue;
      auto rg = saved[i].grad();
      for (std::size_t j = 0; j < d; ++j) rg[j] += g[i * d + j];
    }
  });
  return out;
}

Tensor Graph::row(const Tensor& m, std::size_t index) {
  require_rank(m, 2, "row");
  if (index >= m.dim(0)) {
    throw IndexError("row: index " + std::to_string(index) + " out of range for " + shape_string(m.shape()));
  }
  const std::size_t d = m.dim(1);
  Tensor out = make({d}, needs_grad({&m}));
  auto mv = m.values();
  std::copy(mv.begin() + index * d, mv.begin() + (index + 1) * d, out.values().begin());
  record(OpKind::Row, {m}, out, [m, out, index, d]() mutable {
    auto g = out.grad();
    auto mg = m.grad();
    for (std::size_t j = 0; j < d; ++j) mg[index * d + j] += g[j];
  });
  return out;
}

Tensor Graph::gather_rows(const Tensor& table, std::span<const std::size_t> ids) {
  require_rank(table, 2, "gather_rows");
  if (ids.empty()) throw ShapeError("gather_rows: no ids");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  for (std::size_t id : ids) {
    if (id >= vocab) {
      throw IndexError("lookup: id " + std::to_string(id) + " out of range for table " + shape_string(table.shape()));
    }
  }
  std::vector<std::size_t> saved(ids.begin(), ids.end());
  Tensor out = make({saved.size(), d}, needs_grad({&table}));
  auto tv = table.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < saved.size(); ++i)
    std::copy(tv.begin() + saved[i] * d, tv.begin() + (saved[i] + 1) * d, ov.begin() + i * d);
  record(OpKind::GatherRows, {table}, out, [table, out, saved, d]() mutable {
    auto g = out.grad();
    auto tg = table.grad();
    for (std::size_t i = 0; i < saved.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) tg[saved[i] * d + j] += g[i * d + j];
  });
  return out;
}

Tensor Graph::lookup(const Tensor& table, std::size_t id) {
  require_rank(table, 2, "lookup");
  if (id >= table.dim(0)) {
    throw IndexError("lookup: id " + std::to_string(id) + " out of range for table " + shape_string(table.shape()));
  }
  const std::size_t d = table.dim(1);
  Tensor out = make({d}, needs_grad({&table}));
  auto tv = table.values();
  std::copy(tv.begin() + id * d, tv.begin() + (id + 1) * d, out.values().begin());
  record(OpKind::GatherRows, {table}, out, [table, out, id, d]() mutable {
    auto g = out.grad();
    auto tg = table.grad();
    for (std::size_t j = 0; j < d; ++j) tg[id * d + j] += g[j];
  });
  return out;
}

Tensor Graph::transpose(const Tensor& m) {
  require_rank(m, 2, "transpose");
  const std::size_t r = m.dim(0), c = m.dim(1);
  Tensor out = make({c, r}, needs_grad({&m}));
  auto mv = m.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) ov[j * r + i] = mv[i * c + j];
  record(OpKind::Transpose, {m}, out, [m, out, r, c]() mutable {
    auto g = out.grad();
    auto mg = m.grad();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) mg[i * c + j] += g[j * r + i];
  });
  return out;
}

Tensor Graph::log_sum_exp(const Tensor& x, std::size_t axis) {
  if (x.rank() > 2 || axis >= x.rank()) {
    throw ShapeError("log_sum_exp: invalid axis " + std::to_string(axis) + " for " + shape_string(x.shape()));
  }
  // View x as `groups` independent reductions of `len` entries spaced by `stride`.
  std::size_t groups, len, stride, group_step;
  if (x.rank() == 1) {
    groups = 1, len = x.dim(0), stride = 1, group_step = 0;
  } else if (axis == 0) {
    groups = x.dim(1), len = x.dim(0), stride = x.dim(1), group_step = 1;
  } else {
    groups = x.dim(0), len = x.dim(1), stride = 1, group_step = x.dim(1);
  }
  Tensor out = make({groups}, needs_grad({&x}));
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const std::size_t base = gi * group_step;
    double mx = kNegInf;
    for (std::size_t i = 0; i < len; ++i) mx = std::max(mx, xv[base + i * stride]);
    if (mx == kNegInf) {
      ov[gi] = kNegInf;
      continue;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) acc += std::exp(xv[base + i * stride] - mx);
    ov[gi] = mx + std::log(acc);
  }
  record(OpKind::LogSumExp, {x}, out, [x, out, groups, len, stride, group_step]() mutable {
    auto g = out.grad();
    auto y = out.values();
    auto xv = x.values();
    auto xg = x.grad();
    for (std::size_t gi = 0; gi < groups; ++gi) {
      if (y[gi] == kNegInf || g[gi] == 0.0) continue;
      const std::size_t base = gi * group_step;
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t at = base + i * stride;
        xg[at] += g[gi] * std::exp(xv[at] - y[gi]);
      }
    }
  });
  return out;
}

Tensor Graph::softmax(const Tensor& x) {
  if (x.rank() > 2) throw ShapeError("softmax: unsupported shape " + shape_string(x.shape()));
  const std::size_t cols = x.shape().back();
  const std::size_t rows = x.numel() / cols;
  Tensor out = make(x.shape(), needs_grad({&x}));
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = &xv[r * cols];
    double* yr = &ov[r * cols];
    const double mx = *std::max_element(xr, xr + cols);
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += (yr[j] = std::exp(xr[j] - mx));
    for (std::size_t j = 0; j < cols; ++j) yr[j] /= acc;
  }
  record(OpKind::Softmax, {x}, out, [x, out, rows, cols]() mutable {
    auto g = out.grad();
    auto y = out.values();
    auto xg = x.grad();
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < cols; ++j) dot += g[r * cols + j] * y[r * cols + j];
      for (std::size_t j = 0; j < cols; ++j) xg[r * cols + j] += y[r * cols + j] * (g[r * cols + j] - dot);
    }
  });
  return out;
}

Tensor Graph::layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
  require_rank(x, 2, "layer_norm");
  const std::size_t rows = x.dim(0), d = x.dim(1);
  if (gain.shape() != Shape{d} || shift.shape() != Shape{d}) {
    throw ShapeError("layer_norm: gain " + shape_string(gain.shape()) + " / shift " + shape_string(shift.shape()) +
                     " incompatible with " + shape_string(x.shape()));
  }
  Tensor out = make(x.shape(), needs_grad({&x, &gain, &shift}));
  std::vector<double> normalized(x.numel());
  std::vector<double> inv_std(rows);
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xv[r * d + j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xv[r * d + j] - mean) * (xv[r * d + j] - mean);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      normalized[r * d + j] = (xv[r * d + j] - mean) * inv_std[r];
      ov[r * d + j] = gain[j] * normalized[r * d + j] + shift[j];
    }
  }
  record(OpKind::LayerNorm, {x, gain, shift}, out,
         [x, gain, shift, out, rows, d, normalized = std::move(normalized), inv_std = std::move(inv_std)]() mutable {
           auto g = out.grad();
           if (gain.requires_grad()) {
             auto gg = gain.grad();
             for (std::size_t r = 0; r < rows; ++r)
               for (std::size_t j = 0; j < d; ++j) gg[j] += g[r * d + j] * normalized[r * d + j];
           }
           if (shift.requires_grad()) {
             auto sg = shift.grad();
             for (std::size_t r = 0; r < rows; ++r)
               for (std::size_t j = 0; j < d; ++j) sg[j] += g[r * d + j];
           }
           if (x.requires_grad()) {
             auto xg = x.grad();
             const double n = static_cast<double>(d);
             for (std::size_t r = 0; r < rows; ++r) {
               double sum_d = 0.0, sum_dx = 0.0;
               for (std::size_t j = 0; j < d; ++j) {
                 const double dn = g[r * d + j] * gain[j];
                 sum_d += dn;
                 sum_dx += dn * normalized[r * d + j];
               }
               for (std::size_t j = 0; j < d; ++j) {
                 const double dn = g[r * d + j] * gain[j];
                 xg[r * d + j] += inv_std[r] / n * (n * dn - sum_d - normalized[r * d + j] * sum_dx);
               }
             }
           }
         });
  return out;
}

Tensor Graph::dropout(const Tensor& x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(x.numel());
  for (double& m : mask) m = rng.bernoulli(p) ? 0.0 : keep_scale;
  Tensor out = make(x.shape(), needs_grad({&x}));
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = xv[i] * mask[i];
  record(OpKind::Dropout, {x}, out, [x, out, mask = std::move(mask)]() mutable {
    auto g = out.grad();
    auto xg = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i] * mask[i];
  });
  return out;
}

Tensor Graph::sum(const Tensor& x) {
  Tensor out = make({1}, needs_grad({&x}));
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  out[0] = acc;
  record(OpKind::Sum, {x}, out, [x, out]() mutable {
    const double g = out.grad()[0];
    for (double& v : x.grad()) v += g;
  });
  return out;
}

Tensor Graph::sum_squares(const Tensor& x) {
  Tensor out = make({1}, needs_grad({&x}));
  double acc = 0.0;
  for (double v : x.values()) acc += v * v;
  out[0] = acc;
  record(OpKind::SumSquares, {x}, out, [x, out]() mutable {
    const double g = out.grad()[0];
    auto xv = x.values();
    auto xg = x.grad();
    for (std::size_t i = 0; i < xg.size(); ++i) xg[i] += 2.0 * g * xv[i];
  });
  return out;
}

Tensor Graph::pick(const Tensor& x, std::span<const std::size_t> flat_indices) {
  if (flat_indices.empty()) throw ShapeError("pick: no indices");
  for (std::size_t i : flat_indices) {
    if (i >= x.numel()) {
      throw IndexError("pick: flat index " + std::to_string(i) + " out of range for " + shape_string(x.shape()));
    }
  }
  std::vector<std::size_t> saved(flat_indices.begin(), flat_indices.end());
  Tensor out = make({saved.size()}, needs_grad({&x}));
  for (std::size_t k = 0; k < saved.size(); ++k) out[k] = x[saved[k]];
  record(OpKind::Pick, {x}, out, [x, out, saved]() mutable {
    auto g = out.grad();
    auto xg = x.grad();
    for (std::size_t k = 0; k < saved.size(); ++k) xg[saved[k]] += g[k];
  });
  return out;
}

void Graph::backward(const Tensor& root) {
  if (root.numel() != 1) {
    throw UsageError("backward: root must be a scalar, got shape " + shape_string(root.shape()));
  }
  if (!root.requires_grad()) return;
  auto it = index_.find(root.id());
  if (it == index_.end()) {
    // A leaf: its gradient with respect to itself.
    Tensor leaf = root;
    leaf.grad()[0] += 1.0;
    return;
  }
  for (Node& node : nodes_) node.output.zero_grad();
  nodes_[it->second].output.grad()[0] = 1.0;
  for (std::size_t i = it->second + 1; i-- > 0;) nodes_[i].backward();
}

}  // namespace nerkit::ad
