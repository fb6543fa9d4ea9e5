#include "newsgraph/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "newsgraph/errors.hpp"
#include "newsgraph/numerics/kernels.hpp"

namespace newsgraph::num {

namespace {

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + format_shape(a.shape()) + " vs " +
                   format_shape(b.shape()));
}

[[noreturn]] void bad_operand(const char* op, const Tensor& a, const std::string& why) {
  throw ShapeError(std::string(op) + ": " + why + " (shape " + format_shape(a.shape()) + ")");
}

bool is_row_broadcast(const Tensor& a, const Tensor& b) {
  return b.rows() == 1 && a.rows() != 1 && b.cols() == a.cols();
}

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

enum class Binary { Add, Sub, Mul };

Var binary(const char* op, Binary kind, Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool broadcast = is_row_broadcast(av, bv);
  if (!broadcast && !av.same_shape(bv)) mismatch(op, av, bv);

  const std::size_t rows = av.rows();
  const std::size_t cols = av.cols();
  Tensor out = Tensor::matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = av[r * cols + c];
      const double y = broadcast ? bv[c] : bv[r * cols + c];
      double v = 0.0;
      switch (kind) {
        case Binary::Add: v = x + y; break;
        case Binary::Sub: v = x - y; break;
        case Binary::Mul: v = x * y; break;
      }
      out[r * cols + c] = v;
    }
  }

  return a.tape().record(op, std::move(out), {a, b}, [kind, broadcast, rows, cols](const BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output;
    const Tensor& x = *ctx.inputs[0];
    const Tensor& y = *ctx.inputs[1];
    if (Tensor* ga = ctx.input_grads[0]) {
      for (std::size_t i = 0; i < rows * cols; ++i) {
        const double dy = broadcast ? y[i % cols] : y[i];
        (*ga)[i] += kind == Binary::Mul ? g[i] * dy : g[i];
      }
    }
    if (Tensor* gb = ctx.input_grads[1]) {
      const double sign = kind == Binary::Sub ? -1.0 : 1.0;
      for (std::size_t i = 0; i < rows * cols; ++i) {
        const double contrib = kind == Binary::Mul ? g[i] * x[i] : sign * g[i];
        (*gb)[broadcast ? i % cols : i] += contrib;
      }
    }
  });
}

// Elementwise map whose derivative is expressed through input and output.
template <typename Forward, typename Derivative>
Var unary(const char* op, Var a, Forward f, Derivative df) {
  const Tensor& av = a.value();
  Tensor out = Tensor::matrix(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.numel(); ++i) out[i] = f(av[i]);
  return a.tape().record(op, std::move(out), {a}, [df](const BackwardContext& ctx) {
    Tensor* ga = ctx.input_grads[0];
    if (ga == nullptr) return;
    const Tensor& x = *ctx.inputs[0];
    const Tensor& y = ctx.output;
    const Tensor& g = ctx.grad_output;
    for (std::size_t i = 0; i < x.numel(); ++i) (*ga)[i] += g[i] * df(x[i], y[i]);
  });
}

void check_segments(const char* op, const Tensor& a, const SegmentIndex& segments) {
  if (segments.offsets.empty() || segments.offsets.back() != segments.indices.size()) {
    bad_operand(op, a, "malformed segment offsets");
  }
  for (std::size_t idx : segments.indices) {
    if (idx >= a.rows()) bad_operand(op, a, "segment index " + std::to_string(idx) + " out of range");
  }
}

Var segment_reduce(const char* op, Var a, const SegmentIndex& segments, bool mean) {
  const Tensor& av = a.value();
  check_segments(op, av, segments);
  const std::size_t cols = av.cols();
  Tensor out = Tensor::matrix(segments.count(), cols);
  kernels::parallel::segment_reduce({segments.offsets, segments.indices}, cols, av.data(),
                                    out.data(), mean);
  return a.tape().record(op, std::move(out), {a}, [segments, cols, mean](const BackwardContext& ctx) {
    Tensor* ga = ctx.input_grads[0];
    if (ga == nullptr) return;
    const Tensor& g = ctx.grad_output;
    for (std::size_t s = 0; s < segments.count(); ++s) {
      const std::size_t lo = segments.offsets[s];
      const std::size_t hi = segments.offsets[s + 1];
      if (hi == lo) continue;
      const double count = static_cast<double>(hi - lo);
      for (std::size_t e = lo; e < hi; ++e) {
        double* dst = ga->data() + segments.indices[e] * cols;
        const double* src = g.data() + s * cols;
        for (std::size_t c = 0; c < cols; ++c) dst[c] += mean ? src[c] / count : src[c];
      }
    }
  });
}

}  // namespace

void SegmentIndex::push_segment(std::span<const std::size_t> members) {
  indices.insert(indices.end(), members.begin(), members.end());
  offsets.push_back(indices.size());
}

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() > 2 || bv.rank() > 2 || av.cols() != bv.rows()) mismatch("matmul", av, bv);
  const std::size_t m = av.rows();
  const std::size_t k = av.cols();
  const std::size_t n = bv.cols();
  Tensor out = Tensor::matrix(m, n);
  kernels::parallel::gemm_nn(m, k, n, av.data(), bv.data(), out.data());
  return a.tape().record("matmul", std::move(out), {a, b}, [m, k, n](const BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output;
    if (Tensor* ga = ctx.input_grads[0]) {
      kernels::parallel::gemm_nt(m, n, k, g.data(), ctx.inputs[1]->data(), ga->data());
    }
    if (Tensor* gb = ctx.input_grads[1]) {
      kernels::parallel::gemm_tn(m, k, n, ctx.inputs[0]->data(), g.data(), gb->data());
    }
  });
}

Var add(Var a, Var b) { return binary("add", Binary::Add, a, b); }
Var sub(Var a, Var b) { return binary("sub", Binary::Sub, a, b); }
Var mul(Var a, Var b) { return binary("mul", Binary::Mul, a, b); }

Var scale(Var a, double factor) {
  return unary("scale", a, [factor](double x) { return factor * x; },
               [factor](double, double) { return factor; });
}

Var concat(const std::vector<Var>& parts, Axis axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  const Tensor& first = parts.front().value();
  std::size_t rows = 0;
  std::size_t cols = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    if (axis == Axis::Cols) {
      if (v.rows() != first.rows()) mismatch("concat", first, v);
      rows = v.rows();
      cols += v.cols();
    } else {
      if (v.cols() != first.cols()) mismatch("concat", first, v);
      rows += v.rows();
      cols = v.cols();
    }
  }
  Tensor out = Tensor::matrix(rows, cols);
  std::vector<std::size_t> extents;
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    if (axis == Axis::Cols) {
      for (std::size_t r = 0; r < rows; ++r)
        std::copy_n(v.data() + r * v.cols(), v.cols(), out.data() + r * cols + offset);
      offset += v.cols();
      extents.push_back(v.cols());
    } else {
      std::copy_n(v.data(), v.numel(), out.data() + offset * cols);
      offset += v.rows();
      extents.push_back(v.rows());
    }
  }
  return parts.front().tape().record(
      "concat", std::move(out), parts, [axis, rows, cols, extents](const BackwardContext& ctx) {
        const Tensor& g = ctx.grad_output;
        std::size_t off = 0;
        for (std::size_t i = 0; i < extents.size(); ++i) {
          Tensor* gi = ctx.input_grads[i];
          const std::size_t ext = extents[i];
          if (gi != nullptr) {
            if (axis == Axis::Cols) {
              for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < ext; ++c) (*gi)[r * ext + c] += g[r * cols + off + c];
            } else {
              for (std::size_t j = 0; j < ext * cols; ++j) (*gi)[j] += g[off * cols + j];
            }
          }
          off += ext;
        }
      });
}

Var slice(Var a, Axis axis, std::size_t begin, std::size_t end) {
  const Tensor& av = a.value();
  const std::size_t rows = av.rows();
  const std::size_t cols = av.cols();
  const std::size_t limit = axis == Axis::Rows ? rows : cols;
  if (begin > end || end > limit) {
    bad_operand("slice", av, "range [" + std::to_string(begin) + "," + std::to_string(end) + ") out of bounds");
  }
  const std::size_t out_rows = axis == Axis::Rows ? end - begin : rows;
  const std::size_t out_cols = axis == Axis::Cols ? end - begin : cols;
  Tensor out = Tensor::matrix(out_rows, out_cols);
  if (axis == Axis::Rows) {
    std::copy_n(av.data() + begin * cols, out.numel(), out.data());
  } else {
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(av.data() + r * cols + begin, out_cols, out.data() + r * out_cols);
  }
  return a.tape().record("slice", std::move(out), {a},
                         [axis, begin, cols, out_rows, out_cols](const BackwardContext& ctx) {
                           Tensor* ga = ctx.input_grads[0];
                           if (ga == nullptr) return;
                           const Tensor& g = ctx.grad_output;
                           if (axis == Axis::Rows) {
                             for (std::size_t j = 0; j < g.numel(); ++j) (*ga)[begin * cols + j] += g[j];
                           } else {
                             for (std::size_t r = 0; r < out_rows; ++r)
                               for (std::size_t c = 0; c < out_cols; ++c)
                                 (*ga)[r * cols + begin + c] += g[r * out_cols + c];
                           }
                         });
}

Var gather_rows(Var a, std::vector<std::size_t> rows) {
  const Tensor& av = a.value();
  const std::size_t cols = av.cols();
  for (std::size_t r : rows) {
    if (r >= av.rows()) bad_operand("gather_rows", av, "row " + std::to_string(r) + " out of range");
  }
  Tensor out = Tensor::matrix(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy_n(av.data() + rows[i] * cols, cols, out.data() + i * cols);
  return a.tape().record("gather_rows", std::move(out), {a},
                         [rows = std::move(rows), cols](const BackwardContext& ctx) {
                           Tensor* ga = ctx.input_grads[0];
                           if (ga == nullptr) return;
                           const Tensor& g = ctx.grad_output;
                           for (std::size_t i = 0; i < rows.size(); ++i)
                             for (std::size_t c = 0; c < cols; ++c) (*ga)[rows[i] * cols + c] += g[i * cols + c];
                         });
}

Var mean_rows(Var a) {
  const Tensor& av = a.value();
  const std::size_t rows = av.rows();
  const std::size_t cols = av.cols();
  if (rows == 0) bad_operand("mean_rows", av, "no rows");
  Tensor out = Tensor::matrix(1, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c] += av[r * cols + c];
  for (std::size_t c = 0; c < cols; ++c) out[c] /= static_cast<double>(rows);
  return a.tape().record("mean_rows", std::move(out), {a}, [rows, cols](const BackwardContext& ctx) {
    Tensor* ga = ctx.input_grads[0];
    if (ga == nullptr) return;
    const Tensor& g = ctx.grad_output;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) (*ga)[r * cols + c] += g[c] / static_cast<double>(rows);
  });
}

Var sum(Var a) {
  const Tensor& av = a.value();
  double total = 0.0;
  for (double v : av.values()) total += v;
  return a.tape().record("sum", Tensor::scalar(total), {a}, [](const BackwardContext& ctx) {
    Tensor* ga = ctx.input_grads[0];
    if (ga == nullptr) return;
    const double g = ctx.grad_output[0];
    for (double& v : ga->values()) v += g;
  });
}

Var sigmoid(Var a) {
  return unary("sigmoid", a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var a, double slope) {
  return unary("leaky_relu", a, [slope](double x) { return x > 0.0 ? x : slope * x; },
               [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var softmax_rows(Var a) {
  const Tensor& av = a.value();
  const std::size_t rows = av.rows();
  const std::size_t cols = av.cols();
  Tensor out = Tensor::matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = av.data() + r * cols;
    double* o = out.data() + r * cols;
    const double peak = *std::max_element(in, in + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += (o[c] = std::exp(in[c] - peak));
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  return a.tape().record("softmax_rows", std::move(out), {a}, [rows, cols](const BackwardContext& ctx) {
    Tensor* ga = ctx.input_grads[0];
    if (ga == nullptr) return;
    const Tensor& y = ctx.output;
    const Tensor& g = ctx.grad_output;
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * y[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c)
        (*ga)[r * cols + c] += y[r * cols + c] * (g[r * cols + c] - dot);
    }
  });
}

Var bce_with_logits(Var logits, const Tensor& targets) {
  const Tensor& z = logits.value();
  if (z.numel() != targets.numel()) mismatch("bce_with_logits", z, targets);
  if (z.numel() == 0) bad_operand("bce_with_logits", z, "no logits");
  for (double t : targets.values()) {
    if (t != 0.0 && t != 1.0) throw Error("bce_with_logits: targets must be 0 or 1");
  }
  const std::size_t n = z.numel();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = z[i];
    total += std::max(x, 0.0) - x * targets[i] + std::log1p(std::exp(-std::abs(x)));
  }
  return logits.tape().record("bce_with_logits", Tensor::scalar(total / static_cast<double>(n)),
                              {logits}, [targets, n](const BackwardContext& ctx) {
                                Tensor* ga = ctx.input_grads[0];
                                if (ga == nullptr) return;
                                const Tensor& x = *ctx.inputs[0];
                                const double g = ctx.grad_output[0] / static_cast<double>(n);
                                for (std::size_t i = 0; i < n; ++i)
                                  (*ga)[i] += g * (stable_sigmoid(x[i]) - targets[i]);
                              });
}

Var segment_mean(Var a, const SegmentIndex& segments) {
  return segment_reduce("segment_mean", a, segments, true);
}

Var segment_sum(Var a, const SegmentIndex& segments) {
  return segment_reduce("segment_sum", a, segments, false);
}

Var segment_softmax(Var scores, const std::vector<std::size_t>& offsets) {
  const Tensor& sv = scores.value();
  if (sv.cols() != 1) bad_operand("segment_softmax", sv, "expected a single column");
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != sv.rows()) {
    bad_operand("segment_softmax", sv, "offsets do not cover the rows");
  }
  Tensor out = Tensor::matrix(sv.rows(), 1);
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const std::size_t lo = offsets[s];
    const std::size_t hi = offsets[s + 1];
    if (hi == lo) continue;
    const double peak = *std::max_element(sv.data() + lo, sv.data() + hi);
    double total = 0.0;
    for (std::size_t e = lo; e < hi; ++e) total += (out[e] = std::exp(sv[e] - peak));
    for (std::size_t e = lo; e < hi; ++e) out[e] /= total;
  }
  return scores.tape().record("segment_softmax", std::move(out), {scores}, [offsets](const BackwardContext& ctx) {
    Tensor* ga = ctx.input_grads[0];
    if (ga == nullptr) return;
    const Tensor& y = ctx.output;
    const Tensor& g = ctx.grad_output;
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
      double dot = 0.0;
      for (std::size_t e = offsets[s]; e < offsets[s + 1]; ++e) dot += g[e] * y[e];
      for (std::size_t e = offsets[s]; e < offsets[s + 1]; ++e) (*ga)[e] += y[e] * (g[e] - dot);
    }
  });
}

Var row_scale(Var a, Var weights) {
  const Tensor& av = a.value();
  const Tensor& wv = weights.value();
  if (wv.cols() != 1 || wv.rows() != av.rows()) mismatch("row_scale", av, wv);
  const std::size_t rows = av.rows();
  const std::size_t cols = av.cols();
  Tensor out = Tensor::matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = av[r * cols + c] * wv[r];
  return a.tape().record("row_scale", std::move(out), {a, weights}, [rows, cols](const BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output;
    const Tensor& x = *ctx.inputs[0];
    const Tensor& w = *ctx.inputs[1];
    if (Tensor* ga = ctx.input_grads[0]) {
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) (*ga)[r * cols + c] += g[r * cols + c] * w[r];
    }
    if (Tensor* gw = ctx.input_grads[1]) {
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * x[r * cols + c];
        (*gw)[r] += dot;
      }
    }
  });
}

Var batch_norm(Var x, double eps) {
  const Tensor& xv = x.value();
  const std::size_t rows = xv.rows();
  const std::size_t cols = xv.cols();
  if (rows == 0) bad_operand("batch_norm", xv, "empty batch");
  if (!(eps > 0.0)) throw Error("batch_norm: eps must be positive");
  std::vector<double> mean(cols, 0.0);
  std::vector<double> var(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) mean[c] += xv[r * cols + c];
  for (double& m : mean) m /= static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = xv[r * cols + c] - mean[c];
      var[c] += d * d;
    }
  std::vector<double> inv_std(cols);
  for (std::size_t c = 0; c < cols; ++c)
    inv_std[c] = 1.0 / std::sqrt(var[c] / static_cast<double>(rows) + eps);

  Tensor out = Tensor::matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      out[r * cols + c] = (xv[r * cols + c] - mean[c]) * inv_std[c];

  return x.tape().record("batch_norm", std::move(out), {x}, [rows, cols, inv_std](const BackwardContext& ctx) {
    Tensor* gx = ctx.input_grads[0];
    if (gx == nullptr) return;
    const Tensor& y = ctx.output;
    const Tensor& g = ctx.grad_output;
    const double n = static_cast<double>(rows);
    for (std::size_t c = 0; c < cols; ++c) {
      double sum_g = 0.0;
      double sum_gy = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        sum_g += g[r * cols + c];
        sum_gy += g[r * cols + c] * y[r * cols + c];
      }
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t i = r * cols + c;
        (*gx)[i] += inv_std[c] / n * (n * g[i] - sum_g - y[i] * sum_gy);
      }
    }
  });
}

}  // namespace newsgraph::num
