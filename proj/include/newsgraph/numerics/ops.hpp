#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "newsgraph/numerics/tape.hpp"

// Differentiable primitives. Every function computes its forward value
// immediately and registers the matching gradient rule on the operands' tape.
// Shape violations throw ShapeError naming the primitive and both shapes.
namespace newsgraph::num {

enum class Axis { Rows = 0, Cols = 1 };

// Owning CSR segment list used by the gather/scatter primitives.
struct SegmentIndex {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> indices;

  std::size_t count() const { return offsets.size() - 1; }
  std::size_t size(std::size_t s) const { return offsets[s + 1] - offsets[s]; }
  void push_segment(std::span<const std::size_t> members);
};

Var matmul(Var a, Var b);
// Same shape, or b a single row broadcast over a's rows.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);

Var concat(const std::vector<Var>& parts, Axis axis);
Var slice(Var a, Axis axis, std::size_t begin, std::size_t end);
Var gather_rows(Var a, std::vector<std::size_t> rows);

Var mean_rows(Var a);
Var sum(Var a);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var leaky_relu(Var a, double slope);
Var softmax_rows(Var a);

// Mean binary cross-entropy over all elements, computed in the fused
// log-sum-exp form. Targets must be 0 or 1 and match the logits' element count.
Var bce_with_logits(Var logits, const Tensor& targets);

// Row s of the result reduces the rows of `a` listed in segment s.
Var segment_mean(Var a, const SegmentIndex& segments);
Var segment_sum(Var a, const SegmentIndex& segments);
// Softmax over contiguous runs of a column: run s is rows offsets[s]..offsets[s+1].
Var segment_softmax(Var scores, const std::vector<std::size_t>& offsets);
// Multiplies row r of `a` by weights[r, 0].
Var row_scale(Var a, Var weights);

// Normalises every column with the batch mean and population variance.
Var batch_norm(Var x, double eps);

}  // namespace newsgraph::num
