#pragma once

#include "pgate/diff/tape.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace pgate::diff {

// Elementwise, operands of identical shape.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);

// a: m x k, b: k x n.
Var matmul(Var a, Var b);
// x: m x k, w: n x k; returns x * w^T (m x n), the layout used for weight matrices.
Var linear(Var x, Var w);

Var sum(Var a);
Var mean(Var a);

Var sigmoid(Var a);
Var relu(Var a);
Var tanh(Var a);
Var leaky_relu(Var a, double slope);
Var reciprocal(Var a);
Var square(Var a);

// Rank-1 softmax with max subtraction.
Var softmax(Var a);

// Rank 1: axis 0 only. Rank 2: axis 0 (stack rows) or 1 (join columns).
Var concat(std::span<const Var> parts, std::size_t axis);
Var slice(Var a, std::size_t begin, std::size_t length);
Var reshape(Var a, Shape shape);
// Gathers scalars into a rank-1 tensor.
Var stack(std::span<const Var> scalars);

/// Directed edge list grouped by destination: edges [dst_offsets[v], dst_offsets[v+1])
/// all end at v. Message passing aggregates along src -> dst.
struct EdgeIndex {
    std::size_t node_count = 0;
    std::vector<std::uint32_t> src;
    std::vector<std::uint32_t> dst;
    std::vector<std::size_t> dst_offsets;

    std::size_t edge_count() const { return src.size(); }
};

using EdgeIndexPtr = std::shared_ptr<const EdgeIndex>;

// out[v] = sum over edges e=(u->v) of weight[e] * x[u]. x: N x d, weight: E.
Var aggregate(Var x, Var weight, const EdgeIndexPtr& edges);
// out[e] = a[src_e] + b[dst_e]. a, b: N or N x 1; result: E.
Var edge_sum(Var a, Var b, const EdgeIndexPtr& edges);
// Softmax of scores over each destination's incoming edges. scores: E.
Var segment_softmax(Var scores, const EdgeIndexPtr& edges);

} // namespace pgate::diff
