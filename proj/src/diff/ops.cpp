#include "pgate/diff/ops.hpp"

#include <algorithm>
#include <cmath>

namespace pgate::diff {
namespace {

Tape& tape_of(Var a, Var b) {
    if (a.tape != b.tape) throw std::invalid_argument("operands recorded on different tapes");
    return *a.tape;
}

void require_same_shape(std::string_view op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
    }
}

void require_rank(std::string_view op, const Tensor& a, std::size_t rank) {
    if (a.rank() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(a.shape()));
    }
}

// Vector-like: rank 1, or rank 2 with a single column.
std::size_t vector_length(std::string_view op, const Tensor& a) {
    if (a.rank() == 1) return a.size();
    if (a.rank() == 2 && a.cols() == 1) return a.rows();
    throw ShapeError(std::string(op) + ": expected a vector, got " + shape_string(a.shape()));
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

template <typename Fwd, typename Deriv>
Var unary(std::string_view op, Var a, Fwd fwd, Deriv deriv) {
    const Tensor& x = a.value();
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
    return a.tape->record(op, std::move(out), {a}, [deriv](const BackwardArgs& args) {
        const Tensor& in = *args.inputs[0];
        Tensor& g = *args.grads[0];
        for (std::size_t i = 0; i < in.size(); ++i) {
            g[i] += args.out_grad[i] * deriv(in[i], args.out_value[i]);
        }
    });
}

} // namespace

Var add(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    require_same_shape("add", a.value(), b.value());
    Tensor out = a.value();
    const Tensor& y = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
    return tape.record("add", std::move(out), {a, b}, [](const BackwardArgs& args) {
        for (auto* g : args.grads) {
            if (!g) continue;
            for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += args.out_grad[i];
        }
    });
}

Var sub(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    require_same_shape("sub", a.value(), b.value());
    Tensor out = a.value();
    const Tensor& y = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
    return tape.record("sub", std::move(out), {a, b}, [](const BackwardArgs& args) {
        if (auto* g = args.grads[0]) {
            for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += args.out_grad[i];
        }
        if (auto* g = args.grads[1]) {
            for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= args.out_grad[i];
        }
    });
}

Var mul(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    require_same_shape("mul", a.value(), b.value());
    Tensor out = a.value();
    const Tensor& y = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
    return tape.record("mul", std::move(out), {a, b}, [](const BackwardArgs& args) {
        const Tensor& x = *args.inputs[0];
        const Tensor& y = *args.inputs[1];
        if (auto* g = args.grads[0]) {
            for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += args.out_grad[i] * y[i];
        }
        if (auto* g = args.grads[1]) {
            for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += args.out_grad[i] * x[i];
        }
    });
}

Var scale(Var a, double factor) {
    Tensor out = a.value();
    for (auto& v : out.data()) v *= factor;
    return a.tape->record("scale", std::move(out), {a}, [factor](const BackwardArgs& args) {
        Tensor& g = *args.grads[0];
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * args.out_grad[i];
    });
}

Var add_scalar(Var a, double offset) {
    Tensor out = a.value();
    for (auto& v : out.data()) v += offset;
    return a.tape->record("add_scalar", std::move(out), {a}, [](const BackwardArgs& args) {
        Tensor& g = *args.grads[0];
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += args.out_grad[i];
    });
}

Var matmul(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    require_rank("matmul", x, 2);
    require_rank("matmul", y, 2);
    if (x.cols() != y.rows()) {
        throw ShapeError("matmul: inner dimensions differ " + shape_string(x.shape()) + " * " + shape_string(y.shape()));
    }
    const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
    Tensor out(Shape{m, n}, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double xv = x[i * k + p];
            if (xv == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] += xv * y[p * n + j];
        }
    }
    return tape.record("matmul", std::move(out), {a, b}, [m, k, n](const BackwardArgs& args) {
        const Tensor& x = *args.inputs[0];
        const Tensor& y = *args.inputs[1];
        const Tensor& g = args.out_grad;
        if (auto* gx = args.grads[0]) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * y[p * n + j];
                    (*gx)[i * k + p] += acc;
                }
        }
        if (auto* gy = args.grads[1]) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    const double xv = x[i * k + p];
                    for (std::size_t j = 0; j < n; ++j) (*gy)[p * n + j] += xv * g[i * n + j];
                }
        }
    });
}

Var linear(Var xv, Var wv) {
    Tape& tape = tape_of(xv, wv);
    const Tensor& x = xv.value();
    const Tensor& w = wv.value();
    require_rank("linear", x, 2);
    require_rank("linear", w, 2);
    if (x.cols() != w.cols()) {
        throw ShapeError("linear: input width " + std::to_string(x.cols()) + " does not match weight " +
                         shape_string(w.shape()));
    }
    const std::size_t m = x.rows(), k = x.cols(), n = w.rows();
    Tensor out(Shape{m, n}, 0.0);
    const double* xp = x.data().data();
    const double* wp = w.data().data();
    double* op = out.data().data();
    // Row-wise axpy against w^T so the inner loop runs over contiguous outputs.
    std::vector<double> wt(k * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) wt[p * n + j] = wp[j * k + p];
    for (std::size_t i = 0; i < m; ++i) {
        const double* xr = xp + i * k;
        double* orow = op + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double xv = xr[p];
            if (xv == 0.0) continue;
            const double* wr = wt.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += xv * wr[j];
        }
    }
    return tape.record("linear", std::move(out), {xv, wv}, [m, k, n](const BackwardArgs& args) {
        const double* x = args.inputs[0]->data().data();
        const double* w = args.inputs[1]->data().data();
        const double* g = args.out_grad.data().data();
        if (auto* gxt = args.grads[0]) {
            double* gx = gxt->data().data();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const double gv = g[i * n + j];
                    if (gv == 0.0) continue;
                    const double* wr = w + j * k;
                    double* gr = gx + i * k;
                    for (std::size_t p = 0; p < k; ++p) gr[p] += gv * wr[p];
                }
        }
        if (auto* gwt = args.grads[1]) {
            double* gw = gwt->data().data();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const double gv = g[i * n + j];
                    if (gv == 0.0) continue;
                    const double* xr = x + i * k;
                    double* gr = gw + j * k;
                    for (std::size_t p = 0; p < k; ++p) gr[p] += gv * xr[p];
                }
        }
    });
}

Var sum(Var a) {
    double acc = 0.0;
    for (double v : a.value().data()) acc += v;
    return a.tape->record("sum", Tensor::scalar(acc), {a}, [](const BackwardArgs& args) {
        const double g = args.out_grad[0];
        for (auto& v : args.grads[0]->data()) v += g;
    });
}

Var mean(Var a) {
    const auto n = a.value().size();
    if (n == 0) throw ShapeError("mean: empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var sigmoid(Var a) {
    return unary("sigmoid", a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var relu(Var a) {
    return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var a) {
    return unary("tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var leaky_relu(Var a, double slope) {
    return unary("leaky_relu", a, [slope](double x) { return x > 0.0 ? x : slope * x; },
                 [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var reciprocal(Var a) {
    return unary("reciprocal", a, [](double x) { return 1.0 / x; }, [](double, double y) { return -y * y; });
}

Var square(Var a) {
    return unary("square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var softmax(Var a) {
    const Tensor& x = a.value();
    require_rank("softmax", x, 1);
    if (x.size() == 0) throw ShapeError("softmax: empty vector");
    const double hi = *std::max_element(x.data().begin(), x.data().end());
    Tensor out(x.shape());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - hi);
        total += out[i];
    }
    for (auto& v : out.data()) v /= total;
    return a.tape->record("softmax", std::move(out), {a}, [](const BackwardArgs& args) {
        const Tensor& y = args.out_value;
        const Tensor& g = args.out_grad;
        double dot = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
        Tensor& gx = *args.grads[0];
        for (std::size_t i = 0; i < y.size(); ++i) gx[i] += y[i] * (g[i] - dot);
    });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
    if (parts.empty()) throw ShapeError("concat: no operands");
    Tape& tape = *parts[0].tape;
    const Tensor& first = parts[0].value();
    const std::size_t rank = first.rank();
    if (rank == 0 || rank > 2 || axis >= rank) throw ShapeError("concat: unsupported rank/axis");
    for (const auto& p : parts) {
        if (p.tape != &tape) throw std::invalid_argument("concat: operands on different tapes");
        const auto& s = p.value().shape();
        if (s.size() != rank) throw ShapeError("concat: rank mismatch");
        for (std::size_t d = 0; d < rank; ++d) {
            if (d != axis && s[d] != first.shape()[d]) {
                throw ShapeError("concat: shapes differ off the join axis " + shape_string(s) + " vs " +
                                 shape_string(first.shape()));
            }
        }
    }

    std::vector<std::size_t> extents;
    std::size_t total = 0;
    for (const auto& p : parts) {
        extents.push_back(p.value().shape()[axis]);
        total += extents.back();
    }
    Shape out_shape = first.shape();
    out_shape[axis] = total;
    Tensor out(out_shape);

    // Rows of the output are built by concatenating each part's row-slices.
    const std::size_t outer = (rank == 2 && axis == 1) ? first.rows() : 1;
    const std::size_t out_row = out.size() / outer;
    std::size_t offset = 0;
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        const Tensor& t = parts[pi].value();
        const std::size_t chunk = t.size() / outer;
        for (std::size_t r = 0; r < outer; ++r) {
            std::copy_n(t.data().begin() + static_cast<std::ptrdiff_t>(r * chunk), chunk,
                        out.data().begin() + static_cast<std::ptrdiff_t>(r * out_row + offset));
        }
        offset += chunk;
    }
    return tape.record("concat", std::move(out), parts, [outer, out_row](const BackwardArgs& args) {
        std::size_t offset = 0;
        for (std::size_t pi = 0; pi < args.inputs.size(); ++pi) {
            const std::size_t chunk = args.inputs[pi]->size() / outer;
            if (auto* g = args.grads[pi]) {
                for (std::size_t r = 0; r < outer; ++r)
                    for (std::size_t c = 0; c < chunk; ++c) (*g)[r * chunk + c] += args.out_grad[r * out_row + offset + c];
            }
            offset += chunk;
        }
    });
}

Var slice(Var a, std::size_t begin, std::size_t length) {
    const Tensor& x = a.value();
    require_rank("slice", x, 1);
    if (begin + length > x.size()) throw ShapeError("slice: range out of bounds");
    std::vector<double> vals(x.data().begin() + static_cast<std::ptrdiff_t>(begin),
                             x.data().begin() + static_cast<std::ptrdiff_t>(begin + length));
    return a.tape->record("slice", Tensor::vector(std::move(vals)), {a}, [begin, length](const BackwardArgs& args) {
        Tensor& g = *args.grads[0];
        for (std::size_t i = 0; i < length; ++i) g[begin + i] += args.out_grad[i];
    });
}

Var reshape(Var a, Shape shape) {
    if (shape_size(shape) != a.value().size()) {
        throw ShapeError("reshape: " + shape_string(a.value().shape()) + " to " + shape_string(shape));
    }
    Tensor out(std::move(shape), a.value().values());
    return a.tape->record("reshape", std::move(out), {a}, [](const BackwardArgs& args) {
        Tensor& g = *args.grads[0];
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += args.out_grad[i];
    });
}

Var stack(std::span<const Var> scalars) {
    if (scalars.empty()) throw ShapeError("stack: no operands");
    std::vector<double> vals;
    vals.reserve(scalars.size());
    for (const auto& s : scalars) {
        if (s.value().size() != 1) throw ShapeError("stack: operand is not a scalar");
        vals.push_back(s.value()[0]);
    }
    return scalars[0].tape->record("stack", Tensor::vector(std::move(vals)), scalars, [](const BackwardArgs& args) {
        for (std::size_t i = 0; i < args.grads.size(); ++i) {
            if (auto* g = args.grads[i]) (*g)[0] += args.out_grad[i];
        }
    });
}

Var aggregate(Var xv, Var wv, const EdgeIndexPtr& edges) {
    Tape& tape = tape_of(xv, wv);
    const Tensor& x = xv.value();
    const Tensor& w = wv.value();
    require_rank("aggregate", x, 2);
    if (x.rows() != edges->node_count) throw ShapeError("aggregate: feature rows differ from node count");
    if (vector_length("aggregate", w) != edges->edge_count()) throw ShapeError("aggregate: weight length differs from edge count");
    const std::size_t d = x.cols();
    Tensor out(Shape{x.rows(), d}, 0.0);
    for (std::size_t v = 0; v < edges->node_count; ++v) {
        double* orow = out.data().data() + v * d;
        for (std::size_t e = edges->dst_offsets[v]; e < edges->dst_offsets[v + 1]; ++e) {
            const double we = w[e];
            const double* xrow = x.data().data() + static_cast<std::size_t>(edges->src[e]) * d;
            for (std::size_t c = 0; c < d; ++c) orow[c] += we * xrow[c];
        }
    }
    return tape.record("aggregate", std::move(out), {xv, wv}, [edges, d](const BackwardArgs& args) {
        const Tensor& x = *args.inputs[0];
        const Tensor& w = *args.inputs[1];
        const Tensor& g = args.out_grad;
        for (std::size_t v = 0; v < edges->node_count; ++v) {
            const double* grow = g.data().data() + v * d;
            for (std::size_t e = edges->dst_offsets[v]; e < edges->dst_offsets[v + 1]; ++e) {
                const std::size_t u = edges->src[e];
                if (auto* gx = args.grads[0]) {
                    double* gxrow = gx->data().data() + u * d;
                    for (std::size_t c = 0; c < d; ++c) gxrow[c] += w[e] * grow[c];
                }
                if (auto* gw = args.grads[1]) {
                    const double* xrow = x.data().data() + u * d;
                    double acc = 0.0;
                    for (std::size_t c = 0; c < d; ++c) acc += grow[c] * xrow[c];
                    (*gw)[e] += acc;
                }
            }
        }
    });
}

Var edge_sum(Var a, Var b, const EdgeIndexPtr& edges) {
    Tape& tape = tape_of(a, b);
    if (vector_length("edge_sum", a.value()) != edges->node_count ||
        vector_length("edge_sum", b.value()) != edges->node_count) {
        throw ShapeError("edge_sum: operands must have one entry per node");
    }
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    Tensor out(Shape{edges->edge_count()});
    for (std::size_t e = 0; e < edges->edge_count(); ++e) out[e] = x[edges->src[e]] + y[edges->dst[e]];
    return tape.record("edge_sum", std::move(out), {a, b}, [edges](const BackwardArgs& args) {
        for (std::size_t e = 0; e < edges->edge_count(); ++e) {
            if (auto* ga = args.grads[0]) (*ga)[edges->src[e]] += args.out_grad[e];
            if (auto* gb = args.grads[1]) (*gb)[edges->dst[e]] += args.out_grad[e];
        }
    });
}

Var segment_softmax(Var scores, const EdgeIndexPtr& edges) {
    const Tensor& s = scores.value();
    if (vector_length("segment_softmax", s) != edges->edge_count()) {
        throw ShapeError("segment_softmax: score length differs from edge count");
    }
    Tensor out(Shape{edges->edge_count()});
    for (std::size_t v = 0; v < edges->node_count; ++v) {
        const auto lo = edges->dst_offsets[v], hi = edges->dst_offsets[v + 1];
        if (lo == hi) continue;
        double top = s[lo];
        for (auto e = lo + 1; e < hi; ++e) top = std::max(top, s[e]);
        double total = 0.0;
        for (auto e = lo; e < hi; ++e) {
            out[e] = std::exp(s[e] - top);
            total += out[e];
        }
        for (auto e = lo; e < hi; ++e) out[e] /= total;
    }
    return scores.tape->record("segment_softmax", std::move(out), {scores}, [edges](const BackwardArgs& args) {
        const Tensor& y = args.out_value;
        const Tensor& g = args.out_grad;
        Tensor& gs = *args.grads[0];
        for (std::size_t v = 0; v < edges->node_count; ++v) {
            const auto lo = edges->dst_offsets[v], hi = edges->dst_offsets[v + 1];
            double dot = 0.0;
            for (auto e = lo; e < hi; ++e) dot += g[e] * y[e];
            for (auto e = lo; e < hi; ++e) gs[e] += y[e] * (g[e] - dot);
        }
    });
}

} // namespace pgate::diff
