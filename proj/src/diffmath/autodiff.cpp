#include "dgp/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace dgp {

// ---- ParamSet ---------------------------------------------------------------

ParamSet::ParamSet(const ParamSet& other) { *this = other; }

ParamSet& ParamSet::operator=(const ParamSet& other) {
    if (this == &other) return *this;
    params_.clear();
    index_ = other.index_;
    params_.reserve(other.params_.size());
    for (const auto& p : other.params_) params_.push_back(std::make_unique<Param>(*p));
    return *this;
}

Param& ParamSet::add(std::string name, Tensor value) {
    if (contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
    auto p = std::make_unique<Param>();
    p->name = name;
    p->grad = Tensor(value.rows(), value.cols());
    p->value = std::move(value);
    index_.emplace(std::move(name), params_.size());
    params_.push_back(std::move(p));
    return *params_.back();
}

Param& ParamSet::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
    return *params_[it->second];
}

const Param& ParamSet::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
    return *params_[it->second];
}

void ParamSet::freeze_all(bool frozen) {
    for (auto& p : params_) p->frozen = frozen;
}

void ParamSet::zero_grad() {
    for (auto& p : params_) p->grad.fill(0.0);
}

std::size_t ParamSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
}

bool ParamSet::same_values(const ParamSet& other) const {
    if (size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        if (params_[i]->name != other.params_[i]->name) return false;
        if (!(params_[i]->value == other.params_[i]->value)) return false;
    }
    return true;
}

namespace ad {
namespace {

using NodePtr = std::shared_ptr<Node>;

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
    std::ostringstream os;
    os << op << ": incompatible shapes " << shape_str(a) << " and " << shape_str(b);
    throw ShapeError(os.str());
}

Var make(Tensor value, std::vector<NodePtr> parents, std::function<void(Node&)> bw,
         const char* op) {
    if (!value.all_finite()) throw NumericError(std::string(op) + ": non-finite result");
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
    if (n->requires_grad) {
        n->parents = std::move(parents);
        n->backward = std::move(bw);
    }
    return Var(std::move(n));
}

// Gradient slot of a parent, or nullptr when it needs none.
Tensor* grad_of(Node& self, std::size_t i) {
    Node& p = *self.parents[i];
    if (!p.requires_grad) return nullptr;
    if (!p.value.same_shape(p.grad)) p.grad = Tensor(p.value.rows(), p.value.cols());
    return &p.grad;
}

const Tensor& val(Node& self, std::size_t i) { return self.parents[i]->value; }

}  // namespace

Var constant(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    return Var(std::move(n));
}

Var constant(double value) { return constant(Tensor::scalar(value)); }

Var leaf(Param& param) {
    auto n = std::make_shared<Node>();
    n->value = param.value;
    if (!param.frozen) {
        n->requires_grad = true;
        n->param = &param;
    }
    return Var(std::move(n));
}

void backward(const Var& loss) {
    if (!loss.valid() || loss.value().size() != 1 || loss.rows() != 1) {
        throw ShapeError("backward: loss must be a 1x1 tensor");
    }
    if (!loss.requires_grad()) return;

    // Iterative post-order DFS gives a topological order (parents first).
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.node().get(), 0);
    seen.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (Node* n : order) n->grad = Tensor(n->value.rows(), n->value.cols());
    loss.node()->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward) n->backward(*n);
    }
    for (Node* n : order) {
        if (n->param == nullptr) continue;
        auto& g = n->param->grad.values();
        const auto& src = n->grad.values();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += src[i];
    }
}

Var matmul(const Var& a, const Var& b) {
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    if (A.cols() != B.rows()) shape_fail("matmul", A, B);
    const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
    Tensor C(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = C.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = A(i, p);
            if (aip == 0.0) continue;
            const double* brow = B.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
    return make(std::move(C), {a.node(), b.node()}, [m, k, n](Node& self) {
        const Tensor& G = self.grad;
        const Tensor& A = val(self, 0);
        const Tensor& B = val(self, 1);
        if (Tensor* gA = grad_of(self, 0)) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += G(i, j) * B(p, j);
                    (*gA)(i, p) += s;
                }
        }
        if (Tensor* gB = grad_of(self, 1)) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    const double aip = A(i, p);
                    if (aip == 0.0) continue;
                    for (std::size_t j = 0; j < n; ++j) (*gB)(p, j) += aip * G(i, j);
                }
        }
    }, "matmul");
}

Var transpose(const Var& a) {
    const Tensor& A = a.value();
    Tensor T(A.cols(), A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) T(j, i) = A(i, j);
    return make(std::move(T), {a.node()}, [](Node& self) {
        if (Tensor* g = grad_of(self, 0))
            for (std::size_t i = 0; i < g->rows(); ++i)
                for (std::size_t j = 0; j < g->cols(); ++j) (*g)(i, j) += self.grad(j, i);
    }, "transpose");
}

namespace {

template <class F, class DA, class DB>
Var binary_elementwise(const Var& a, const Var& b, const char* op, F f, DA da, DB db) {
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    if (!A.same_shape(B)) shape_fail(op, A, B);
    Tensor C(A.rows(), A.cols());
    for (std::size_t i = 0; i < C.size(); ++i) C[i] = f(A[i], B[i]);
    return make(std::move(C), {a.node(), b.node()}, [da, db](Node& self) {
        const Tensor& A = val(self, 0);
        const Tensor& B = val(self, 1);
        if (Tensor* g = grad_of(self, 0))
            for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * da(A[i], B[i]);
        if (Tensor* g = grad_of(self, 1))
            for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * db(A[i], B[i]);
    }, op);
}

// y = f(x) elementwise; dfdx receives (x, y).
template <class F, class D>
Var unary_elementwise(const Var& a, const char* op, F f, D dfdx) {
    const Tensor& A = a.value();
    Tensor Y(A.rows(), A.cols());
    for (std::size_t i = 0; i < Y.size(); ++i) Y[i] = f(A[i]);
    return make(std::move(Y), {a.node()}, [dfdx](Node& self) {
        if (Tensor* g = grad_of(self, 0)) {
            const Tensor& A = val(self, 0);
            for (std::size_t i = 0; i < g->size(); ++i)
                (*g)[i] += self.grad[i] * dfdx(A[i], self.value[i]);
        }
    }, op);
}

}  // namespace

Var add(const Var& a, const Var& b) {
    return binary_elementwise(
        a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
        [](double, double) { return 1.0; });
}

Var sub(const Var& a, const Var& b) {
    return binary_elementwise(
        a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
        [](double, double) { return -1.0; });
}

Var mul(const Var& a, const Var& b) {
    return binary_elementwise(
        a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
        [](double x, double) { return x; });
}

Var add_bias(const Var& a, const Var& bias) {
    const Tensor& A = a.value();
    const Tensor& B = bias.value();
    if (B.rows() != 1 || B.cols() != A.cols()) shape_fail("add_bias", A, B);
    Tensor C = A;
    for (std::size_t i = 0; i < C.rows(); ++i)
        for (std::size_t j = 0; j < C.cols(); ++j) C(i, j) += B[j];
    return make(std::move(C), {a.node(), bias.node()}, [](Node& self) {
        if (Tensor* g = grad_of(self, 0))
            for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
        if (Tensor* g = grad_of(self, 1))
            for (std::size_t i = 0; i < self.grad.rows(); ++i)
                for (std::size_t j = 0; j < self.grad.cols(); ++j) (*g)[j] += self.grad(i, j);
    }, "add_bias");
}

Var scale(const Var& a, double s) {
    return unary_elementwise(
        a, "scale", [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(const Var& a, double s) {
    return unary_elementwise(
        a, "add_scalar", [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var scale_by(const Var& a, const Var& s) {
    if (s.value().size() != 1 || s.rows() != 1) shape_fail("scale_by", a.value(), s.value());
    const double sv = s.item();
    Tensor C = a.value();
    for (auto& v : C.values()) v *= sv;
    return make(std::move(C), {a.node(), s.node()}, [](Node& self) {
        const Tensor& A = val(self, 0);
        const double sv = val(self, 1)[0];
        if (Tensor* g = grad_of(self, 0))
            for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * sv;
        if (Tensor* g = grad_of(self, 1)) {
            double acc = 0.0;
            for (std::size_t i = 0; i < A.size(); ++i) acc += self.grad[i] * A[i];
            (*g)[0] += acc;
        }
    }, "scale_by");
}

Var mul_rows(const Var& a, const Var& col) {
    const Tensor& A = a.value();
    const Tensor& W = col.value();
    if (W.cols() != 1 || W.rows() != A.rows()) shape_fail("mul_rows", A, W);
    Tensor C = A;
    for (std::size_t i = 0; i < C.rows(); ++i)
        for (std::size_t j = 0; j < C.cols(); ++j) C(i, j) *= W[i];
    return make(std::move(C), {a.node(), col.node()}, [](Node& self) {
        const Tensor& A = val(self, 0);
        const Tensor& W = val(self, 1);
        if (Tensor* g = grad_of(self, 0))
            for (std::size_t i = 0; i < A.rows(); ++i)
                for (std::size_t j = 0; j < A.cols(); ++j) (*g)(i, j) += self.grad(i, j) * W[i];
        if (Tensor* g = grad_of(self, 1))
            for (std::size_t i = 0; i < A.rows(); ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < A.cols(); ++j) acc += self.grad(i, j) * A(i, j);
                (*g)[i] += acc;
            }
    }, "mul_rows");
}

Var relu(const Var& a) {
    return unary_elementwise(
        a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& a) {
    return unary_elementwise(
        a, "sigmoid",
        [](double x) {
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Var exp(const Var& a) {
    return unary_elementwise(
        a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var reciprocal(const Var& a) {
    return unary_elementwise(
        a, "reciprocal", [](double x) { return 1.0 / x; }, [](double, double y) { return -y * y; });
}

Var clamp_min(const Var& a, double floor) {
    return unary_elementwise(
        a, "clamp_min", [floor](double x) { return x < floor ? floor : x; },
        [floor](double x, double) { return x < floor ? 0.0 : 1.0; });
}

Var sum(const Var& a) {
    double s = 0.0;
    for (double v : a.value().values()) s += v;
    return make(Tensor::scalar(s), {a.node()}, [](Node& self) {
        if (Tensor* g = grad_of(self, 0)) {
            const double gs = self.grad[0];
            for (auto& v : g->values()) v += gs;
        }
    }, "sum");
}

Var sum_rows(const Var& a) {
    const Tensor& A = a.value();
    Tensor S(1, A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) S[j] += A(i, j);
    return make(std::move(S), {a.node()}, [](Node& self) {
        if (Tensor* g = grad_of(self, 0))
            for (std::size_t i = 0; i < g->rows(); ++i)
                for (std::size_t j = 0; j < g->cols(); ++j) (*g)(i, j) += self.grad[j];
    }, "sum_rows");
}

Var mean_rows(const Var& a) {
    if (a.rows() == 0) throw ShapeError("mean_rows: zero rows");
    return scale(sum_rows(a), 1.0 / static_cast<double>(a.rows()));
}

Var sum_cols(const Var& a) {
    const Tensor& A = a.value();
    Tensor S(A.rows(), 1);
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) S[i] += A(i, j);
    return make(std::move(S), {a.node()}, [](Node& self) {
        if (Tensor* g = grad_of(self, 0))
            for (std::size_t i = 0; i < g->rows(); ++i)
                for (std::size_t j = 0; j < g->cols(); ++j) (*g)(i, j) += self.grad[i];
    }, "sum_cols");
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no inputs");
    const std::size_t cols = parts[0].cols();
    std::size_t rows = 0;
    std::vector<NodePtr> parents;
    for (const auto& p : parts) {
        if (p.cols() != cols) shape_fail("concat_rows", parts[0].value(), p.value());
        rows += p.rows();
        parents.push_back(p.node());
    }
    Tensor C(rows, cols);
    std::size_t off = 0;
    for (const auto& p : parts) {
        std::copy(p.value().values().begin(), p.value().values().end(), C.data() + off);
        off += p.value().size();
    }
    return make(std::move(C), std::move(parents), [](Node& self) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < self.parents.size(); ++i) {
            const std::size_t n = self.parents[i]->value.size();
            if (Tensor* g = grad_of(self, i))
                for (std::size_t k = 0; k < n; ++k) (*g)[k] += self.grad[off + k];
            off += n;
        }
    }, "concat_rows");
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    const std::size_t rows = parts[0].rows();
    std::size_t cols = 0;
    std::vector<NodePtr> parents;
    for (const auto& p : parts) {
        if (p.rows() != rows) shape_fail("concat_cols", parts[0].value(), p.value());
        cols += p.cols();
        parents.push_back(p.node());
    }
    Tensor C(rows, cols);
    std::size_t off = 0;
    for (const auto& p : parts) {
        const Tensor& P = p.value();
        for (std::size_t i = 0; i < rows; ++i)
            std::copy(P.data() + i * P.cols(), P.data() + (i + 1) * P.cols(),
                      C.data() + i * cols + off);
        off += P.cols();
    }
    return make(std::move(C), std::move(parents), [](Node& self) {
        const std::size_t rows = self.value.rows(), cols = self.value.cols();
        std::size_t off = 0;
        for (std::size_t k = 0; k < self.parents.size(); ++k) {
            const std::size_t pc = self.parents[k]->value.cols();
            if (Tensor* g = grad_of(self, k))
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < pc; ++j) (*g)(i, j) += self.grad[i * cols + off + j];
            off += pc;
        }
    }, "concat_cols");
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t end) {
    const Tensor& A = a.value();
    if (begin > end || end > A.rows()) throw ShapeError("slice_rows: range out of bounds");
    Tensor C(end - begin, A.cols(),
             std::vector<double>(A.data() + begin * A.cols(), A.data() + end * A.cols()));
    return make(std::move(C), {a.node()}, [begin](Node& self) {
        if (Tensor* g = grad_of(self, 0)) {
            const std::size_t off = begin * g->cols();
            for (std::size_t k = 0; k < self.grad.size(); ++k) (*g)[off + k] += self.grad[k];
        }
    }, "slice_rows");
}

Var gather_rows(const Var& a, std::span<const std::size_t> index) {
    const Tensor& A = a.value();
    Tensor C(index.size(), A.cols());
    for (std::size_t r = 0; r < index.size(); ++r) {
        if (index[r] >= A.rows()) throw ShapeError("gather_rows: index out of range");
        std::copy(A.data() + index[r] * A.cols(), A.data() + (index[r] + 1) * A.cols(),
                  C.data() + r * A.cols());
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    return make(std::move(C), {a.node()}, [idx = std::move(idx)](Node& self) {
        if (Tensor* g = grad_of(self, 0)) {
            const std::size_t c = g->cols();
            for (std::size_t r = 0; r < idx.size(); ++r)
                for (std::size_t j = 0; j < c; ++j) (*g)(idx[r], j) += self.grad(r, j);
        }
    }, "gather_rows");
}

Var scatter_add_rows(const Var& a, std::span<const std::size_t> index, std::size_t out_rows) {
    const Tensor& A = a.value();
    if (index.size() != A.rows()) throw ShapeError("scatter_add_rows: index length mismatch");
    Tensor C(out_rows, A.cols());
    for (std::size_t r = 0; r < index.size(); ++r) {
        if (index[r] >= out_rows) throw ShapeError("scatter_add_rows: index out of range");
        for (std::size_t j = 0; j < A.cols(); ++j) C(index[r], j) += A(r, j);
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    return make(std::move(C), {a.node()}, [idx = std::move(idx)](Node& self) {
        if (Tensor* g = grad_of(self, 0)) {
            const std::size_t c = g->cols();
            for (std::size_t r = 0; r < idx.size(); ++r)
                for (std::size_t j = 0; j < c; ++j) (*g)(r, j) += self.grad(idx[r], j);
        }
    }, "scatter_add_rows");
}

Var pick(const Var& a, std::span<const std::pair<std::size_t, std::size_t>> cells) {
    const Tensor& A = a.value();
    Tensor C(cells.size(), 1);
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k].first >= A.rows() || cells[k].second >= A.cols())
            throw ShapeError("pick: cell out of range");
        C[k] = A(cells[k].first, cells[k].second);
    }
    std::vector<std::pair<std::size_t, std::size_t>> cs(cells.begin(), cells.end());
    return make(std::move(C), {a.node()}, [cs = std::move(cs)](Node& self) {
        if (Tensor* g = grad_of(self, 0))
            for (std::size_t k = 0; k < cs.size(); ++k) (*g)(cs[k].first, cs[k].second) += self.grad[k];
    }, "pick");
}

Var l2_normalize_rows(const Var& a) {
    const Tensor& A = a.value();
    Tensor Y(A.rows(), A.cols());
    std::vector<double> norms(A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        double ss = 0.0;
        for (std::size_t j = 0; j < A.cols(); ++j) ss += A(i, j) * A(i, j);
        // Zero rows stay zero; the tiny floor keeps the division finite.
        norms[i] = std::max(std::sqrt(ss), 1e-12);
        for (std::size_t j = 0; j < A.cols(); ++j) Y(i, j) = A(i, j) / norms[i];
    }
    return make(std::move(Y), {a.node()}, [norms = std::move(norms)](Node& self) {
        Tensor* g = grad_of(self, 0);
        if (!g) return;
        const Tensor& Y = self.value;
        for (std::size_t i = 0; i < Y.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < Y.cols(); ++j) dot += self.grad(i, j) * Y(i, j);
            for (std::size_t j = 0; j < Y.cols(); ++j)
                (*g)(i, j) += (self.grad(i, j) - dot * Y(i, j)) / norms[i];
        }
    }, "l2_normalize_rows");
}

Var log_softmax_rows(const Var& a, bool exclude_diagonal) {
    const Tensor& A = a.value();
    Tensor Y(A.rows(), A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < A.cols(); ++j)
            if (!(exclude_diagonal && i == j)) mx = std::max(mx, A(i, j));
        double s = 0.0;
        for (std::size_t j = 0; j < A.cols(); ++j)
            if (!(exclude_diagonal && i == j)) s += std::exp(A(i, j) - mx);
        const double lse = mx + std::log(s);
        for (std::size_t j = 0; j < A.cols(); ++j)
            Y(i, j) = (exclude_diagonal && i == j) ? 0.0 : A(i, j) - lse;
    }
    return make(std::move(Y), {a.node()}, [exclude_diagonal](Node& self) {
        Tensor* g = grad_of(self, 0);
        if (!g) return;
        const Tensor& Y = self.value;
        for (std::size_t i = 0; i < Y.rows(); ++i) {
            double gs = 0.0;
            for (std::size_t j = 0; j < Y.cols(); ++j)
                if (!(exclude_diagonal && i == j)) gs += self.grad(i, j);
            for (std::size_t j = 0; j < Y.cols(); ++j) {
                if (exclude_diagonal && i == j) continue;
                (*g)(i, j) += self.grad(i, j) - std::exp(Y(i, j)) * gs;
            }
        }
    }, "log_softmax_rows");
}

Var softmax_rows(const Var& a) { return exp(log_softmax_rows(a)); }

Var cross_entropy(const Var& log_probs, const Tensor& target) {
    const Tensor& L = log_probs.value();
    if (!L.same_shape(target)) shape_fail("cross_entropy", L, target);
    if (L.rows() == 0) throw ShapeError("cross_entropy: zero rows");
    const double floor = std::log(kLogProbFloor);
    const double inv_n = 1.0 / static_cast<double>(L.rows());
    double acc = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i) acc -= target[i] * std::max(L[i], floor);
    return make(Tensor::scalar(acc * inv_n), {log_probs.node()},
                [target, floor, inv_n](Node& self) {
                    if (Tensor* g = grad_of(self, 0)) {
                        const Tensor& L = val(self, 0);
                        const double gs = self.grad[0];
                        for (std::size_t i = 0; i < L.size(); ++i)
                            if (L[i] >= floor) (*g)[i] -= gs * target[i] * inv_n;
                    }
                },
                "cross_entropy");
}

}  // namespace ad
}  // namespace dgp
