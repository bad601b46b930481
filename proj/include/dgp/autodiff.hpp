#pragma once

// Reverse-mode differentiation over Tensor values.
//
// A Var is a handle on a node of a recorded expression graph. Nodes whose
// inputs are all constants (or frozen parameters) keep no backward closure,
// so inference with frozen parameters costs no more than a plain forward
// pass. backward() on a 1x1 Var accumulates d(loss)/d(param) into the grad
// slot of every non-frozen Param reached by the expression.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dgp/tensor.hpp"

namespace dgp {

struct Param {
    std::string name;
    Tensor value;
    Tensor grad;
    bool frozen = false;
};

// Insertion-ordered collection of uniquely named parameters. Param
// addresses are stable for the lifetime of the set.
class ParamSet {
public:
    ParamSet() = default;
    ParamSet(const ParamSet& other);
    ParamSet& operator=(const ParamSet& other);
    ParamSet(ParamSet&&) noexcept = default;
    ParamSet& operator=(ParamSet&&) noexcept = default;

    Param& add(std::string name, Tensor value);
    bool contains(const std::string& name) const { return index_.count(name) != 0; }
    Param& at(const std::string& name);
    const Param& at(const std::string& name) const;

    std::size_t size() const { return params_.size(); }
    Param& operator[](std::size_t i) { return *params_[i]; }
    const Param& operator[](std::size_t i) const { return *params_[i]; }

    void freeze_all(bool frozen = true);
    void zero_grad();
    std::size_t scalar_count() const;

    // True when names, shapes and values match exactly.
    bool same_values(const ParamSet& other) const;

private:
    std::vector<std::unique_ptr<Param>> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

namespace ad {

struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;
    Param* param = nullptr;
};

class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

    const Tensor& value() const { return node_->value; }
    double item() const { return node_->value.item(); }
    std::size_t rows() const { return node_->value.rows(); }
    std::size_t cols() const { return node_->value.cols(); }
    bool requires_grad() const { return node_->requires_grad; }
    bool valid() const { return static_cast<bool>(node_); }
    const std::shared_ptr<Node>& node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

Var constant(Tensor value);
Var constant(double value);
// Leaf bound to a parameter. Frozen parameters act as constants.
Var leaf(Param& param);

// Accumulates gradients of a 1x1 loss into every reachable non-frozen Param.
void backward(const Var& loss);

// ---- forward ops ------------------------------------------------------------
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);         // elementwise
Var add_bias(const Var& a, const Var& bias);  // bias is 1 x cols, added to every row
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var scale_by(const Var& a, const Var& s);     // s is 1x1
Var mul_rows(const Var& a, const Var& col);   // col is rows x 1, scales each row
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var exp(const Var& a);
Var reciprocal(const Var& a);
Var clamp_min(const Var& a, double floor);    // zero gradient where clamped
Var sum(const Var& a);                        // -> 1x1
Var sum_rows(const Var& a);                   // column sums -> 1 x cols
Var mean_rows(const Var& a);                  // column means -> 1 x cols
Var sum_cols(const Var& a);                   // row sums -> rows x 1
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(const Var& a, std::size_t begin, std::size_t end);
Var gather_rows(const Var& a, std::span<const std::size_t> index);
Var scatter_add_rows(const Var& a, std::span<const std::size_t> index, std::size_t out_rows);
Var pick(const Var& a, std::span<const std::pair<std::size_t, std::size_t>> cells);  // -> k x 1
Var l2_normalize_rows(const Var& a);
// Row-wise log-softmax. With exclude_diagonal, entry (i,i) is left out of
// the normalizer of row i and its output is set to 0 with no gradient.
Var log_softmax_rows(const Var& a, bool exclude_diagonal = false);
Var softmax_rows(const Var& a);

// Mean over rows of -sum_c target(r,c) * max(logp(r,c), log(floor)).
inline constexpr double kLogProbFloor = 1e-12;
Var cross_entropy(const Var& log_probs, const Tensor& target);

}  // namespace ad
}  // namespace dgp
