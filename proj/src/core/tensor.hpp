#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "core/check.hpp"

namespace graphae {

// Define-by-run autodiff over dense row-major tensors. Every op builds a
// Node whose backward_fn scatters the node's gradient into its parents.
// Templated on the scalar type: training runs in float, gradient checks
// instantiate the same code in double.

bool grad_enabled();
void set_grad_enabled(bool on);

// RAII guard disabling graph recording (inference / data paths).
struct NoGrad {
    bool prev;
    NoGrad() : prev(grad_enabled()) { set_grad_enabled(false); }
    ~NoGrad() { set_grad_enabled(prev); }
};

template <typename S>
struct Node {
    std::vector<int> shape;
    std::vector<S> value;
    std::vector<S> grad;  // allocated lazily, same numel as value
    bool requires_grad = false;
    bool leaf = false;
    std::vector<std::shared_ptr<Node<S>>> parents;
    std::function<void(Node<S>&)> backward_fn;

    int64_t numel() const {
        int64_t n = 1;
        for (int d : shape) n *= d;
        return n;
    }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), S(0));
    }
    void release_buffers() {
        std::vector<S>().swap(value);
        std::vector<S>().swap(grad);
    }
};

template <typename S>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node<S>> n) : n_(std::move(n)) {}

    static Tensor zeros(const std::vector<int>& shape, bool requires_grad = false);
    static Tensor full(const std::vector<int>& shape, S v, bool requires_grad = false);
    static Tensor from_data(const std::vector<int>& shape, std::vector<S> data,
                            bool requires_grad = false);

    bool defined() const { return bool(n_); }
    const std::vector<int>& shape() const { return n_->shape; }
    int dim(int i) const { return n_->shape[size_t(i)]; }
    int ndim() const { return int(n_->shape.size()); }
    int64_t numel() const { return n_->numel(); }

    S* data() { return n_->value.data(); }
    const S* data() const { return n_->value.data(); }
    std::vector<S>& values() { return n_->value; }
    const std::vector<S>& values() const { return n_->value; }

    S* grad_data() { n_->ensure_grad(); return n_->grad.data(); }
    const std::vector<S>& grad() const { return n_->grad; }
    bool has_grad() const { return !n_->grad.empty(); }
    void zero_grad() { if (!n_->grad.empty()) std::fill(n_->grad.begin(), n_->grad.end(), S(0)); }

    bool requires_grad() const { return n_->requires_grad; }
    void set_requires_grad(bool on) { n_->requires_grad = on; n_->leaf = true; }

    S item() const {
        GA_CHECK(numel() == 1, "item() on non-scalar tensor");
        return n_->value[0];
    }

    // Value copy detached from the graph.
    Tensor detach() const {
        auto m = std::make_shared<Node<S>>();
        m->shape = n_->shape;
        m->value = n_->value;
        m->leaf = true;
        return Tensor(std::move(m));
    }

    std::shared_ptr<Node<S>>& node() { return n_; }
    const std::shared_ptr<Node<S>>& node() const { return n_; }

private:
    std::shared_ptr<Node<S>> n_;
};

// Backward pass from a scalar root. Frees intermediate buffers as soon as
// they are consumed unless retain is set; leaf gradients accumulate.
template <typename S>
void backward(const Tensor<S>& root, bool retain = false);

extern template struct Node<float>;
extern template struct Node<double>;
extern template class Tensor<float>;
extern template class Tensor<double>;
extern template void backward<float>(const Tensor<float>&, bool);
extern template void backward<double>(const Tensor<double>&, bool);

}  // namespace graphae
