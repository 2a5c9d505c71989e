#pragma once

#include <initializer_list>
#include <memory>

#include "core/tensor.hpp"

namespace graphae {
namespace ops {
namespace detail {

template <typename S>
std::shared_ptr<Node<S>> new_node(std::vector<int> shape) {
    auto n = std::make_shared<Node<S>>();
    n->shape = std::move(shape);
    n->value.resize(size_t(n->numel()));
    return n;
}

template <typename S>
bool want_grad(std::initializer_list<const Tensor<S>*> ts) {
    if (!grad_enabled()) return false;
    for (const Tensor<S>* t : ts)
        if (t->defined() && t->requires_grad()) return true;
    return false;
}

}  // namespace detail
}  // namespace ops
}  // namespace graphae
