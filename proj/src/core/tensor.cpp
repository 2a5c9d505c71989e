#include "core/tensor.hpp"

#include <algorithm>
#include <unordered_set>

namespace graphae {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }
void set_grad_enabled(bool on) { g_grad_enabled = on; }

template <typename S>
Tensor<S> Tensor<S>::zeros(const std::vector<int>& shape, bool requires_grad) {
    return full(shape, S(0), requires_grad);
}

template <typename S>
Tensor<S> Tensor<S>::full(const std::vector<int>& shape, S v, bool requires_grad) {
    auto n = std::make_shared<Node<S>>();
    n->shape = shape;
    n->value.assign(size_t(n->numel()), v);
    n->requires_grad = requires_grad;
    n->leaf = true;
    return Tensor(std::move(n));
}

template <typename S>
Tensor<S> Tensor<S>::from_data(const std::vector<int>& shape, std::vector<S> data,
                               bool requires_grad) {
    auto n = std::make_shared<Node<S>>();
    n->shape = shape;
    GA_CHECK(int64_t(data.size()) == n->numel(), "from_data: size/shape mismatch");
    n->value = std::move(data);
    n->requires_grad = requires_grad;
    n->leaf = true;
    return Tensor(std::move(n));
}

template <typename S>
void backward(const Tensor<S>& root, bool retain) {
    GA_CHECK(root.numel() == 1, "backward: root must be scalar");
    auto* rn = root.node().get();
    if (!rn->requires_grad) return;

    // iterative post-order DFS over the recorded graph
    std::vector<Node<S>*> order;
    std::unordered_set<Node<S>*> seen;
    std::vector<std::pair<Node<S>*, size_t>> stack;
    stack.emplace_back(rn, 0);
    seen.insert(rn);
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Node<S>* p = node->parents[idx++].get();
            if (p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    rn->ensure_grad();
    rn->grad[0] += S(1);

    // children appear after parents in post-order, so walk it backwards
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<S>* n = *it;
        if (n->backward_fn) {
            n->ensure_grad();
            n->backward_fn(*n);
        }
        if (!retain && !n->leaf) {
            n->release_buffers();
            n->backward_fn = nullptr;  // drop saved-for-backward captures
        }
    }
}

template struct Node<float>;
template struct Node<double>;
template class Tensor<float>;
template class Tensor<double>;
template void backward<float>(const Tensor<float>&, bool);
template void backward<double>(const Tensor<double>&, bool);

}  // namespace graphae
