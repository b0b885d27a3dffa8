#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cttp/autodiff/tensor.hpp"

namespace cttp::ad {

/// Ordered record of differentiable ops. Constructing a Tape makes it the
/// active recorder for the calling thread until it is destroyed; ops only
/// record when a tape is active and at least one input requires grad.
///
/// Nodes are appended in execution order, so the list is topologically
/// sorted by construction and backward() is a single reverse sweep.
template <class T>
class Tape {
public:
    using StoragePtr = std::shared_ptr<TensorStorage<T>>;

    struct Node {
        std::string op;
        std::vector<StoragePtr> inputs;
        StoragePtr output;
        std::function<void()> backward;
    };

    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active();

    void record(std::string op, std::vector<StoragePtr> inputs, StoragePtr output,
                std::function<void()> backward);

    /// Seeds d(loss)/d(loss) = 1 and propagates to every reachable leaf.
    /// Leaf gradients accumulate; call reset() before reusing the tape.
    void backward(const Tensor<T>& loss);

    void reset();

    std::size_t size() const { return nodes_.size(); }
    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t last_visit_count() const { return visits_; }

private:
    std::vector<Node> nodes_;
    Tape* previous_ = nullptr;
    bool consumed_ = false;
    std::size_t visits_ = 0;
};

/// Suspends recording on the calling thread for the guard's lifetime.
template <class T>
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    Tape<T>* saved_;
};

namespace detail {
template <class T>
Tape<T>*& active_tape_slot();
}

extern template class Tape<float>;
extern template class Tape<double>;
extern template class NoGradGuard<float>;
extern template class NoGradGuard<double>;

} // namespace cttp::ad
