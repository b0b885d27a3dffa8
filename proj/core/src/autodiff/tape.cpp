#include "cttp/autodiff/tape.hpp"

#include "cttp/error.hpp"

namespace cttp::ad {

namespace detail {
template <class T>
Tape<T>*& active_tape_slot() {
    thread_local Tape<T>* slot = nullptr;
    return slot;
}
template Tape<float>*& active_tape_slot<float>();
template Tape<double>*& active_tape_slot<double>();
} // namespace detail

template <class T>
Tape<T>::Tape() : previous_(detail::active_tape_slot<T>()) {
    detail::active_tape_slot<T>() = this;
}

template <class T>
Tape<T>::~Tape() {
    detail::active_tape_slot<T>() = previous_;
}

template <class T>
Tape<T>* Tape<T>::active() {
    return detail::active_tape_slot<T>();
}

template <class T>
void Tape<T>::record(std::string op, std::vector<StoragePtr> inputs, StoragePtr output,
                     std::function<void()> backward) {
    if (consumed_) throw NumericError("tape: recording into a tape that was already differentiated; reset() first");
    nodes_.push_back(Node{std::move(op), std::move(inputs), std::move(output), std::move(backward)});
}

template <class T>
void Tape<T>::backward(const Tensor<T>& loss) {
    if (loss.numel() != 1) {
        throw ShapeError("backward: loss must be a scalar, got shape " + shape_str(loss.shape()));
    }
    if (nodes_.empty()) throw NumericError("backward: tape is empty");
    if (consumed_) throw NumericError("backward: tape already differentiated; reset() before a second backward");
    consumed_ = true;

    auto& seed = loss.storage()->grad;
    seed.assign(1, T(1));

    visits_ = 0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        if (it->output->grad.empty()) continue; // not on a path to the loss
        it->backward();
        ++visits_;
    }
}

template <class T>
void Tape<T>::reset() {
    nodes_.clear();
    consumed_ = false;
    visits_ = 0;
}

template <class T>
NoGradGuard<T>::NoGradGuard() : saved_(detail::active_tape_slot<T>()) {
    detail::active_tape_slot<T>() = nullptr;
}

template <class T>
NoGradGuard<T>::~NoGradGuard() {
    detail::active_tape_slot<T>() = saved_;
}

template class Tape<float>;
template class Tape<double>;
template class NoGradGuard<float>;
template class NoGradGuard<double>;

} // namespace cttp::ad
