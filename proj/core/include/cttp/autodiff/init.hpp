#pragma once

#include <cstddef>

#include "cttp/autodiff/rng.hpp"
#include "cttp/autodiff/tensor.hpp"

namespace cttp::ad {

enum class InitScheme { uniform_fan_in, zeros };

/// uniform_fan_in draws U(-1/sqrt(fan_in), 1/sqrt(fan_in)); zeros ignores
/// fan_in and leaves the generator untouched.
template <class T>
Tensor<T> seeded_init(const Shape& shape, InitScheme scheme, std::size_t fan_in, Rng& rng);

} // namespace cttp::ad
