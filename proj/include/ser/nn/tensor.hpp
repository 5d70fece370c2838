// include/ser/nn/tensor.hpp

// Copyright 2026  SER Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <vector>

#include "ser/common.hpp"

namespace ser::nn {

enum class Mode { train, infer };

/// (batch, length, channels) with channels contiguous.  Dense activations
/// use len == 1 and put their features on the channel axis.
template <class T>
struct Tensor {
  size_t batch = 0, len = 0, ch = 0;
  std::vector<T> v;

  Tensor() = default;
  Tensor(size_t b, size_t l, size_t c) : batch(b), len(l), ch(c), v(b * l * c) {}

  size_t size() const { return v.size(); }
  T* row(size_t b, size_t i) { return v.data() + (b * len + i) * ch; }
  const T* row(size_t b, size_t i) const {
    return v.data() + (b * len + i) * ch;
  }
  T& at(size_t b, size_t i, size_t c) { return v[(b * len + i) * ch + c]; }
  T at(size_t b, size_t i, size_t c) const {
    return v[(b * len + i) * ch + c];
  }
  void zero() { std::fill(v.begin(), v.end(), T(0)); }
};

}  // namespace ser::nn
