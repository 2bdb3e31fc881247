// Copyright 2026 The granucount Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace granucount {

/// Opaque integer identifier, distinct per entity kind.
template <class Tag>
struct Id {
  std::uint32_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}
  constexpr auto operator<=>(const Id&) const = default;
};

using SuperCategoryId = Id<struct SuperCategoryTag>;
using CategoryId = Id<struct CategoryTag>;
using InstanceTypeId = Id<struct InstanceTypeTag>;
using AssetId = Id<struct AssetTag>;
using BackgroundId = Id<struct BackgroundTag>;

}  // namespace granucount

template <class Tag>
struct std::hash<granucount::Id<Tag>> {
  std::size_t operator()(const granucount::Id<Tag>& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
