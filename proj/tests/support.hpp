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

#include <filesystem>
#include <random>
#include <string>

#include "granucount/levels.hpp"
#include "granucount/splits.hpp"
#include "granucount/taxonomy.hpp"

namespace testing {

/// Small bank that still supports every level in every split.
inline const granucount::AssetBank& small_bank() {
  static const auto bank = granucount::build_bank({3, 4, 4, 2, 6, 12});
  return bank;
}

inline const granucount::SplitAssignment& small_splits() {
  static const auto splits = granucount::assign_splits(small_bank(), 5);
  return splits;
}

inline const granucount::AssetBank& full_bank() {
  static const auto bank = granucount::build_bank({7, 16, 10, 2, 10, 50});
  return bank;
}

inline const granucount::SplitAssignment& full_splits() {
  static const auto splits = granucount::assign_splits(full_bank(), 11);
  return splits;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("granucount-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
