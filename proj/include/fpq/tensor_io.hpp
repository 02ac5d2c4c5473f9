/*
 * Copyright 2026 The fpq Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <iosfwd>

#include "fpq/tensor.hpp"

namespace fpq {

// Text layout: a "rows cols" line, then one line per row of whitespace
// separated values ('#' starts a comment). Values are written with 17
// significant digits so doubles round-trip.
//
// Binary layout: uint32 rows, uint32 cols (8-byte header), then rows*cols
// IEEE-754 float32 values, row-major, all little-endian.

enum class TensorFileFormat { text, binary };

/// ".bin" and ".f32" select binary, anything else text.
TensorFileFormat guess_tensor_format(const std::filesystem::path& path);

Tensor2D read_tensor_text(std::istream& in);
void write_tensor_text(std::ostream& out, const Tensor2D& t);

Tensor2D read_tensor_binary(std::istream& in);
void write_tensor_binary(std::ostream& out, const Tensor2D& t);

Tensor2D read_tensor(const std::filesystem::path& path, TensorFileFormat fmt);
void write_tensor(const std::filesystem::path& path, const Tensor2D& t, TensorFileFormat fmt);

}  // namespace fpq
