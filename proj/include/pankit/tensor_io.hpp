#pragma once

#include "pankit/tensor.hpp"

#include <filesystem>
#include <iosfwd>

namespace pankit {

// Binary tensor file:
//   "PTNS" | u8 version=1 | u8 dtype=0 (f32) | u8 ndim | u8 pad=0
//   | ndim x u32 LE dims | f32 LE payload
inline constexpr char kTensorMagic[4] = {'P', 'T', 'N', 'S'};
inline constexpr std::uint8_t kTensorVersion = 1;

void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

} // namespace pankit
