#include "pankit/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

namespace pankit {

namespace {

template <typename T>
T to_little(T v)
{
  if constexpr (std::endian::native == std::endian::big) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    bits = __builtin_bswap32(bits);
    std::memcpy(&v, &bits, sizeof bits);
  }
  return v;
}

template <typename T>
void put(std::ostream& os, T v)
{
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is)
{
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error("tensor file: truncated header or payload");
  return to_little(v);
}

} // namespace

void write_tensor(std::ostream& os, const Tensor& t)
{
  if (t.ndim() < 1 || t.ndim() > 255)
    throw std::invalid_argument("write_tensor: unsupported rank " + std::to_string(t.ndim()));
  os.write(kTensorMagic, 4);
  const std::uint8_t header[4] = {kTensorVersion, 0, static_cast<std::uint8_t>(t.ndim()), 0};
  os.write(reinterpret_cast<const char*>(header), 4);
  for (int d : t.shape())
    put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(t.data().data()),
             static_cast<std::streamsize>(t.size() * sizeof(float)));
  } else {
    for (float v : t.span())
      put(os, v);
  }
  if (!os)
    throw std::runtime_error("write_tensor: stream error");
}

Tensor read_tensor(std::istream& is)
{
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kTensorMagic, 4) != 0)
    throw std::runtime_error("tensor file: bad magic (expected PTNS)");
  std::uint8_t header[4];
  if (!is.read(reinterpret_cast<char*>(header), 4))
    throw std::runtime_error("tensor file: truncated header");
  if (header[0] != kTensorVersion)
    throw std::runtime_error("tensor file: unsupported version " + std::to_string(header[0]));
  if (header[1] != 0)
    throw std::runtime_error("tensor file: unsupported dtype " + std::to_string(header[1]));
  const int ndim = header[2];
  if (ndim < 1)
    throw std::runtime_error("tensor file: rank must be >= 1");
  Shape shape(static_cast<std::size_t>(ndim));
  for (int& d : shape) {
    const auto v = get<std::uint32_t>(is);
    if (v == 0 || v > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
      throw std::runtime_error("tensor file: invalid dimension " + std::to_string(v));
    d = static_cast<int>(v);
  }
  Tensor t(shape);
  if constexpr (std::endian::native == std::endian::little) {
    if (!is.read(reinterpret_cast<char*>(t.data().data()),
                 static_cast<std::streamsize>(t.size() * sizeof(float))))
      throw std::runtime_error("tensor file: truncated payload");
  } else {
    for (float& v : t.span())
      v = get<float>(is);
  }
  return t;
}

void save_tensor(const std::filesystem::path& path, const Tensor& t)
{
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_tensor(os, t);
}

Tensor load_tensor(const std::filesystem::path& path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw std::runtime_error("cannot open " + path.string());
  try {
    return read_tensor(is);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

} // namespace pankit
