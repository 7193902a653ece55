#include "pankit/tensor.hpp"

#include <algorithm>

namespace pankit {

std::string to_string(const Shape& shape)
{
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

void require_3d(const Tensor& t, const char* op)
{
  if (t.ndim() != 3)
    throw std::invalid_argument(std::string(op) + ": expected a C x H x W tensor, got " +
                                to_string(t.shape()));
}

// Depthwise case: one input channel per group and one output channel per group.
void depthwise(const Tensor& input, const Tensor& weights, Tensor& out, int stride, int padding)
{
  const int k = weights.dim(2);
  const int h = input.height(), w = input.width();
  const int oh = out.height(), ow = out.width();
  for (int c = 0; c < input.channels(); ++c) {
    const float* src = input.data().data() + static_cast<Eigen::Index>(c) * h * w;
    const float* ker = weights.data().data() + static_cast<Eigen::Index>(c) * k * k;
    float* dst = out.data().data() + static_cast<Eigen::Index>(c) * oh * ow;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        float acc = 0.0f;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * stride - padding + kx;
            if (ix < 0 || ix >= w) continue;
            acc += src[iy * w + ix] * ker[ky * k + kx];
          }
        }
        dst[oy * ow + ox] += acc;
      }
    }
  }
}

// General grouped case: im2col over blocks of output pixels, then one GEMM per block.
void grouped_gemm(const Tensor& input, const Tensor& weights, Tensor& out, int stride, int padding,
                  int groups)
{
  const int k = weights.dim(2);
  const int h = input.height(), w = input.width();
  const int oh = out.height(), ow = out.width();
  const int cin_g = input.channels() / groups;
  const int cout_g = out.channels() / groups;
  const int rows = cin_g * k * k;
  const int pixels = oh * ow;
  const int chunk = std::clamp((1 << 22) / rows, 1, pixels);

  const Eigen::Map<const Tensor::RowMatrix> wmat(weights.data().data(), out.channels(), rows);
  auto omat = out.channel_matrix();
  Tensor::RowMatrix cols(rows, chunk);

  for (int g = 0; g < groups; ++g) {
    for (int start = 0; start < pixels; start += chunk) {
      const int n = std::min(chunk, pixels - start);
      for (int ci = 0; ci < cin_g; ++ci) {
        const float* src = input.data().data() + static_cast<Eigen::Index>(g * cin_g + ci) * h * w;
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            float* row = cols.row((ci * k + ky) * k + kx).data();
            for (int j = 0; j < n; ++j) {
              const int p = start + j;
              const int iy = (p / ow) * stride - padding + ky;
              const int ix = (p % ow) * stride - padding + kx;
              row[j] = (iy >= 0 && iy < h && ix >= 0 && ix < w) ? src[iy * w + ix] : 0.0f;
            }
          }
        }
      }
      omat.block(g * cout_g, start, cout_g, n).noalias() +=
          wmat.block(g * cout_g, 0, cout_g, rows) * cols.leftCols(n);
    }
  }
}

} // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const std::optional<Eigen::VectorXf>& bias,
              int stride, int padding, int groups)
{
  require_3d(input, "conv2d");
  if (weights.ndim() != 4)
    throw std::invalid_argument("conv2d: weights must be C_out x C_in/groups x k x k, got " +
                                to_string(weights.shape()));
  if (groups < 1 || input.channels() % groups != 0 || weights.dim(0) % groups != 0 ||
      weights.dim(1) * groups != input.channels())
    throw std::invalid_argument("conv2d: input " + to_string(input.shape()) +
                                " is incompatible with weights " + to_string(weights.shape()) +
                                " for groups=" + std::to_string(groups));
  const int k = weights.dim(2);
  if (weights.dim(3) != k || k % 2 == 0)
    throw std::invalid_argument("conv2d: kernel must be square with odd size, got " +
                                to_string(weights.shape()));
  if (stride != 1 && stride != 2)
    throw std::invalid_argument("conv2d: stride must be 1 or 2");
  if (padding < 0)
    throw std::invalid_argument("conv2d: padding must be non-negative");
  const int cout = weights.dim(0);
  if (bias && bias->size() != cout)
    throw std::invalid_argument("conv2d: bias length " + std::to_string(bias->size()) +
                                " does not match " + std::to_string(cout) + " output channels");
  const int oh = (input.height() + 2 * padding - k) / stride + 1;
  const int ow = (input.width() + 2 * padding - k) / stride + 1;
  if (oh < 1 || ow < 1)
    throw std::invalid_argument("conv2d: input " + to_string(input.shape()) +
                                " is smaller than the kernel");

  Tensor out({cout, oh, ow});
  if (bias)
    out.channel_matrix().colwise() = *bias;

  if (groups == input.channels() && groups == cout)
    depthwise(input, weights, out, stride, padding);
  else
    grouped_gemm(input, weights, out, stride, padding, groups);
  return out;
}

Tensor batch_norm_relu(const Tensor& input, const BatchNormParams& bn, bool apply_relu)
{
  require_3d(input, "batch_norm_relu");
  const int c = input.channels();
  if (bn.mean.size() != c || bn.var.size() != c || bn.gamma.size() != c || bn.beta.size() != c)
    throw std::invalid_argument("batch_norm_relu: parameter vectors must have length " +
                                std::to_string(c));
  if ((bn.var.array() < 0.0f).any())
    throw std::invalid_argument("batch_norm_relu: variance must be non-negative");

  const Eigen::ArrayXf scale = bn.gamma.array() / (bn.var.array() + bn.eps).sqrt();
  const Eigen::ArrayXf shift = bn.beta.array() - scale * bn.mean.array();
  Tensor out = input;
  auto m = out.channel_matrix().array();
  m.colwise() *= scale;
  m.colwise() += shift;
  if (apply_relu)
    m = m.max(0.0f);
  return out;
}

Tensor upsample_bilinear(const Tensor& input, int factor)
{
  require_3d(input, "upsample_bilinear");
  if (factor < 2)
    throw std::invalid_argument("upsample_bilinear: factor must be >= 2");
  const int h = input.height(), w = input.width();
  const int oh = h * factor, ow = w * factor;

  struct Tap {
    int lo, hi;
    float frac;
  };
  auto taps = [factor](int out_size, int in_size) {
    std::vector<Tap> t(static_cast<std::size_t>(out_size));
    for (int o = 0; o < out_size; ++o) {
      const float src = std::max((static_cast<float>(o) + 0.5f) / static_cast<float>(factor) - 0.5f, 0.0f);
      const int lo = std::min(static_cast<int>(src), in_size - 1);
      const int hi = std::min(lo + 1, in_size - 1);
      t[static_cast<std::size_t>(o)] = {lo, hi, src - static_cast<float>(lo)};
    }
    return t;
  };
  const auto ty = taps(oh, h);
  const auto tx = taps(ow, w);

  Tensor out({input.channels(), oh, ow});
  for (int c = 0; c < input.channels(); ++c) {
    const auto src = input.plane(c);
    auto dst = out.plane(c);
    for (int y = 0; y < oh; ++y) {
      const Tap& a = ty[static_cast<std::size_t>(y)];
      for (int x = 0; x < ow; ++x) {
        const Tap& b = tx[static_cast<std::size_t>(x)];
        const float top = src(a.lo, b.lo) + b.frac * (src(a.lo, b.hi) - src(a.lo, b.lo));
        const float bot = src(a.hi, b.lo) + b.frac * (src(a.hi, b.hi) - src(a.hi, b.lo));
        dst(y, x) = top + a.frac * (bot - top);
      }
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b)
{
  if (a.shape() != b.shape())
    throw std::invalid_argument("add: shape mismatch " + to_string(a.shape()) + " vs " +
                                to_string(b.shape()));
  return Tensor(a.shape(), a.data() + b.data());
}

Tensor concat(std::span<const Tensor> parts)
{
  if (parts.empty())
    throw std::invalid_argument("concat: no inputs");
  int channels = 0;
  for (const Tensor& t : parts) {
    require_3d(t, "concat");
    if (t.height() != parts[0].height() || t.width() != parts[0].width())
      throw std::invalid_argument("concat: spatial mismatch " + to_string(parts[0].shape()) +
                                  " vs " + to_string(t.shape()));
    channels += t.channels();
  }
  Tensor out({channels, parts[0].height(), parts[0].width()});
  Eigen::Index offset = 0;
  for (const Tensor& t : parts) {
    out.data().segment(offset, t.size()) = t.data();
    offset += t.size();
  }
  return out;
}

Tensor concat(const Tensor& a, const Tensor& b)
{
  const Tensor parts[] = {a, b};
  return concat(parts);
}

Tensor sigmoid(const Tensor& input)
{
  return Tensor(input.shape(), (1.0f / (1.0f + (-input.data().array()).exp())).matrix());
}

} // namespace pankit
