#include "pankit/pa.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace pankit {

// Each generation: rescan the whole grid; an unlabelled text pixel is claimed
// by the earliest-ranked frontier neighbour whose kernel mean passes the
// distance test. Rank = (frontier position of the claimant, direction index
// from the claimant), which also orders the next frontier.
LabelMap aggregate_oracle(const Mask& text, const Components& kernels,
                          const SimilarityField<float>& field, float distance)
{
  const int h = static_cast<int>(text.rows()), w = static_cast<int>(text.cols());
  if (kernels.labels.rows() != h || kernels.labels.cols() != w || field.cols() != text.size())
    throw std::invalid_argument("aggregate_oracle: input sizes disagree");
  for (Eigen::Index p = 0; p < text.size(); ++p)
    if (kernels.labels(p) > 0 && !text(p))
      throw std::invalid_argument("aggregate_oracle: kernel pixel outside the text mask");

  const auto means = kernel_means(kernels, field);
  const double limit = static_cast<double>(distance) * static_cast<double>(distance);

  // Same neighbour order as the production BFS: up, left, right, down.
  const int dx[4] = {0, -1, 1, 0};
  const int dy[4] = {-1, 0, 0, 1};

  LabelMap labels = kernels.labels;
  // frontier_rank(p) = position of p within the current frontier, or -1.
  Eigen::Array<long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> frontier_rank =
      Eigen::Array<long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Constant(h, w, -1);
  long next_rank = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (labels(y, x) > 0)
        frontier_rank(y, x) = next_rank++;

  while (true) {
    struct Claim {
      long rank;
      int dir;
      int x, y, label;
    };
    std::vector<Claim> claims;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (labels(y, x) != 0 || !text(y, x))
          continue;
        Claim best{std::numeric_limits<long>::max(), 0, x, y, 0};
        for (int dir = 0; dir < 4; ++dir) {
          // Claimant q sits opposite to the direction it would step in.
          const int qx = x - dx[dir], qy = y - dy[dir];
          if (qx < 0 || qx >= w || qy < 0 || qy >= h || frontier_rank(qy, qx) < 0)
            continue;
          const int label = labels(qy, qx);
          const Eigen::Index p = static_cast<Eigen::Index>(y) * w + x;
          const double d2 =
              (field.col(p).cast<double>() - means[static_cast<std::size_t>(label - 1)]).squaredNorm();
          if (!(d2 < limit))
            continue;
          const long rank = frontier_rank(qy, qx);
          if (rank < best.rank || (rank == best.rank && dir < best.dir))
            best = {rank, dir, x, y, label};
        }
        if (best.label)
          claims.push_back(best);
      }
    }
    if (claims.empty())
      break;
    std::sort(claims.begin(), claims.end(), [](const Claim& a, const Claim& b) {
      return a.rank < b.rank || (a.rank == b.rank && a.dir < b.dir);
    });
    frontier_rank.setConstant(-1);
    long r = 0;
    for (const auto& c : claims) {
      labels(c.y, c.x) = c.label;
      frontier_rank(c.y, c.x) = r++;
    }
  }
  return labels;
}

} // namespace pankit
