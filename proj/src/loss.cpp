#include "pankit/loss.hpp"

namespace pankit {

InstanceSets instance_sets(const GroundTruth& gt)
{
  InstanceSets sets;
  const auto n = static_cast<std::size_t>(gt.count);
  sets.text.resize(n);
  sets.kernel.resize(n);
  for (Eigen::Index p = 0; p < gt.instances.size(); ++p) {
    if (gt.ignore(p))
      continue;
    if (const int i = gt.instances(p); i > 0)
      sets.text[static_cast<std::size_t>(i - 1)].push_back(p);
    if (const int k = gt.kernels(p); k > 0)
      sets.kernel[static_cast<std::size_t>(k - 1)].push_back(p);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (sets.text[i].empty() || sets.kernel[i].empty())
      throw std::invalid_argument("instance " + std::to_string(i + 1) +
                                  " has an empty text or kernel set");
  return sets;
}

template LossBreakdown<float> total_loss(const PredictionMaps<float>&, const GroundTruth&,
                                         const LossConfig&, const Mask*);
template LossBreakdown<double> total_loss(const PredictionMaps<double>&, const GroundTruth&,
                                          const LossConfig&, const Mask*);

} // namespace pankit
