#include "pankit/maps.hpp"

namespace pankit {

PredictionMaps<float> maps_from_tensor(const Tensor& t)
{
  if (t.ndim() != 3 || t.channels() != 2 + kSimilarityDim)
    throw std::invalid_argument("prediction maps tensor must be 6 x h x w, got " + to_string(t.shape()));
  PredictionMaps<float> maps(t.height(), t.width());
  maps.text = t.plane(0).array();
  maps.kernel = t.plane(1).array();
  maps.similarity = t.channel_matrix().bottomRows(kSimilarityDim);
  return maps;
}

Tensor maps_to_tensor(const PredictionMaps<float>& maps)
{
  maps.check();
  Tensor t({2 + kSimilarityDim, maps.height(), maps.width()});
  t.plane(0) = maps.text.matrix();
  t.plane(1) = maps.kernel.matrix();
  t.channel_matrix().bottomRows(kSimilarityDim) = maps.similarity;
  return t;
}

} // namespace pankit
