#include "fixtures.hpp"

#include "pankit/loss.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pankit;
using namespace pankit::testing;

namespace {

SimilarityField<double> field(int n) { return SimilarityField<double>::Zero(kSimilarityDim, n); }

} // namespace

TEST_CASE("aggregation loss of one pixel one unit beyond the margin is ln 2")
{
  auto f = field(2);
  f(0, 1) = 1.5; // kernel at origin, pixel at distance delta + 1
  InstanceSets sets;
  sets.kernel = {{0}};
  sets.text = {{1}};
  CHECK(loss_agg<double>(f, sets, 0.5).value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("aggregation loss is zero inside the margin")
{
  auto f = field(3);
  f(1, 1) = 0.3;
  f(2, 2) = -0.49;
  InstanceSets sets;
  sets.kernel = {{0}};
  sets.text = {{0, 1, 2}};
  const auto l = loss_agg<double>(f, sets, 0.5);
  CHECK(l.value == 0.0);
  CHECK(l.grad.isZero());
}

TEST_CASE("discrimination loss of identical kernel means is ln 10")
{
  const auto f = field(4);
  InstanceSets sets;
  sets.kernel = {{0, 1}, {2, 3}};
  sets.text = {{0, 1}, {2, 3}};
  CHECK(loss_dis<double>(f, sets, 3.0).value == doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("discrimination loss vanishes for far-apart kernels and single instances")
{
  auto f = field(2);
  f(2, 1) = 3.01;
  InstanceSets sets;
  sets.kernel = {{0}, {1}};
  sets.text = {{0}, {1}};
  CHECK(loss_dis<double>(f, sets, 3.0).value == 0.0);
  InstanceSets one;
  one.kernel = {{0}};
  one.text = {{0}};
  CHECK(loss_dis<double>(f, one, 3.0).value == 0.0);
}

TEST_CASE("dice of half-overlapping binary maps is 0.5")
{
  Plane<double> pred = Plane<double>::Zero(1, 4);
  Mask target = Mask::Constant(1, 4, false), all = Mask::Constant(1, 4, true);
  pred(0, 0) = pred(0, 1) = 1.0;
  target(0, 1) = target(0, 2) = true;
  CHECK(dice_loss<double>(pred, target, all).value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("dice edge cases")
{
  Plane<double> pred = Plane<double>::Zero(2, 2);
  const Mask none = Mask::Constant(2, 2, false), all = Mask::Constant(2, 2, true);
  CHECK(dice_loss<double>(pred, none, all).value == 0.0); // zero denominator
  CHECK(dice_loss<double>(pred, all, none).value == 0.0); // empty support
  pred.setOnes();
  CHECK(dice_loss<double>(pred, all, all).value == doctest::Approx(0.0));
  CHECK(dice_loss<double>(pred, none, all).value == doctest::Approx(1.0));
  CHECK_THROWS_AS(dice_loss<double>(Plane<double>::Zero(2, 3), all, all), std::invalid_argument);
}

TEST_CASE("OHEM keeps positives plus the hardest negatives at 3:1")
{
  // 10 positives, 50 negatives with distinct scores
  Plane<float> score(1, 60);
  Mask target = Mask::Constant(1, 60, false), ignore = Mask::Constant(1, 60, false);
  for (int i = 0; i < 60; ++i)
    score(0, i) = static_cast<float>(i) / 60.0f;
  for (int i = 0; i < 10; ++i)
    target(0, 5 * i) = true;
  const Mask m = ohem_mask<float>(score, target, ignore, 3);
  CHECK(m.count() == 40);
  CHECK((m && target).count() == 10);
  // the 30 selected negatives are the 30 highest-scoring ones
  int lowest_selected = 60;
  for (int i = 0; i < 60; ++i)
    if (m(0, i) && !target(0, i))
      lowest_selected = std::min(lowest_selected, i);
  int above = 0;
  for (int i = lowest_selected; i < 60; ++i)
    above += !target(0, i);
  CHECK(above == 30);
}

TEST_CASE("OHEM ties resolve in raster order; ignore pixels never selected")
{
  Plane<float> score = Plane<float>::Constant(1, 10, 0.5f);
  Mask target = Mask::Constant(1, 10, false), ignore = Mask::Constant(1, 10, false);
  target(0, 9) = true;
  ignore(0, 0) = true;
  const Mask m = ohem_mask<float>(score, target, ignore, 2);
  CHECK(m.count() == 3);
  CHECK(m(0, 1));
  CHECK(m(0, 2));
  CHECK_FALSE(m(0, 0));
  Mask no_pos = Mask::Constant(1, 10, false);
  CHECK(ohem_mask<float>(score, no_pos, ignore, 3).count() == 9);
}

TEST_CASE("analytic gradients match central differences")
{
  const LossConfig cfg;
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 5; ++seed) {
    const GradFixture f = make_grad_fixture(seed);
    if (near_hinge(f, cfg))
      continue;
    const GradCheck g = check_gradients(f, cfg);
    CAPTURE(seed);
    CHECK(g.agg < 1e-4);
    CHECK(g.dis < 1e-4);
    CHECK(g.tex < 1e-4);
    CHECK(g.ker < 1e-4);
    CHECK(g.total < 1e-4);
    ++checked;
  }
}

TEST_CASE("gradients vanish off their support")
{
  const LossConfig cfg;
  const GradFixture f = make_grad_fixture(3);
  const auto b = total_loss<double>(f.maps, f.gt, cfg);
  const Mask text = f.gt.text_mask();
  for (Eigen::Index p = 0; p < text.size(); ++p) {
    if (!text(p) || f.gt.ignore(p)) {
      CHECK(b.d_kernel(p) == 0.0);
      CHECK(b.d_similarity.col(p).isZero());
    }
    if (f.gt.ignore(p))
      CHECK(b.d_text(p) == 0.0);
  }
}

TEST_CASE("total is the weighted sum of its terms")
{
  LossConfig cfg;
  cfg.alpha = 0.7;
  cfg.beta = 0.1;
  const GradFixture f = make_grad_fixture(4);
  const auto b = total_loss<double>(f.maps, f.gt, cfg);
  CHECK(b.total == doctest::Approx(b.l_tex + 0.7 * b.l_ker + 0.1 * (b.l_agg + b.l_dis)));
  CHECK(b.l_tex >= 0.0);
  CHECK(b.l_ker >= 0.0);
  CHECK(b.l_agg >= 0.0);
  CHECK(b.l_dis >= 0.0);
}

TEST_CASE("embedding losses are invariant to rotations and translations of F")
{
  const LossConfig cfg;
  const GradFixture f = make_grad_fixture(5);
  const InstanceSets sets = instance_sets(f.gt);
  Eigen::Matrix4d q = Eigen::Matrix4d::Identity();
  const double a = 0.7;
  q.topLeftCorner<2, 2>() << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  q.bottomRightCorner<2, 2>() << std::cos(2 * a), std::sin(2 * a), -std::sin(2 * a), std::cos(2 * a);
  SimilarityField<double> moved = q * f.maps.similarity;
  moved.colwise() += Eigen::Vector4d(1.0, -2.0, 0.5, 3.0);
  CHECK(loss_agg<double>(moved, sets, cfg.delta_agg).value ==
        doctest::Approx(loss_agg<double>(f.maps.similarity, sets, cfg.delta_agg).value).epsilon(1e-10));
  CHECK(loss_dis<double>(moved, sets, cfg.delta_dis).value ==
        doctest::Approx(loss_dis<double>(f.maps.similarity, sets, cfg.delta_dis).value).epsilon(1e-10));
}

TEST_CASE("float and double evaluations agree")
{
  const LossConfig cfg;
  const GradFixture f = make_grad_fixture(6);
  const auto d = total_loss<double>(f.maps, f.gt, cfg);
  const auto s = total_loss<float>(f.maps.cast<float>(), f.gt, cfg);
  CHECK(s.total == doctest::Approx(d.total).epsilon(1e-4));
}

TEST_CASE("instance sets drop ignored pixels and reject empty kernels")
{
  GradFixture f = make_grad_fixture(7);
  f.gt.ignore(1, 5) = true;
  const InstanceSets sets = instance_sets(f.gt);
  for (const auto& t : sets.text)
    for (Eigen::Index p : t)
      CHECK_FALSE(f.gt.ignore(p));
  f.gt.kernels = (f.gt.kernels == 2).select(LabelMap::Zero(16, 16), f.gt.kernels);
  CHECK_THROWS_AS(instance_sets(f.gt), std::invalid_argument);
}

TEST_CASE("config validation")
{
  LossConfig c;
  c.beta = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.ohem_ratio = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
