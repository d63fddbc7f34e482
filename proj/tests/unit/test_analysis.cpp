#include <doctest.h>

#include <cmath>

#include "flexonc/analysis.hpp"
#include "flexonc/types.hpp"

using namespace flexonc;

TEST_CASE("closed forms at the reference point")
{
  const DeliveryParams d{.p = 0.9, .N = 2, .H = 3, .m = 2};
  CHECK(p_forward_native(d) == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(p_deliver_native(d) == doctest::Approx(0.88209).epsilon(1e-12));
  CHECK(p_deliver_coded_bend(d) == doctest::Approx(0.649539).epsilon(1e-12));
  CHECK(p_deliver_coded_flexonc(d) == doctest::Approx(0.77295141).epsilon(1e-12));
  CHECK(p_deliver_coded_flexonc(d) - p_deliver_coded_bend(d) ==
        doctest::Approx(0.12341241).epsilon(1e-9));
  CHECK(closed_form(d, DeliveryModel::flexonc_coded) == p_deliver_coded_flexonc(d));
}

TEST_CASE("closed-form boundaries")
{
  CHECK(p_forward_native({.p = 1.0, .N = 3, .H = 2, .m = 1}) == 1.0);
  CHECK(p_forward_native({.p = 0.7, .N = 1, .H = 2, .m = 1}) == doctest::Approx(0.7));
  CHECK(p_deliver_native({.p = 0.8, .N = 1, .H = 4, .m = 1}) == doctest::Approx(std::pow(0.8, 4)));
  for (unsigned m = 1; m <= 3; ++m)
  {
    for (unsigned H = 2; H <= 5; ++H)
    {
      CHECK(p_deliver_coded_bend({.p = 1.0, .N = 2, .H = H, .m = m}) == 1.0);
      CHECK(p_deliver_coded_flexonc({.p = 1.0, .N = 2, .H = H, .m = m}) == 1.0);
      for (double p : {0.5, 0.63, 0.77, 0.91})
      {
        const DeliveryParams d{.p = p, .N = 1, .H = H, .m = m};
        CHECK(p_deliver_coded_flexonc(d) == p_deliver_coded_bend(d));
      }
    }
  }
}

TEST_CASE("closed forms are monotone in p and N")
{
  for (unsigned H = 2; H <= 5; ++H)
  {
    for (unsigned m = 1; m <= 3; ++m)
    {
      for (unsigned N = 1; N <= 3; ++N)
      {
        double prev = -1.0;
        for (int i = 1; i <= 100; ++i)
        {
          const DeliveryParams d{.p = i / 100.0, .N = N, .H = H, .m = m};
          const auto v = p_deliver_coded_flexonc(d);
          CHECK(v >= prev);
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
          prev = v;
          const DeliveryParams more{.p = d.p, .N = N + 1, .H = H, .m = m};
          CHECK(p_deliver_coded_flexonc(more) >= v);
          CHECK(p_deliver_native(more) >= p_deliver_native(d));
        }
      }
    }
  }
}

TEST_CASE("parameter validation")
{
  CHECK_THROWS_AS(DeliveryParams({.p = 1.5}).validate(), ConfigError);
  CHECK_THROWS_AS(DeliveryParams({.p = 0.5, .N = 0}).validate(), ConfigError);
  GridSpec g;
  CHECK(g.points().size() == 5 * 3 * 3 * 3);
  g.H = {1};
  CHECK_THROWS_AS(g.validate(), ConfigError);
  CHECK_THROWS_AS(monte_carlo_delivery({.p = 0.5, .N = 1, .H = 2, .m = 1},
                                       DeliveryModel::native, 0, 1),
                  ConfigError);
}

TEST_CASE("Monte-Carlo estimates")
{
  const DeliveryParams sure{.p = 1.0, .N = 2, .H = 3, .m = 2};
  for (auto model : {DeliveryModel::native, DeliveryModel::bend_coded, DeliveryModel::flexonc_coded})
  {
    const auto e = monte_carlo_delivery(sure, model, 1000, 5);
    CHECK(e.mean == 1.0);
    CHECK(e.stderr_ == 0.0);
    CHECK(e.trials == 1000);
  }

  const DeliveryParams d{.p = 0.9, .N = 2, .H = 3, .m = 2};
  const auto a = monte_carlo_delivery(d, DeliveryModel::flexonc_coded, 20000, 11);
  const auto b = monte_carlo_delivery(d, DeliveryModel::flexonc_coded, 20000, 11);
  CHECK(a.mean == b.mean);
  const auto sigma = std::sqrt(0.77295141 * (1 - 0.77295141) / 20000);
  CHECK(std::abs(a.mean - 0.77295141) < 4 * sigma);
}

TEST_CASE("inequality holds on the default grid")
{
  const auto report = verify_inequality(GridSpec{}.points());
  CHECK(report.ok());
  CHECK(report.strict_checked > 0);
  CHECK(report.equal_checked > 0);
  CHECK(report.gap_checked > 0);
}

TEST_CASE("cross validation rows are reproducible and independent of thread count")
{
  GridSpec g;
  g.p = {0.8};
  g.N = {2};
  g.H = {3};
  g.m = {1, 2};
  const auto one = cross_validate(g.points(), 5000, 3, 1);
  const auto two = cross_validate(g.points(), 5000, 3, 2);
  REQUIRE(one.size() == 6);
  REQUIRE(two.size() == one.size());
  for (std::size_t i = 0; i < one.size(); ++i)
  {
    CHECK(one[i].estimate.mean == two[i].estimate.mean);
    CHECK(one[i].z < 5.0);
  }
  // Native rows ignore m and share one experiment.
  CHECK(one[0].estimate.mean == one[3].estimate.mean);
}
