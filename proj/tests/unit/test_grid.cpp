#include <catch_amalgamated.hpp>

#include "tfrlab/grid.hpp"

using namespace tfrlab;
using Catch::Matchers::WithinRel;

TEST_CASE("linear grid spans the requested range", "[grid]") {
  const auto g = FrequencyGrid::linear_hz(Hz{0.5}, Hz{2.5}, Hz{0.01});
  CHECK(g.size() == 201);
  CHECK(g.scale() == GridScale::Linear);
  CHECK_THAT(g.omega(200), WithinRel(Hz{2.5}.rad(), 1e-12));
  CHECK(g.bin_of(g.omega(37)) == 37);
  CHECK(g.bin_of(Hz{0.1}.rad()) == -1);
  CHECK(g.bin_of(std::nan("")) == -1);
}

TEST_CASE("logarithmic grid has n_v bins per octave", "[grid]") {
  const auto g = FrequencyGrid::logarithmic_hz(Hz{1.0}, Hz{8.0}, 16);
  CHECK(g.size() == 49);
  CHECK_THAT(g.omega(16), WithinRel(Hz{2.0}.rad(), 1e-12));
  CHECK_THAT(g.step(), WithinRel(std::log(2.0) / 16, 1e-15));
  CHECK(g.bin_of(g.omega(20) * 1.001) == 20);
  CHECK(g.bin_of(-1.0) == -1);
}

TEST_CASE("bin weights integrate the measure", "[grid]") {
  const auto lin = FrequencyGrid::linear(1.0, 3.0, 0.01);
  double total = 0.0;
  for (double w : lin.weights()) total += w;
  CHECK_THAT(total, WithinRel(2.0, 1e-9));
  const auto lg = FrequencyGrid::logarithmic(1.0, 4.0, 32);
  total = 0.0;
  for (double w : lg.weights()) total += w;
  CHECK_THAT(total, WithinRel(std::log(4.0), 1e-9));
}

TEST_CASE("malformed grids are rejected", "[grid]") {
  CHECK_THROWS_AS(FrequencyGrid::linear(2.0, 1.0, 0.1), ConfigError);
  CHECK_THROWS_AS(FrequencyGrid::linear(1.0, 2.0, 0.0), ConfigError);
  CHECK_THROWS_AS(FrequencyGrid::logarithmic(0.0, 2.0, 8), ConfigError);
  CHECK_THROWS_AS(FrequencyGrid::logarithmic(1.0, 2.0, 0), ConfigError);
}
