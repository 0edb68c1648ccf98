#include "aerobat/errors.hpp"
#include "aerobat/sweep.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace aerobat;
using namespace aerobat::sweep;

namespace {

config::RunConfig short_base(double duration = 0.3) {
  config::RunConfig cfg;
  cfg.scenario.sim.duration = duration;
  return cfg;
}

std::string csv(const SweepResult& r) {
  std::ostringstream out;
  write_sweep_csv(r, out);
  return out.str();
}

}  // namespace

TEST_CASE("parse_axis: dotted paths, pointers and linked paths") {
  const GridAxis a = parse_axis("gait.flap_frequency_hz=4, 4.75 ,5");
  CHECK(a.pointers == std::vector<std::string>{"/gait/flap_frequency_hz"});
  CHECK(a.values == std::vector<std::string>{"4", "4.75", "5"});

  const GridAxis b = parse_axis("/thrusters/v1/magnitude_n|thrusters.v2.magnitude_n=0,0.5");
  CHECK(b.pointers ==
        std::vector<std::string>{"/thrusters/v1/magnitude_n", "/thrusters/v2/magnitude_n"});
  CHECK(b.values.size() == 2);

  const GridAxis c = parse_axis(R"(sim.initial_euler_deg=[0,15,0],[0,20,0])");
  CHECK(c.values == std::vector<std::string>{"[0,15,0]", "[0,20,0]"});

  const GridAxis d = parse_axis(R"(aero.speed_model="global","per_element")");
  CHECK(d.values == std::vector<std::string>{"\"global\"", "\"per_element\""});
}

TEST_CASE("parse_axis: malformed specs") {
  CHECK_THROWS_AS(parse_axis("gait.flap_frequency_hz"), std::invalid_argument);
  CHECK_THROWS_AS(parse_axis("=1,2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_axis("gait.flap_frequency_hz=1,,2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_axis("gait.flap_frequency_hz=abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_axis("sim.initial_euler_deg=[0,1"), std::invalid_argument);
}

TEST_CASE("grid order: last axis fastest") {
  const std::vector<GridAxis> axes{parse_axis("a=1,2"), parse_axis("b=10,20,30")};
  CHECK(grid_size(axes) == 6);
  CHECK(grid_values(axes, 0) == std::vector<std::string>{"1", "10"});
  CHECK(grid_values(axes, 2) == std::vector<std::string>{"1", "30"});
  CHECK(grid_values(axes, 3) == std::vector<std::string>{"2", "10"});
  CHECK(grid_values(axes, 5) == std::vector<std::string>{"2", "30"});
  CHECK(grid_size({}) == 1);
}

TEST_CASE("apply_point overrides the addressed entries") {
  const std::vector<GridAxis> axes{parse_axis("gait.flap_frequency_hz=4,5"),
                                   parse_axis("thrusters.v1.magnitude_n|thrusters.v2.magnitude_n=0.3")};
  const config::RunConfig cfg = apply_point(short_base(), axes, 1);
  CHECK(cfg.scenario.gait.flap_frequency == 5.0);
  CHECK(cfg.scenario.thrusters.thrusters[0].magnitude == 0.3);
  CHECK(cfg.scenario.thrusters.thrusters[1].magnitude == 0.3);
  CHECK(cfg.scenario.thrusters.thrusters[2].magnitude ==
        short_base().scenario.thrusters.thrusters[2].magnitude);
  CHECK_THROWS_AS(apply_point(short_base(), {parse_axis("gait.nope=1")}, 0), ConfigError);
}

TEST_CASE("single-point grid gives one row") {
  const auto r = run_sweep(short_base(), {parse_axis("gait.flap_frequency_hz=4.75")},
                           {.workers = 1, .metrics_window = 0.2});
  REQUIRE(r.rows.size() == 1);
  CHECK_FALSE(r.rows[0].failed);
  CHECK(r.rows[0].end_time == doctest::Approx(0.3));
  CHECK(std::isfinite(r.rows[0].pitch.mean));
  CHECK(r.rows[0].max_constraint_residual < 1e-9);
}

TEST_CASE("zero thrust never settles") {
  const auto axis = parse_axis(
      "thrusters.v1.magnitude_n|thrusters.v2.magnitude_n|thrusters.v3.magnitude_n|"
      "thrusters.v4.magnitude_n=0");
  const auto r = run_sweep(short_base(3.0), {axis}, {.workers = 1});
  REQUIRE(r.rows.size() == 1);
  CHECK((r.rows[0].failed || !r.rows[0].settling_time.has_value()));
}

TEST_CASE("worker count does not change results") {
  const std::vector<GridAxis> axes{parse_axis("gait.flap_frequency_hz=4,4.75,5.5"),
                                   parse_axis("controller.pitch_ref_deg=15,20")};
  const SweepOptions one{.workers = 1, .metrics_window = 0.2};
  SweepOptions three = one;
  three.workers = 3;
  const auto a = run_sweep(short_base(), axes, one);
  const auto b = run_sweep(short_base(), axes, three);
  REQUIRE(a.rows.size() == 6);
  CHECK(csv(a) == csv(b));
}

TEST_CASE("invalid or unknown overrides become failure rows") {
  const std::vector<GridAxis> axes{parse_axis("sim.dt_s=0.001,-1")};
  const auto r = run_sweep(short_base(0.05), axes, {.workers = 2, .metrics_window = 0.2});
  REQUIRE(r.rows.size() == 2);
  CHECK_FALSE(r.rows[0].failed);
  CHECK(r.rows[1].failed);
  CHECK_FALSE(r.rows[1].failure.empty());
  CHECK(std::isnan(r.rows[1].pitch.mean));

  const auto u = run_sweep(short_base(0.05), {parse_axis("sim.no_such_key=1")}, {.workers = 1});
  REQUIRE(u.rows.size() == 1);
  CHECK(u.rows[0].failed);
  CHECK(u.rows[0].failure.find("no_such_key") != std::string::npos);
}

TEST_CASE("sweep CSV layout") {
  const auto r = run_sweep(short_base(0.05), {parse_axis("gait.flap_frequency_hz=4,5")},
                           {.workers = 1, .metrics_window = 0.2});
  std::istringstream in(csv(r));
  std::string header, row;
  std::getline(in, header);
  CHECK(header.rfind("index,/gait/flap_frequency_hz,failed,failure,end_time_s", 0) == 0);
  int rows = 0;
  while (std::getline(in, row)) {
    CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
    ++rows;
  }
  CHECK(rows == 2);
}
