#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "ppctl/config.hpp"
#include "ppctl/errors.hpp"
#include "ppctl/run.hpp"

using namespace ppctl;

TEST_CASE("config: empty text yields the documented defaults") {
  const auto cfg = parse_config_text("");
  CHECK(cfg.model.r == 1.5);
  CHECK(cfg.model.gamma == 12.0);
  CHECK(cfg.model.omega == 15.0);
  CHECK(cfg.model.e == 0.4);
  CHECK(cfg.model.m1 == 0.15);
  CHECK(cfg.model.m2 == 0.01);
  CHECK(cfg.noise.sigma1 == 0.02);
  CHECK(cfg.noise.lambda == 1.0);
  CHECK(cfg.noise.jump1 == 1.0);
  CHECK(cfg.sim.dt == 1e-3);
  CHECK(cfg.sim.horizon == 50.0);
  CHECK(cfg.seed == 42);
  CHECK(cfg.paths == 10000);
  CHECK(cfg.alpha_bounds.hi == 10.0);
  CHECK(cfg.target_epsilon == 0.5);
}

TEST_CASE("config: constraint violations name the key") {
  try {
    parse_config_text("[model]\ngamma = -1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("gamma") != std::string::npos);
  }
}

TEST_CASE("config: unknown keys and malformed lines carry line numbers") {
  try {
    parse_config_text("[model]\nr = 1.5\nnot_a_key = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("line 3") != std::string::npos);
    CHECK(what.find("not_a_key") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("[model]\njust words\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[model\nr = 1\n"), ConfigError);
}

TEST_CASE("config: reference scenario values parse exactly") {
  const std::string text =
      "[model]\n"
      "r = 1.5\n"
      "gamma = 12\n"
      "omega = 15\n"
      "e = 0.4\n"
      "m1 = 0.15\n"
      "m2 = 0.01\n"
      "[noise]\n"
      "sigma1 = 0.02\n"
      "sigma2 = 0.02\n"
      "jump1 = 1\n"
      "jump2 = 1\n";
  const auto cfg = parse_config_text(text);
  CHECK(cfg.model.r == 1.5);
  CHECK(cfg.model.gamma == 12.0);
  CHECK(cfg.model.omega == 15.0);
  CHECK(cfg.model.e == 0.4);
  CHECK(cfg.model.m1 == 0.15);
  CHECK(cfg.model.m2 == 0.01);
  CHECK(cfg.noise.sigma1 == 0.02);
  CHECK(cfg.noise.sigma2 == 0.02);
  CHECK(cfg.noise.jump1 == 1.0);
  CHECK(cfg.noise.jump2 == 1.0);
}

TEST_CASE("config: gamma accepts the inf sentinel") {
  const auto cfg = parse_config_text("[model]\ngamma = inf\n");
  CHECK(std::isinf(cfg.model.gamma));
  // And it survives the render/parse round trip.
  const auto again = parse_config_text(render_config(cfg));
  CHECK(std::isinf(again.model.gamma));
}

TEST_CASE("config: render/parse round trip reproduces every field") {
  RunConfig cfg;
  cfg.model.gamma = 9.25;
  cfg.model.alpha = 0.75;
  cfg.noise.lambda = 0.125;
  cfg.sim.dt = 0.0625;
  cfg.sim.horizon = 17.5;
  cfg.sim.record_noise = false;
  cfg.sweep.max_iters = 33;
  cfg.sweep.relaxation = 0.375;
  cfg.sweep.q_mode = QMode::kRegression;
  cfg.alpha_bounds = {0.5, 7.5};
  cfg.xi_bounds = {0.25, 5.0};
  cfg.target_x = 11.5;
  cfg.target_y = 5.25;
  cfg.target_epsilon = 0.375;
  cfg.x0 = 1.75;
  cfg.y0 = 6.5;
  cfg.seed = 987654321;
  cfg.paths = 123;
  cfg.sweep_paths = 45;
  cfg.threads = 3;

  const auto text = render_config(cfg);
  const auto back = parse_config_text(text);
  CHECK(render_config(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(back.model.gamma == cfg.model.gamma);
  CHECK(back.sweep.q_mode == cfg.sweep.q_mode);
  CHECK(back.sim.record_noise == cfg.sim.record_noise);
  CHECK(back.target_x == cfg.target_x);
  CHECK(back.seed == cfg.seed);
  CHECK(back.threads == cfg.threads);
}

TEST_CASE("config: file parsing and missing files") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "ppctl_cfg_test";
  fs::create_directories(dir);
  const auto file = dir / "run.cfg";
  {
    std::ofstream os(file);
    os << "[run]\nseed = 7\npaths = 11\n";
  }
  const auto cfg = parse_config(file);
  CHECK(cfg.seed == 7);
  CHECK(cfg.paths == 11);
  CHECK_THROWS_AS(parse_config(dir / "absent.cfg"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("config: target resolution picks the largest-prey coexistence state") {
  RunConfig cfg;  // defaults: alpha = xi = 1
  const auto target = cfg.resolve_target();
  CHECK(target.target.x == doctest::Approx(11.99).epsilon(1e-3));
  CHECK(target.target.y == doctest::Approx(5.055).epsilon(1e-2));
  CHECK(target.epsilon == 0.5);

  cfg.target_x = 3.0;
  cfg.target_y = 4.0;
  cfg.target_epsilon = 0.25;
  const auto explicit_target = cfg.resolve_target();
  CHECK(explicit_target.target.x == 3.0);
  CHECK(explicit_target.target.y == 4.0);
  CHECK(explicit_target.epsilon == 0.25);
}

TEST_CASE("scenario presets: structure and overridability") {
  const auto cons = scenario_preset("conservation");
  CHECK(cons.model.alpha == 0.5);
  CHECK(cons.model.xi == 1.0);
  CHECK_FALSE(cons.has_explicit_target());
  const auto pest = scenario_preset("pest");
  CHECK(pest.model.alpha == 0.0);
  CHECK(pest.model.xi == 10.0);
  CHECK(pest.has_explicit_target());
  CHECK(pest.target_y > 100.0);
  CHECK_THROWS_AS(scenario_preset("nonsense"), ConfigError);

  // Preset values remain overridable through the config layer.
  const auto overridden = parse_config_text("[target]\nepsilon = 3\n", pest);
  CHECK(overridden.target_epsilon == 3.0);
  CHECK(overridden.model.xi == 10.0);
}
