// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "linwalk/config.hpp"

using namespace linwalk;

TEST_CASE("key-value parsing with comments and overrides")
{
    const KeyValueConfig cfg = KeyValueConfig::from_string(
        "# a comment\n"
        "alpha = 1.5\n"
        "name = demo # trailing comment\n"
        "count = 42\n"
        "vec = 1 2 3\n"
        "mat = 1 0; 0 2\n");
    CHECK(cfg.get_double("alpha") == 1.5);
    CHECK(cfg.get_string("name") == "demo");
    CHECK(cfg.get_int("count") == 42);
    CHECK(cfg.get_vector("vec") == std::vector<double>{1.0, 2.0, 3.0});
    const Matrix m = cfg.get_matrix("mat");
    CHECK(m(1, 1) == 2.0);
    CHECK(cfg.get_double_or("missing", 7.0) == 7.0);
}

TEST_CASE("parse errors carry location and field names")
{
    CHECK_THROWS_WITH_AS(KeyValueConfig::from_string("novalue\n", "cfg"),
                         doctest::Contains("cfg:1"), Error);
    const KeyValueConfig cfg = KeyValueConfig::from_string("x = abc\n");
    CHECK_THROWS_WITH_AS(cfg.get_double("x"), doctest::Contains("bad number"), Error);
    CHECK_THROWS_WITH_AS(cfg.get_double("y"), doctest::Contains("missing field"), Error);
}

TEST_CASE("ensemble specs round-trip through the config format")
{
    const KeyValueConfig cfg = KeyValueConfig::from_string(
        "ensemble.dim = 2\n"
        "ensemble.kind = discrete\n"
        "ensemble.weights = 0.5 0.5\n"
        "ensemble.atom.0 = 2 1; 1 1\n"
        "ensemble.atom.1 = 1 0; 1 1\n");
    const EnsembleSpec spec = parse_ensemble_spec(cfg);
    CHECK(spec.dim == 2);
    CHECK(spec.kind == EnsembleKind::Discrete);
    CHECK(spec.atoms.size() == 2);
    const Ensemble e = Ensemble::build(spec);
    CHECK(e.atoms().size() == 2);

    const KeyValueConfig rot = KeyValueConfig::from_string(
        "ensemble.dim = 3\n"
        "ensemble.kind = rotation-diagonal\n"
        "ensemble.gains = 0.5 0 -0.5\n");
    CHECK(parse_ensemble_spec(rot).gains.size() == 3);

    const KeyValueConfig bad = KeyValueConfig::from_string(
        "ensemble.dim = 2\n"
        "ensemble.kind = mystery\n");
    CHECK_THROWS_AS(parse_ensemble_spec(bad), Error);
}

TEST_CASE("test functions parse with every phi kind")
{
    const KeyValueConfig cfg = KeyValueConfig::from_string(
        "h.phi = overlap\n"
        "h.phi.u = 1 0\n"
        "h.psi.knots = 0 1 2\n"
        "h.psi.values = 0 1 0\n");
    const TestFunction h = parse_test_function(cfg);
    CHECK(h.phi.kind() == PhiFunction::Kind::Overlap);
    CHECK(h.psi(1.0) == doctest::Approx(1.0));

    const KeyValueConfig plain = KeyValueConfig::from_string(
        "h.psi.knots = -1 0 1\n"
        "h.psi.values = 0 2 0\n");
    CHECK(parse_test_function(plain).phi.kind() == PhiFunction::Kind::One);
}

TEST_CASE("set() lets flags override file values")
{
    KeyValueConfig cfg = KeyValueConfig::from_string("seed = 1\n");
    cfg.set("seed", "99");
    CHECK(cfg.get_int("seed") == 99);
}
