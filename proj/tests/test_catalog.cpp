#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "fg/catalog.hpp"
#include "fg/rng.hpp"
#include "fg/sim.hpp"

using namespace fg;

TEST_CASE("catalog of 30 is valid and spans both strata") {
  Rng rng(7);
  auto cat = sample_object_catalog(30, rng);
  REQUIRE(cat.size() == 30);

  int delicate = 0;
  for (const auto& s : cat) {
    CHECK_NOTHROW(validate_spec(s));
    CHECK(s.mass_kg >= 0.001);
    CHECK(s.mass_kg <= 0.5);
    CHECK(s.rest_width_mm >= 5.0);
    CHECK(s.rest_width_mm <= 65.0);
    if (is_delicate(s)) ++delicate;
  }
  CHECK(delicate >= 10);
  CHECK(delicate <= 25);  // robust stratum must exist too

  std::set<std::string> names;
  for (const auto& s : cat) names.insert(s.name);
  CHECK(names.size() == 30);  // no duplicate objects
}

TEST_CASE("catalog is deterministic under the seed") {
  Rng a(42), b(42), c(43);
  auto cat_a = sample_object_catalog(12, a);
  auto cat_b = sample_object_catalog(12, b);
  auto cat_c = sample_object_catalog(12, c);

  REQUIRE(cat_a.size() == cat_b.size());
  for (size_t i = 0; i < cat_a.size(); ++i) {
    CHECK(cat_a[i].name == cat_b[i].name);
    CHECK(cat_a[i].mass_kg == cat_b[i].mass_kg);
    CHECK(cat_a[i].stiffness_n_per_mm == cat_b[i].stiffness_n_per_mm);
    CHECK(cat_a[i].crush_force_n == cat_b[i].crush_force_n);
  }
  bool all_same = true;
  for (size_t i = 0; i < cat_a.size(); ++i)
    all_same = all_same && cat_a[i].mass_kg == cat_c[i].mass_kg;
  CHECK_FALSE(all_same);
}

TEST_CASE("single-object catalog stays in the mass clamp") {
  for (uint64_t seed : {1u, 2u, 3u, 99u}) {
    Rng rng(seed);
    auto cat = sample_object_catalog(1, rng);
    REQUIRE(cat.size() == 1);
    CHECK(cat[0].mass_kg >= 0.001);
    CHECK(cat[0].mass_kg <= 0.5);
  }
}

TEST_CASE("empty catalog request is rejected") {
  Rng rng(1);
  CHECK_THROWS_WITH_AS(sample_object_catalog(0, rng), "catalog size must be >= 1",
                       ValidationError);
}

TEST_CASE("eval catalog is 4 seen + 6 unseen") {
  auto cat = eval_catalog();
  REQUIRE(cat.size() == 10);
  int seen = 0;
  for (const auto& s : cat) {
    CHECK_NOTHROW(validate_spec(s));
    if (s.seen) ++seen;
  }
  CHECK(seen == 4);
}

TEST_CASE("seen eval objects appear verbatim in every training catalog") {
  auto eval = eval_catalog();
  Rng rng(1234);
  auto train = sample_object_catalog(30, rng);

  for (const auto& ev : eval) {
    if (!ev.seen) continue;
    auto it = std::find_if(train.begin(), train.end(),
                           [&](const ObjectSpec& t) { return t.name == ev.name; });
    REQUIRE(it != train.end());
    CHECK(it->mass_kg == ev.mass_kg);
    CHECK(it->friction_mu == ev.friction_mu);
    CHECK(it->stiffness_n_per_mm == ev.stiffness_n_per_mm);
    CHECK(it->crush_force_n == ev.crush_force_n);
    CHECK(it->rest_width_mm == ev.rest_width_mm);
    CHECK(it->seen);
  }
}

TEST_CASE("delicate stratum is the sub-3N crush band") {
  ObjectSpec s;
  s.crush_force_n = 2.99;
  CHECK(is_delicate(s));
  s.crush_force_n = 3.0;
  CHECK_FALSE(is_delicate(s));
}

TEST_CASE("eval catalog has delicate objects on both sides of the seen split") {
  auto cat = eval_catalog();
  int seen_delicate = 0, unseen_delicate = 0;
  for (const auto& s : cat) {
    if (!is_delicate(s)) continue;
    (s.seen ? seen_delicate : unseen_delicate)++;
  }
  CHECK(seen_delicate >= 1);
  CHECK(unseen_delicate >= 1);
}

TEST_CASE("object spec JSON round-trips every field") {
  Rng rng(5);
  auto cat = sample_object_catalog(8, rng);
  for (const auto& s : cat) {
    auto j = object_spec_to_json(s);
    auto back = object_spec_from_json(j);
    CHECK(back.name == s.name);
    CHECK(back.rest_width_mm == s.rest_width_mm);
    CHECK(back.mass_kg == s.mass_kg);
    CHECK(back.friction_mu == s.friction_mu);
    CHECK(back.stiffness_n_per_mm == s.stiffness_n_per_mm);
    CHECK(back.crush_force_n == s.crush_force_n);
    CHECK(back.yield_force_n == s.yield_force_n);
    CHECK(back.plasticity == s.plasticity);
    CHECK(back.seen == s.seen);
  }
}

TEST_CASE("catalog masses cover the broad range across many draws") {
  // log-uniform sampling across strata should reach both decade ends
  Rng rng(2024);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10; ++i) {
    auto cat = sample_object_catalog(30, rng);
    for (const auto& s : cat) {
      lo = std::min(lo, s.mass_kg);
      hi = std::max(hi, s.mass_kg);
    }
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.1);
}
