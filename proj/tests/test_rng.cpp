#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "fg/rng.hpp"

using fg::Rng;

TEST_CASE("identical seeds give identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge immediately") {
  Rng a(1), b(2);
  CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("draws are a pure function of the counter, not call context") {
  // Interleaving uniform() and gaussian() must not change what the other
  // stream of the same seed sees at the same counter offsets.
  Rng a(7);
  a.uniform();
  a.uniform();
  uint64_t third = a.next_u64();

  Rng b(7);
  b.gaussian();  // consumes exactly two draws
  CHECK(b.next_u64() == third);
}

TEST_CASE("uniform lies in [0, 1)") {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("ranged uniform and log_uniform respect bounds") {
  Rng r(11);
  for (int i = 0; i < 2000; ++i) {
    double u = r.uniform(-3.0, 5.0);
    CHECK(u >= -3.0);
    CHECK(u < 5.0);
    double lu = r.log_uniform(0.001, 0.5);
    CHECK(lu >= 0.001);
    CHECK(lu <= 0.5);
  }
}

TEST_CASE("uniform_int covers [0, n) and hits every residue") {
  Rng r(5);
  std::set<uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    uint64_t v = r.uniform_int(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("gaussian moments are sane") {
  Rng r(13);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double g = r.gaussian();
    sum += g;
    sq += g * g;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("split streams are independent of parent consumption") {
  Rng parent(99);
  Rng child_before = parent.split("noise");
  parent.uniform();
  parent.uniform();
  Rng child_after = parent.split("noise");
  // split depends only on (key, tag), so both children are the same stream
  CHECK(child_before.next_u64() == child_after.next_u64());

  // distinct purposes give unrelated streams
  Rng other = parent.split("shuffle");
  Rng noise = parent.split("noise");
  CHECK(other.next_u64() != noise.next_u64());
}

TEST_CASE("derive mixes every argument") {
  uint64_t base = Rng::derive(1, 2, 3, 4);
  CHECK(Rng::derive(1, 2, 3, 5) != base);
  CHECK(Rng::derive(1, 2, 4, 3) != base);
  CHECK(Rng::derive(1, 3, 2, 4) != base);
  CHECK(Rng::derive(2, 2, 3, 4) != base);
  CHECK(Rng::derive(1, 2, 3, 4) == base);
}

TEST_CASE("fnv1a matches the published 64-bit vectors") {
  CHECK(Rng::fnv1a("") == 0xCBF29CE484222325ull);
  CHECK(Rng::fnv1a("a") == 0xAF63DC4C8601EC8Cull);
  CHECK(Rng::fnv1a("foobar") == 0x85944171F73967E8ull);
}

TEST_CASE("mix64 is deterministic and nontrivial") {
  CHECK(Rng::mix64(0) == Rng::mix64(0));
  std::set<uint64_t> outs;
  for (uint64_t i = 0; i < 100; ++i) outs.insert(Rng::mix64(i));
  CHECK(outs.size() == 100);
}
