#include "doctest.h"

#include <atomic>
#include <stdexcept>

#include "lyapflow/executor.hpp"
#include "lyapflow/rng.hpp"

using namespace lyapflow;

TEST_SUITE("rng")
{
  TEST_CASE("philox4x32-10 known-answer vectors")
  {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("streams are reproducible and distinct")
  {
    CounterRng a(42, 7, Stream::noise), b(42, 7, Stream::noise), c(42, 8, Stream::noise), d(42, 7, Stream::frame);
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next_u64();
      CHECK(x == b.next_u64());
      CHECK(x != c.next_u64());
      CHECK(x != d.next_u64());
    }
  }

  TEST_CASE("uniform and normal moments")
  {
    CounterRng r(1, 0, Stream::auxiliary);
    const int n = 200000;
    double su = 0, s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
      const double u = r.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      su += u;
      const double z = r.normal();
      s1 += z;
      s2 += z * z;
      s4 += z * z * z * z;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(s1 / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.03));
  }

  TEST_CASE("executor output is independent of the worker count")
  {
    std::vector<double> one(1000), four(1000);
    auto body = [](std::vector<double>& out) {
      return [&out](std::size_t i, unsigned) {
        CounterRng r(3, i, Stream::noise);
        out[i] = r.normal();
      };
    };
    Executor(1).for_each(one.size(), body(one));
    Executor(4).for_each(four.size(), body(four));
    CHECK(one == four);
  }

  TEST_CASE("executor rethrows the lowest failing index")
  {
    std::atomic<int> ran{0};
    auto body = [&](std::size_t i, unsigned) {
      ++ran;
      if (i == 17 || i == 90)
        throw std::runtime_error("item " + std::to_string(i));
    };
    try {
      Executor(3).for_each(100, body);
      FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "item 17");
    }
  }
}
