#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "nsbfm/parallel.hpp"
#include "nsbfm/rng.hpp"

using nsbfm::CounterRng;

// Known-answer vectors published with the Random123 library.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  EXPECT_EQ(CounterRng::philox(A4{0, 0, 0, 0}, A2{0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(CounterRng::philox(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(CounterRng::philox(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, StreamsAreReproducibleAndDistinct) {
  CounterRng a(42, 3, 7), b(42, 3, 7), c(42, 4, 7), d(42, 3, 8);
  int same_c = 0, same_d = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    same_c += va == c.next_u64();
    same_d += va == d.next_u64();
  }
  EXPECT_EQ(same_c, 0);
  EXPECT_EQ(same_d, 0);
}

TEST(CounterRng, UniformAndNormalMoments) {
  CounterRng g(1, 0, 0);
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0, sn4 = 0;
  for (int k = 0; k < n; ++k) {
    const double u = g.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    su2 += u * u;
    const double z = g.normal();
    sn += z;
    sn2 += z * z;
    sn4 += z * z * z * z;
  }
  // Bounds are about five standard errors.
  EXPECT_NEAR(su / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(su2 / n - std::pow(su / n, 2), 1.0 / 12, 0.002);
  EXPECT_NEAR(sn / n, 0.0, 5 / std::sqrt(n));
  EXPECT_NEAR(sn2 / n, 1.0, 5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(sn4 / n, 3.0, 5 * std::sqrt(96.0 / n));
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
  const int saved = nsbfm::num_threads();
  std::vector<double> ref;
  for (int threads : {1, 2, 3, 8}) {
    nsbfm::set_num_threads(threads);
    std::vector<double> out(1000);
    nsbfm::parallel_for(1000, [&](std::ptrdiff_t i) {
      CounterRng g(9, static_cast<std::uint32_t>(i), 0);
      out[static_cast<std::size_t>(i)] = g.normal();
    });
    if (ref.empty()) ref = out;
    EXPECT_EQ(out, ref) << threads << " threads";
  }
  nsbfm::set_num_threads(saved);
}

TEST(Parallel, PropagatesExceptionsAndRunsNested) {
  const int saved = nsbfm::num_threads();
  nsbfm::set_num_threads(4);
  EXPECT_THROW(nsbfm::parallel_for(100,
                                   [](std::ptrdiff_t i) {
                                     if (i == 57) throw std::runtime_error("boom");
                                   }),
               std::runtime_error);
  std::vector<int> hits(64, 0);
  nsbfm::parallel_for(8, [&](std::ptrdiff_t i) {
    nsbfm::parallel_for(8, [&](std::ptrdiff_t j) { hits[static_cast<std::size_t>(i * 8 + j)] += 1; });
  });
  EXPECT_EQ(std::accumulate(hits.begin(), hits.end(), 0), 64);
  nsbfm::set_num_threads(saved);
}
