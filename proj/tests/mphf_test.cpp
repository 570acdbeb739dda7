#include <gtest/gtest.h>

#include <random>

#include "sbf/mphf.hpp"

namespace sbf {
namespace {

std::vector<Hash128> random_hashes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Hash128> out(n);
  for (auto& h : out) h = {rng(), rng()};
  return out;
}

void expect_bijection(const Mphf& f, const std::vector<Hash128>& hashes) {
  ASSERT_EQ(f.size(), hashes.size());
  std::vector<bool> hit(hashes.size(), false);
  for (const Hash128& h : hashes) {
    const std::uint64_t s = f.slot(h);
    ASSERT_LT(s, hashes.size());
    ASSERT_FALSE(hit[s]) << "slot " << s << " used twice";
    hit[s] = true;
  }
}

class MphfSizes : public ::testing::TestWithParam<std::size_t> {};

TEST_P(MphfSizes, MapsKeysBijectively) {
  const auto hashes = random_hashes(GetParam(), GetParam() * 31 + 7);
  const auto f = Mphf::build(hashes);
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(f->bucket_count(), Mphf::bucket_count_for(GetParam()));
  expect_bijection(*f, hashes);
}

// Sizes above 2^16 exercise the augmenting-path placement of the last
// singleton buckets.
INSTANTIATE_TEST_SUITE_P(Sizes, MphfSizes,
                         ::testing::Values(1, 2, 3, 5, 17, 1000, 65536, 100000, 300000));

TEST(Mphf, EmptySet) {
  const auto f = Mphf::build({});
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(f->bucket_count(), 0u);
}

TEST(Mphf, DeterministicSeeds) {
  const auto hashes = random_hashes(20000, 5);
  EXPECT_EQ(Mphf::build(hashes)->seeds(), Mphf::build(hashes)->seeds());
}

TEST(Mphf, IdenticalHashesCannotBeSeparated) {
  auto hashes = random_hashes(10, 5);
  hashes[3] = hashes[7];
  EXPECT_FALSE(Mphf::build(hashes).has_value());
}

TEST(Mphf, RebuiltFromSeedsAnswersIdentically) {
  const auto hashes = random_hashes(5000, 9);
  const auto f = Mphf::build(hashes);
  const Mphf g(5000, f->seeds());
  for (const auto& h : hashes) EXPECT_EQ(f->slot(h), g.slot(h));
  EXPECT_THROW(Mphf(5001, f->seeds()), std::invalid_argument);
}

}  // namespace
}  // namespace sbf
