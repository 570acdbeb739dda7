#include "sbf/mphf.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace sbf {
namespace {

constexpr std::uint32_t kFree = std::numeric_limits<std::uint32_t>::max();

// Upper bound on buckets expanded while searching for an augmenting path for
// one stuck singleton bucket.
constexpr std::size_t kAugmentBudget = 4096;

class Builder {
 public:
  explicit Builder(std::span<const Hash128> hashes)
      : hashes_(hashes),
        n_(hashes.size()),
        n_buckets_(Mphf::bucket_count_for(hashes.size())),
        seeds_(n_buckets_, 0),
        owner_(n_, kFree),
        slot_of_bucket_(n_buckets_, kFree) {}

  std::optional<Mphf> run() {
    // Counting sort of key indices by bucket.
    std::vector<std::uint32_t> bucket_begin(n_buckets_ + 1, 0);
    std::vector<std::uint64_t> bucket_of(n_);
    for (std::uint64_t i = 0; i < n_; ++i) {
      bucket_of[i] = fast_range(hashes_[i].lo, n_buckets_);
      ++bucket_begin[bucket_of[i] + 1];
    }
    std::partial_sum(bucket_begin.begin(), bucket_begin.end(), bucket_begin.begin());
    members_.resize(n_);
    {
      std::vector<std::uint32_t> cursor(bucket_begin.begin(), bucket_begin.end() - 1);
      for (std::uint64_t i = 0; i < n_; ++i) {
        members_[cursor[bucket_of[i]]++] = static_cast<std::uint32_t>(i);
      }
    }
    bucket_begin_ = std::move(bucket_begin);

    std::vector<std::uint32_t> order(n_buckets_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return bucket_size(a) > bucket_size(b);
    });

    for (std::uint32_t bucket : order) {
      const std::uint32_t size = bucket_size(bucket);
      if (size == 0) break;
      if (size == 1) {
        if (!place_singleton(bucket)) return std::nullopt;
      } else if (!place_multi(bucket)) {
        return std::nullopt;
      }
    }
    return Mphf(n_, std::move(seeds_));
  }

 private:
  std::uint32_t bucket_size(std::uint32_t b) const {
    return bucket_begin_[b + 1] - bucket_begin_[b];
  }

  std::uint64_t slot(std::uint32_t key, std::uint32_t seed) const {
    return Mphf::slot_for(hashes_[key], seed, n_);
  }

  bool place_multi(std::uint32_t bucket) {
    const std::uint32_t begin = bucket_begin_[bucket];
    const std::uint32_t size = bucket_size(bucket);
    std::vector<std::uint64_t> slots(size);
    for (std::uint32_t seed = 0; seed < Mphf::kSeedCount; ++seed) {
      bool ok = true;
      for (std::uint32_t i = 0; i < size && ok; ++i) {
        const std::uint64_t s = slot(members_[begin + i], seed);
        if (owner_[s] != kFree) {
          ok = false;
          break;
        }
        for (std::uint32_t j = 0; j < i; ++j) {
          if (slots[j] == s) {
            ok = false;
            break;
          }
        }
        slots[i] = s;
      }
      if (!ok) continue;
      for (std::uint64_t s : slots) owner_[s] = bucket;
      seeds_[bucket] = static_cast<std::uint16_t>(seed);
      return true;
    }
    return false;
  }

  void assign_singleton(std::uint32_t bucket, std::uint32_t seed, std::uint64_t s) {
    owner_[s] = bucket;
    seeds_[bucket] = static_cast<std::uint16_t>(seed);
    slot_of_bucket_[bucket] = s;
  }

  bool place_singleton(std::uint32_t bucket) {
    const std::uint32_t key = members_[bucket_begin_[bucket]];
    for (std::uint32_t seed = 0; seed < Mphf::kSeedCount; ++seed) {
      const std::uint64_t s = slot(key, seed);
      if (owner_[s] == kFree) {
        assign_singleton(bucket, seed, s);
        return true;
      }
    }
    return augment(bucket);
  }

  // Breadth-first search for a chain of singleton buckets that can each shift
  // into the next one's slot, ending at a free slot. Only singletons are moved
  // because their slot is fully determined by their seed.
  bool augment(std::uint32_t start) {
    struct Step {
      std::uint32_t from;  // bucket that wants this node's slot
      std::uint32_t seed;  // seed sending `from` into that slot
    };
    std::vector<std::uint32_t> queue{start};
    std::unordered_map<std::uint32_t, Step> parent;
    std::vector<bool> visited(n_buckets_, false);
    visited[start] = true;

    for (std::size_t head = 0; head < queue.size() && head < kAugmentBudget; ++head) {
      const std::uint32_t node = queue[head];
      const std::uint32_t key = members_[bucket_begin_[node]];
      for (std::uint32_t seed = 0; seed < Mphf::kSeedCount; ++seed) {
        const std::uint64_t s = slot(key, seed);
        const std::uint32_t occupant = owner_[s];
        if (occupant == kFree) {
          // Shift every bucket along the path one step forward.
          std::uint32_t cur = node;
          std::uint32_t cur_seed = seed;
          std::uint64_t target = s;
          while (true) {
            const std::uint64_t vacated = slot_of_bucket_[cur];
            assign_singleton(cur, cur_seed, target);
            if (cur == start) return true;
            const Step& step = parent.at(cur);
            cur = step.from;
            cur_seed = step.seed;
            target = vacated;
          }
        }
        if (!visited[occupant] && bucket_size(occupant) == 1) {
          visited[occupant] = true;
          parent.emplace(occupant, Step{node, seed});
          queue.push_back(occupant);
        }
      }
    }
    return false;
  }

  std::span<const Hash128> hashes_;
  std::uint64_t n_;
  std::uint64_t n_buckets_;
  std::vector<std::uint16_t> seeds_;
  std::vector<std::uint32_t> owner_;  // slot -> bucket
  std::vector<std::uint64_t> slot_of_bucket_;  // singleton bucket -> slot
  std::vector<std::uint32_t> bucket_begin_;
  std::vector<std::uint32_t> members_;
};

}  // namespace

Mphf::Mphf(std::uint64_t n_keys, std::vector<std::uint16_t> seeds)
    : n_(n_keys), seeds_(std::move(seeds)) {
  if (seeds_.size() != bucket_count_for(n_keys)) {
    throw std::invalid_argument("mphf: bucket count does not match key count");
  }
}

std::optional<Mphf> Mphf::build(std::span<const Hash128> hashes) {
  if (hashes.size() >= kFree) {
    throw std::invalid_argument("mphf: too many keys");
  }
  return Builder(hashes).run();
}

}  // namespace sbf
