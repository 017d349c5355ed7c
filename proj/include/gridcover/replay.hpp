#pragma once

#include <cstddef>
#include <vector>

#include "gridcover/env.hpp"
#include "gridcover/rng.hpp"

namespace gridcover {

struct Experience {
    PackedObs s;
    int action = 0;
    float reward = 0.0f;
    PackedObs s_next;
    bool terminal = false;
};

// Fixed-capacity ring; oldest experience is overwritten first.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Experience exp);
    std::size_t size() const { return count_; }
    std::size_t capacity() const { return capacity_; }

    // i-th oldest stored experience, 0 = oldest.
    const Experience& at(std::size_t i) const;

    // m indices drawn uniformly with replacement; pre: size() >= m.
    std::vector<const Experience*> sample(std::size_t m, Rng& rng) const;

  private:
    std::size_t capacity_;
    std::size_t count_ = 0;
    std::size_t head_ = 0;  // next slot to write
    std::vector<Experience> storage_;
};

}  // namespace gridcover
