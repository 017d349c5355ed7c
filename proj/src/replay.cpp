#include "gridcover/replay.hpp"

#include <stdexcept>

namespace gridcover {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::runtime_error("replay: capacity must be positive");
    storage_.reserve(capacity);
}

void ReplayBuffer::push(Experience exp) {
    if (count_ < capacity_) {
        storage_.push_back(std::move(exp));
        ++count_;
    } else {
        storage_[head_] = std::move(exp);
    }
    head_ = (head_ + 1) % capacity_;
}

const Experience& ReplayBuffer::at(std::size_t i) const {
    if (i >= count_) throw std::out_of_range("replay: index past stored count");
    if (count_ < capacity_) return storage_[i];
    return storage_[(head_ + i) % capacity_];
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t m, Rng& rng) const {
    if (count_ < m) throw std::runtime_error("replay: fewer stored experiences than batch size");
    std::vector<const Experience*> batch;
    batch.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
        batch.push_back(&storage_[uniform_index(rng, static_cast<std::uint32_t>(count_))]);
    return batch;
}

}  // namespace gridcover
