#pragma once

#include <cstddef>
#include <deque>

#include "adaptcast/time_series.hpp"

namespace adaptcast {

/// Bounded FIFO replay memory. Iteration runs oldest to newest.
class MemoryQueue {
public:
    explicit MemoryQueue(std::size_t capacity);

    /// Evicts the oldest example iff the queue is full.
    void append(WindowedExample example);

    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }

    const WindowedExample& oldest() const { return items_.front(); }
    const WindowedExample& newest() const { return items_.back(); }

    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

private:
    std::size_t capacity_;
    std::deque<WindowedExample> items_;
};

}  // namespace adaptcast
