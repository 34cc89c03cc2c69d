#include "adaptcast/memory_queue.hpp"

#include "adaptcast/errors.hpp"

namespace adaptcast {

MemoryQueue::MemoryQueue(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("memory capacity must be at least 1");
}

void MemoryQueue::append(WindowedExample example) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(example));
}

}  // namespace adaptcast
