#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fedepm {

/// Fixed set of threads that execute `parallel_for` batches. Each index is
/// handled by exactly one call; the call returns after every index finished.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t workers);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    std::size_t size() const { return threads_.size() + 1; }

    /// Runs fn(0..count-1). The first exception thrown by a task is rethrown.
    void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

private:
    void worker_loop();
    void drain();

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t)>* task_{nullptr};
    std::size_t count_{0};
    std::size_t next_{0};
    std::size_t finished_{0};
    std::size_t generation_{0};
    bool stop_{false};
    std::exception_ptr error_;
};

} // namespace fedepm
