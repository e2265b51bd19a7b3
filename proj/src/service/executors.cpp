#include "socratic/service.hpp"

namespace socratic::service {

void QueuedExecutor::submit(std::function<void()> task) {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(task));
}

bool QueuedExecutor::run_one() {
    std::function<void()> task;
    {
        std::lock_guard lock(mutex_);
        if (queue_.empty()) return false;
        task = std::move(queue_.front());
        queue_.pop_front();
    }
    task();
    return true;
}

std::size_t QueuedExecutor::run_all() {
    std::size_t n = 0;
    while (run_one()) ++n;
    return n;
}

std::size_t QueuedExecutor::pending() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
}

ThreadPoolExecutor::ThreadPoolExecutor(std::size_t workers) {
    for (std::size_t i = 0; i < std::max<std::size_t>(1, workers); ++i) threads_.emplace_back([this] { loop(); });
}

ThreadPoolExecutor::~ThreadPoolExecutor() { shutdown(); }

void ThreadPoolExecutor::submit(std::function<void()> task) {
    {
        std::lock_guard lock(mutex_);
        if (stopping_) return;
        queue_.push_back(std::move(task));
    }
    cv_.notify_one();
}

void ThreadPoolExecutor::shutdown() {
    {
        std::lock_guard lock(mutex_);
        if (stopping_ && threads_.empty()) return;
        stopping_ = true;
        queue_.clear();
    }
    cv_.notify_all();
    for (auto& t : threads_) {
        if (t.joinable()) t.join();
    }
    threads_.clear();
    idle_cv_.notify_all();
}

void ThreadPoolExecutor::wait_idle() {
    std::unique_lock lock(mutex_);
    idle_cv_.wait(lock, [this] { return (queue_.empty() && active_ == 0) || stopping_; });
}

void ThreadPoolExecutor::loop() {
    for (;;) {
        std::function<void()> task;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            task = std::move(queue_.front());
            queue_.pop_front();
            ++active_;
        }
        try {
            task();
        } catch (...) {
            // Tasks report their own failures; nothing escapes a worker.
        }
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        idle_cv_.notify_all();
    }
}

}  // namespace socratic::service
