#include "activelc/parallel.hpp"

#include <algorithm>
#include <condition_variable>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace activelc::parallel {

namespace {

class Pool {
public:
    explicit Pool(int n) : n_(n) {
        for (int t = 1; t < n_; ++t) workers_.emplace_back([this, t] { loop(t); });
    }
    ~Pool() {
        {
            std::lock_guard lock(mu_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }
    Pool(const Pool&) = delete;
    Pool& operator=(const Pool&) = delete;

    [[nodiscard]] int size() const { return n_; }

    void run(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
        if (n_ == 1 || n < 2) {
            if (n > 0) fn(0, n);
            return;
        }
        std::unique_lock lock(mu_);
        job_ = &fn;
        items_ = n;
        pending_ = n_ - 1;
        ++generation_;
        lock.unlock();
        cv_.notify_all();
        slice(0, fn, n);
        lock.lock();
        done_cv_.wait(lock, [this] { return pending_ == 0; });
        job_ = nullptr;
    }

private:
    void slice(int t, const std::function<void(std::size_t, std::size_t)>& fn, std::size_t n) const {
        const std::size_t b = n * static_cast<std::size_t>(t) / static_cast<std::size_t>(n_);
        const std::size_t e = n * static_cast<std::size_t>(t + 1) / static_cast<std::size_t>(n_);
        if (b < e) fn(b, e);
    }

    void loop(int t) {
        std::size_t seen = 0;
        for (;;) {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [&] { return generation_ != seen; });
            seen = generation_;
            if (stop_) return;
            const auto* fn = job_;
            const std::size_t n = items_;
            lock.unlock();
            slice(t, *fn, n);
            lock.lock();
            if (--pending_ == 0) done_cv_.notify_one();
        }
    }

    int n_;
    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(std::size_t, std::size_t)>* job_ = nullptr;
    std::size_t items_ = 0;
    std::size_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
};

std::unique_ptr<Pool>& pool() {
    static std::unique_ptr<Pool> p = std::make_unique<Pool>(1);
    return p;
}

ReductionMode g_mode = ReductionMode::Deterministic;

}  // namespace

void set_num_threads(int n) {
    if (n < 1) throw std::invalid_argument("thread count must be >= 1");
    if (pool()->size() != n) pool() = std::make_unique<Pool>(n);
}

int num_threads() { return pool()->size(); }

void set_reduction_mode(ReductionMode mode) { g_mode = mode; }
ReductionMode reduction_mode() { return g_mode; }

void for_range(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    pool()->run(n, fn);
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double sum(std::size_t n, const std::function<double(std::size_t)>& item) {
    if (g_mode == ReductionMode::Deterministic) {
        std::vector<double> parts(n);
        for_range(n, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) parts[i] = item(i);
        });
        return pairwise_sum(parts);
    }
    // one partial per slice, stored at the slice start
    std::vector<double> parts(n, 0.0);
    for_range(n, [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) s += item(i);
        parts[b] = s;
    });
    double s = 0.0;
    for (double p : parts) s += p;
    return s;
}

double max(std::size_t n, const std::function<double(std::size_t)>& item) {
    std::vector<double> parts(n, -std::numeric_limits<double>::infinity());
    for_range(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) parts[i] = item(i);
    });
    double m = -std::numeric_limits<double>::infinity();
    for (double p : parts) m = std::max(m, p);
    return m;
}

double min(std::size_t n, const std::function<double(std::size_t)>& item) {
    return -max(n, [&](std::size_t i) { return -item(i); });
}

}  // namespace activelc::parallel
