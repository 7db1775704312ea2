/**
 * Copyright 2026 The fedsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedsim/worker_pool.hpp"

#include "fedsim/errors.hpp"

namespace fedsim {

WorkerPool::WorkerPool(std::size_t workers) {
  if (workers == 0) throw ArgumentError("worker pool needs at least one worker");
  threads_.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  work_cv_.notify_all();
}

std::vector<std::exception_ptr> WorkerPool::run(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  if (n == 0) return errors;
  std::unique_lock lock(mutex_);
  job_ = &fn;
  errors_ = &errors;
  next_ = 0;
  total_ = n;
  finished_ = 0;
  work_cv_.notify_all();
  done_cv_.wait(lock, [&] { return finished_ == total_; });
  job_ = nullptr;
  errors_ = nullptr;
  return errors;
}

void WorkerPool::worker_loop() {
  std::unique_lock lock(mutex_);
  while (true) {
    work_cv_.wait(lock, [&] { return stopping_ || (job_ != nullptr && next_ < total_); });
    if (stopping_) return;
    const std::size_t index = next_++;
    const auto* job = job_;
    auto* errors = errors_;
    lock.unlock();
    try {
      (*job)(index);
    } catch (...) {
      (*errors)[index] = std::current_exception();
    }
    lock.lock();
    if (++finished_ == total_) done_cv_.notify_all();
  }
}

}  // namespace fedsim
