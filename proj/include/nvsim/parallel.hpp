// Copyright 2026 The nvsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NVSIM_PARALLEL_HPP
#define NVSIM_PARALLEL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>

namespace nvsim {

// Environment variable that caps the number of worker threads.
inline constexpr const char* kWorkersEnv = "NVSIM_WORKERS";

// Worker count from NVSIM_WORKERS, else hardware concurrency.
int worker_count();

// Runs body(k) for k in [0, n) on worker_count() threads. Work items are
// independent; callers store results by index so the outcome does not depend
// on scheduling. The first exception thrown by any item is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

std::uint64_t splitmix64(std::uint64_t x);

// Seed for an independent stream identified by up to three indices.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace nvsim

#endif  // NVSIM_PARALLEL_HPP
