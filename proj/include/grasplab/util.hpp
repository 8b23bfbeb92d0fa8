#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace grasplab {

// FNV-1a, used for config and scene hashes in manifests and reports.
uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64(const std::string& s);
std::string hash_hex(uint64_t h);

// CRC32 (IEEE) over a byte buffer, for model and dataset payload checks.
uint32_t crc32(const void* data, size_t len);

// Number of worker threads: min(GRASPLAB_THREADS, hardware_concurrency),
// at least 1. GRASPLAB_THREADS unset or 0 means "use all cores".
int worker_count();

// Runs fn(i) for i in [0, n). Work is split across worker_count() threads;
// fn must only write to per-index locations so results are order-independent.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

} // namespace grasplab
