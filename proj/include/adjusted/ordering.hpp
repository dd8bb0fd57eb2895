#pragma once

// Memory-ordering levels used by the objects. With
// ADJUSTED_ESCALATE_ORDERING every level becomes seq_cst, which is useful
// for differential testing.

#include <atomic>

namespace adjusted::ord {

#ifdef ADJUSTED_ESCALATE_ORDERING
inline constexpr std::memory_order plain = std::memory_order_seq_cst;
inline constexpr std::memory_order opaque = std::memory_order_seq_cst;
inline constexpr std::memory_order acquire = std::memory_order_seq_cst;
inline constexpr std::memory_order release = std::memory_order_seq_cst;
inline constexpr std::memory_order acq_rel = std::memory_order_seq_cst;
#else
inline constexpr std::memory_order plain = std::memory_order_relaxed;
inline constexpr std::memory_order opaque = std::memory_order_relaxed;
inline constexpr std::memory_order acquire = std::memory_order_acquire;
inline constexpr std::memory_order release = std::memory_order_release;
inline constexpr std::memory_order acq_rel = std::memory_order_acq_rel;
#endif
inline constexpr std::memory_order volatile_ = std::memory_order_seq_cst;

inline constexpr std::size_t kCacheLine = 64;

}  // namespace adjusted::ord
