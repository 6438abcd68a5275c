#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace stca::numerics {

// Categories used to attribute multiply-adds and allocations to the part of
// the network that issued them. The cost model mirrors these categories.
enum class OpTag : std::uint8_t {
  kOther = 0,
  kHistoryFfn,
  kHistoryNorm,
  kQueryPath,
  kQueryProjection,      // q W_Q and (q W_Q) W_K^T
  kKeyValueProjection,   // X W_K, X W_V (standard attention only)
  kAttentionScore,
  kWeightedSum,          // alpha X (reordered) or alpha V (standard)
  kValueProjection,      // (alpha X) W_V (reordered only)
  kOutputProjection,     // concat(heads) W_O
  kFusion,               // concat(o^(1..i), x_t) W_C
  kHead,                 // W_Z, head FFN, mixer, logit
  kCount
};

inline constexpr std::size_t kNumTags = static_cast<std::size_t>(OpTag::kCount);

std::string_view tag_name(OpTag tag);

struct CounterSnapshot {
  std::array<std::uint64_t, kNumTags> macs{};
  std::array<std::uint64_t, kNumTags> alloc_entries{};
  std::array<std::uint64_t, kNumTags> max_alloc_entries{};

  std::uint64_t total_macs() const;
  std::uint64_t macs_excluding(OpTag tag) const;
  std::uint64_t mac(OpTag tag) const { return macs[static_cast<std::size_t>(tag)]; }
  std::uint64_t allocated(OpTag tag) const { return alloc_entries[static_cast<std::size_t>(tag)]; }
  std::uint64_t max_allocation(OpTag tag) const {
    return max_alloc_entries[static_cast<std::size_t>(tag)];
  }
};

// Process-wide multiply-add and allocation counters. Disabled by default; the
// hot paths pay one relaxed atomic load when off.
//
// The current tag is global, not per thread, so that OpenMP workers inherit
// it. Open TagScopes only from serial code.
namespace instrumentation {

bool enabled();
void set_enabled(bool on);
void reset();
CounterSnapshot snapshot();

OpTag current_tag();
void set_current_tag(OpTag tag);

void add_macs(std::uint64_t n);
void note_allocation(std::uint64_t entries);

// Number of history encodings performed. Counted even while the MAC and
// allocation counters are disabled; cleared by reset().
void add_history_encodings(std::uint64_t n);
std::uint64_t history_encodings();

}  // namespace instrumentation

class TagScope {
 public:
  explicit TagScope(OpTag tag) : previous_(instrumentation::current_tag()) {
    instrumentation::set_current_tag(tag);
  }
  ~TagScope() { instrumentation::set_current_tag(previous_); }
  TagScope(const TagScope&) = delete;
  TagScope& operator=(const TagScope&) = delete;

 private:
  OpTag previous_;
};

// Resets and enables the counters for its lifetime.
class CountingSession {
 public:
  CountingSession() {
    instrumentation::reset();
    instrumentation::set_enabled(true);
  }
  ~CountingSession() { instrumentation::set_enabled(false); }
  CountingSession(const CountingSession&) = delete;
  CountingSession& operator=(const CountingSession&) = delete;

  CounterSnapshot snapshot() const { return instrumentation::snapshot(); }
};

}  // namespace stca::numerics
