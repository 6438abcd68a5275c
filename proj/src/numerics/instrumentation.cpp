#include "stca/numerics/instrumentation.hpp"

#include <atomic>

namespace stca::numerics {

namespace {

struct Counters {
  std::atomic<bool> enabled{false};
  std::atomic<std::uint8_t> tag{0};
  std::array<std::atomic<std::uint64_t>, kNumTags> macs{};
  std::array<std::atomic<std::uint64_t>, kNumTags> alloc{};
  std::array<std::atomic<std::uint64_t>, kNumTags> max_alloc{};
  std::atomic<std::uint64_t> encodings{0};
};

Counters& counters() {
  static Counters c;
  return c;
}

}  // namespace

std::string_view tag_name(OpTag tag) {
  switch (tag) {
    case OpTag::kOther: return "other";
    case OpTag::kHistoryFfn: return "history_ffn";
    case OpTag::kHistoryNorm: return "history_norm";
    case OpTag::kQueryPath: return "query_path";
    case OpTag::kQueryProjection: return "query_projection";
    case OpTag::kKeyValueProjection: return "kv_projection";
    case OpTag::kAttentionScore: return "attention_score";
    case OpTag::kWeightedSum: return "weighted_sum";
    case OpTag::kValueProjection: return "value_projection";
    case OpTag::kOutputProjection: return "output_projection";
    case OpTag::kFusion: return "fusion";
    case OpTag::kHead: return "head";
    case OpTag::kCount: break;
  }
  return "?";
}

std::uint64_t CounterSnapshot::total_macs() const {
  std::uint64_t s = 0;
  for (auto v : macs) s += v;
  return s;
}

std::uint64_t CounterSnapshot::macs_excluding(OpTag tag) const {
  return total_macs() - mac(tag);
}

namespace instrumentation {

bool enabled() { return counters().enabled.load(std::memory_order_relaxed); }

void set_enabled(bool on) { counters().enabled.store(on, std::memory_order_relaxed); }

void reset() {
  auto& c = counters();
  for (std::size_t i = 0; i < kNumTags; ++i) {
    c.macs[i].store(0, std::memory_order_relaxed);
    c.alloc[i].store(0, std::memory_order_relaxed);
    c.max_alloc[i].store(0, std::memory_order_relaxed);
  }
  c.encodings.store(0, std::memory_order_relaxed);
}

CounterSnapshot snapshot() {
  auto& c = counters();
  CounterSnapshot s;
  for (std::size_t i = 0; i < kNumTags; ++i) {
    s.macs[i] = c.macs[i].load(std::memory_order_relaxed);
    s.alloc_entries[i] = c.alloc[i].load(std::memory_order_relaxed);
    s.max_alloc_entries[i] = c.max_alloc[i].load(std::memory_order_relaxed);
  }
  return s;
}

OpTag current_tag() { return static_cast<OpTag>(counters().tag.load(std::memory_order_relaxed)); }

void set_current_tag(OpTag tag) {
  counters().tag.store(static_cast<std::uint8_t>(tag), std::memory_order_relaxed);
}

void add_macs(std::uint64_t n) {
  auto& c = counters();
  if (!c.enabled.load(std::memory_order_relaxed)) return;
  c.macs[c.tag.load(std::memory_order_relaxed)].fetch_add(n, std::memory_order_relaxed);
}

void note_allocation(std::uint64_t entries) {
  auto& c = counters();
  if (!c.enabled.load(std::memory_order_relaxed)) return;
  const auto t = c.tag.load(std::memory_order_relaxed);
  c.alloc[t].fetch_add(entries, std::memory_order_relaxed);
  auto& mx = c.max_alloc[t];
  auto prev = mx.load(std::memory_order_relaxed);
  while (prev < entries && !mx.compare_exchange_weak(prev, entries, std::memory_order_relaxed)) {
  }
}

void add_history_encodings(std::uint64_t n) {
  counters().encodings.fetch_add(n, std::memory_order_relaxed);
}

std::uint64_t history_encodings() { return counters().encodings.load(std::memory_order_relaxed); }

}  // namespace instrumentation
}  // namespace stca::numerics
