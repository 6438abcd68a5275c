#include "stca/costmodel/costmodel.hpp"

#include "stca/errors.hpp"

namespace stca::costmodel {

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::kStcaStandard: return "stca_standard";
    case Kind::kStcaReordered: return "stca_reordered";
    case Kind::kSelfAttention: return "self_attention";
  }
  return "?";
}

Kind parse_kind(std::string_view name) {
  for (Kind k : {Kind::kStcaStandard, Kind::kStcaReordered, Kind::kSelfAttention}) {
    if (kind_name(k) == name) return k;
  }
  throw ConfigError("unknown architecture kind '" + std::string(name) + "'");
}

void ArchSpec::validate() const {
  if (L == 0 && kind == Kind::kSelfAttention) throw ConfigError("self-attention needs L >= 1");
  if (d == 0 || h == 0 || r == 0 || M == 0) throw ConfigError("d, h, r and M must be positive");
  if (d % h != 0) throw ConfigError("d=" + std::to_string(d) + " is not divisible by h=" + std::to_string(h));
}

Convention Convention::calibrated() { return {1, 2, 5}; }
Convention Convention::counted() { return {1, 3, 0}; }
Convention Convention::textbook() { return {2, 3, 5}; }

double CostReport::component(std::string_view name) const {
  double s = 0;
  for (const auto& c : breakdown) {
    if (c.name == name) s += c.flops;
  }
  return s;
}

namespace {

struct Builder {
  std::vector<Component> parts;
  void add(std::string name, double v) {
    for (auto& c : parts) {
      if (c.name == name) {
        c.flops += v;
        return;
      }
    }
    parts.push_back({std::move(name), v, false});
  }
};

std::vector<Component> components(const ArchSpec& s, const Convention& c) {
  const double L = static_cast<double>(s.L), d = static_cast<double>(s.d), h = static_cast<double>(s.h);
  const double r = static_cast<double>(s.r);
  const double fm = c.flops_per_mac, F = c.ffn_matrices, e = c.elementwise_flops;
  Builder b;
  for (std::size_t i = 0; i < s.M; ++i) {
    if (s.kind == Kind::kSelfAttention) {
      const double N = L + 1;
      b.add("qkvo_projection", fm * 4 * d * d * N);
      b.add("ffn", fm * F * r * d * d * N);
      b.add("attention_score", fm * d * N * N);
      b.add("weighted_sum", fm * d * N * N);
      b.add("norm", e * 2 * d * N);
      b.add("activation", e * r * d * N);
      b.add("softmax", e * h * N * N);
      continue;
    }
    b.add("history_ffn", fm * F * r * d * d * L);
    b.add("history_norm", e * d * L);
    b.add("history_activation", e * r * d * L);
    b.add("softmax", e * h * L);
    b.add("query_ffn", fm * F * r * d * d);
    if (i == 0) {
      b.add("query_norm", e * d);
    } else {
      b.add("fusion", fm * static_cast<double>(i + 1) * d * d);
    }
    b.add("output_projection", fm * d * d);
    if (s.kind == Kind::kStcaReordered) {
      b.add("query_projection", fm * 2 * d * d);
      b.add("attention_score", fm * h * L * d);
      b.add("weighted_sum", fm * h * L * d);
      b.add("value_projection", fm * d * d);
    } else {
      b.add("query_projection", fm * d * d);
      b.add("kv_projection", fm * 2 * L * d * d);
      b.add("attention_score", fm * L * d);
      b.add("weighted_sum", fm * L * d);
    }
  }
  return b.parts;
}

double peak_scratch(const ArchSpec& s) {
  const double L = static_cast<double>(s.L), d = static_cast<double>(s.d), h = static_cast<double>(s.h);
  switch (s.kind) {
    case Kind::kStcaReordered: return h * L;
    case Kind::kStcaStandard: return 2 * L * d + h * L;
    case Kind::kSelfAttention: return h * (L + 1) * (L + 1) + 3 * (L + 1) * d;
  }
  return 0;
}

}  // namespace

CostReport flops(const ArchSpec& spec, const Convention& convention) {
  spec.validate();
  CostReport report;
  report.breakdown = components(spec, convention);
  ArchSpec at_zero = spec;
  at_zero.L = 0;
  const auto base = components(at_zero, convention);
  for (auto& c : report.breakdown) {
    double fixed = 0;
    for (const auto& z : base) {
      if (z.name == c.name) fixed = z.flops;
    }
    c.length_dependent = c.flops != fixed;
    report.total_flops += c.flops;
    report.length_independent_flops += fixed;
  }
  report.length_dependent_flops = report.total_flops - report.length_independent_flops;
  report.peak_scratch_entries = peak_scratch(spec);
  return report;
}

double scaling_ratio(Kind kind, std::size_t L1, std::size_t L2, const ArchSpec& dims, const Convention& convention) {
  ArchSpec a = dims, b = dims;
  a.kind = b.kind = kind;
  a.L = L1;
  b.L = L2;
  return flops(b, convention).total_flops / flops(a, convention).total_flops;
}

double reorder_reduction(std::size_t d, std::size_t h) {
  if (h == 0 || d % h != 0) throw ConfigError("reorder_reduction needs h dividing d");
  return 2.0 * static_cast<double>(d) / static_cast<double>(h);
}

double measured_reorder_reduction(const CostReport& standard, const CostReport& reordered) {
  const double denom = reordered.component("weighted_sum");
  if (denom <= 0) throw ConfigError("reordered report has no weighted-sum cost");
  return standard.component("kv_projection") / denom;
}

double history_activation_entries(const ArchSpec& spec) {
  spec.validate();
  return static_cast<double>(spec.M) * static_cast<double>(3 * spec.r + 4) * static_cast<double>(spec.L) *
         static_cast<double>(spec.d);
}

MemoryReport memory_model(const ArchSpec& spec, std::size_t m, BatchMode mode) {
  if (m == 0) throw ConfigError("memory_model needs m >= 1");
  const double history = history_activation_entries(spec);
  const double md = static_cast<double>(m);
  // Per target and layer: attention weights (h L) plus O(d) query-side tensors.
  const double per_target = static_cast<double>(spec.M) *
                            (static_cast<double>(spec.h * spec.L) + static_cast<double>((3 * spec.r + 8) * spec.d));
  MemoryReport out;
  out.history_entries = mode == BatchMode::kTriplet ? md * history : history;
  out.target_entries = md * per_target;
  out.per_target_history_entries = out.history_entries / md;
  return out;
}

double footprint_ratio(const ArchSpec& spec, std::size_t m) {
  return memory_model(spec, m, BatchMode::kTriplet).per_target_history_entries /
         memory_model(spec, m, BatchMode::kRlb).per_target_history_entries;
}

}  // namespace stca::costmodel
