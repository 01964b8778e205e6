#pragma once

// Per-device transmission planning as a function of the wake-up slot.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "uavec/fountain.hpp"
#include "uavec/random.hpp"
#include "uavec/scenario.hpp"

namespace uavec::protocol {

struct RemainingCapacity {
  int n_i = 0;      // slots left after waking in slot i
  int gamma_i = 0;  // slack beyond beta; may be zero or negative
};

inline RemainingCapacity remaining_capacity(int i, int n_s, int beta) {
  if (i < 0 || i >= n_s) throw std::out_of_range("remaining_capacity: wake slot outside [0, n_s)");
  return {n_s - i, n_s - i - beta};
}

struct ReplicationCounts {
  int m_q = 0;
  int m_r = 0;
};

inline ReplicationCounts replication_counts(int eps_hat, int beta) {
  if (beta < 1) throw std::invalid_argument("replication_counts: beta must be >= 1");
  return {eps_hat / beta, eps_hat % beta};
}

/// One planned frame: either coded frame `index` of the schedule or a copy of
/// source message `index`.
struct ScheduledFrame {
  int slot = 0;
  bool coded = false;
  std::size_t index = 0;
};

struct SlotSchedule {
  std::vector<ScheduledFrame> entries;
  std::vector<std::size_t> dropped;
  std::vector<fountain::CodedFrame> coded_frames;
  // TDMA grants: slots belong to a reservation and never collide.
  bool reserved = false;

  bool uses_coding() const { return !coded_frames.empty(); }
};

namespace detail {

// First k entries of `v` become a uniform random ordered k-subset.
template <typename T>
void partial_shuffle(std::vector<T>& v, std::size_t k, Rng& rng) {
  for (std::size_t j = 0; j < k && j + 1 < v.size(); ++j) {
    const auto pick = std::uniform_int_distribution<std::size_t>(j, v.size() - 1)(rng);
    std::swap(v[j], v[pick]);
  }
}

inline std::vector<int> pick_slots(int first, int n_i, std::size_t k, Rng& rng) {
  std::vector<int> slots(static_cast<std::size_t>(n_i));
  std::iota(slots.begin(), slots.end(), first);
  partial_shuffle(slots, k, rng);
  slots.resize(k);
  return slots;
}

inline void plan_uncoded(SlotSchedule& out, int i, int n_i, int beta, Rng& rng) {
  const auto b = static_cast<std::size_t>(beta);
  if (beta <= n_i) {
    const auto slots = pick_slots(i, n_i, b, rng);
    for (std::size_t l = 0; l < b; ++l) out.entries.push_back({slots[l], false, l});
    return;
  }
  std::vector<std::size_t> msgs(b);
  std::iota(msgs.begin(), msgs.end(), std::size_t{0});
  const auto sent = static_cast<std::size_t>(n_i);
  partial_shuffle(msgs, sent, rng);
  const auto slots = pick_slots(i, n_i, sent, rng);
  for (std::size_t j = 0; j < sent; ++j) out.entries.push_back({slots[j], false, msgs[j]});
  out.dropped.assign(msgs.begin() + static_cast<std::ptrdiff_t>(sent), msgs.end());
  std::sort(out.dropped.begin(), out.dropped.end());
}

}  // namespace detail

/// Plans every frame a device sends after waking in slot `i`.
inline SlotSchedule plan_transmissions(Scheme scheme, int i, const ScenarioConfig& cfg,
                                       const fountain::SourceBlock& block, Rng& rng) {
  const auto cap = remaining_capacity(i, cfg.n_s, cfg.beta);
  if (static_cast<int>(block.beta()) != cfg.beta) {
    throw std::invalid_argument("plan_transmissions: block size differs from cfg.beta");
  }
  const int eps = cfg.effective_epsilon();
  SlotSchedule out;

  switch (scheme) {
    case Scheme::Fountain:
      if (eps > 0 && cap.gamma_i >= eps) {
        const auto total = static_cast<std::size_t>(cfg.beta + eps);
        out.coded_frames = fountain::encode(block, total, rng);
        const auto slots = detail::pick_slots(i, cap.n_i, total, rng);
        for (std::size_t j = 0; j < total; ++j) out.entries.push_back({slots[j], true, j});
      } else {
        detail::plan_uncoded(out, i, cap.n_i, cfg.beta, rng);
      }
      break;

    case Scheme::Replication:
      if (cap.gamma_i > 0) {
        const int eps_hat = std::min(cap.gamma_i, eps);
        const auto [m_q, m_r] = replication_counts(eps_hat, cfg.beta);
        std::vector<std::size_t> msgs(static_cast<std::size_t>(cfg.beta));
        std::iota(msgs.begin(), msgs.end(), std::size_t{0});
        detail::partial_shuffle(msgs, static_cast<std::size_t>(m_r), rng);
        std::vector<std::size_t> copies;
        for (std::size_t j = 0; j < msgs.size(); ++j) {
          const int c = m_q + 1 + (j < static_cast<std::size_t>(m_r) ? 1 : 0);
          for (int k = 0; k < c; ++k) copies.push_back(msgs[j]);
        }
        const auto slots = detail::pick_slots(i, cap.n_i, copies.size(), rng);
        for (std::size_t j = 0; j < copies.size(); ++j) out.entries.push_back({slots[j], false, copies[j]});
      } else {
        detail::plan_uncoded(out, i, cap.n_i, cfg.beta, rng);
      }
      break;

    case Scheme::Baseline:
      detail::plan_uncoded(out, i, cap.n_i, cfg.beta, rng);
      break;

    case Scheme::TdmaBestCase:
      out.reserved = true;
      for (int l = 0; l < cfg.beta; ++l)
        out.entries.push_back({i + l, false, static_cast<std::size_t>(l)});
      break;
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const ScheduledFrame& a, const ScheduledFrame& b) { return a.slot < b.slot; });
  return out;
}

}  // namespace uavec::protocol
