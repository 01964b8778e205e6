#pragma once

// Monte Carlo engine: plays out hovering sessions slot by slot and counts
// delivered messages.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "uavec/channel.hpp"
#include "uavec/fountain.hpp"
#include "uavec/protocol.hpp"
#include "uavec/random.hpp"
#include "uavec/scenario.hpp"

namespace uavec::sim {

struct RunOutcome {
  std::vector<int> delivered;          // per device
  std::vector<long> slot_frames;       // frames sent in each slot
  std::vector<long> slot_survived;     // of which captured
};

struct DeliveryReport {
  Scheme scheme = Scheme::Fountain;
  double mdp_estimate = 0.0;
  double half_width_95 = 0.0;
  long runs = 0;
  long long delivered = 0;
  long long total_messages = 0;
  // Empirical per-slot transmission success; NaN where no frame was sent.
  std::vector<double> per_slot_success;
  std::vector<long long> per_slot_frames;
};

namespace detail {

struct Device {
  double distance = 0;
  std::optional<int> wake;
  protocol::SlotSchedule schedule;
  std::size_t first_frame = 0;  // offset into the session frame list
};

}  // namespace detail

/// One hovering session for cfg.scheme.
inline RunOutcome run_once(const ScenarioConfig& cfg, std::uint64_t run_seed) {
  Rng rng(run_seed);
  const auto n = static_cast<std::size_t>(cfg.n);
  RunOutcome out;
  out.delivered.assign(n, 0);
  out.slot_frames.assign(static_cast<std::size_t>(cfg.n_s), 0);
  out.slot_survived.assign(static_cast<std::size_t>(cfg.n_s), 0);

  if (cfg.scheme == Scheme::TdmaBestCase) {
    std::bernoulli_distribution wake(cfg.p_b);
    for (auto& d : out.delivered) d = wake(rng) ? cfg.beta : 0;
    return out;
  }

  std::vector<detail::Device> devices(n);
  std::vector<channel::FrameTransmission> frames;
  for (std::size_t e = 0; e < n; ++e) {
    auto& dev = devices[e];
    dev.distance = channel::sample_distance(cfg.geometry, rng);
    dev.wake = channel::sample_wakeup_slot(cfg.p_b, cfg.n_s, rng);
    if (!dev.wake) continue;
    const auto block = cfg.payload_bytes > 0
                           ? fountain::SourceBlock::random(static_cast<std::size_t>(cfg.beta),
                                                           cfg.payload_bytes, rng)
                           : fountain::SourceBlock{0, std::vector<fountain::ByteRow>(
                                                          static_cast<std::size_t>(cfg.beta))};
    dev.schedule = protocol::plan_transmissions(cfg.scheme, *dev.wake, cfg, block, rng);
    dev.first_frame = frames.size();
    for (std::size_t j = 0; j < dev.schedule.entries.size(); ++j) {
      channel::FrameTransmission f;
      f.ed_id = e;
      f.slot = dev.schedule.entries[j].slot;
      f.band = channel::sample_band(cfg.n_f, rng);
      f.sf = channel::sample_sf(cfg.sf_set, rng);
      f.rx_power = channel::received_power(channel::sample_fading(cfg.fading, rng),
                                           dev.distance, cfg.geometry.path_loss_exp);
      f.frame_index = j;
      frames.push_back(f);
    }
  }

  // Group co-channel frames by (slot, band) and apply the capture rule.
  std::vector<std::size_t> order(frames.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(frames[a].slot, frames[a].band) < std::pair(frames[b].slot, frames[b].band);
  });
  std::vector<char> survived(frames.size(), 1);
  std::vector<channel::FrameTransmission> others;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && frames[order[hi]].slot == frames[order[lo]].slot &&
           frames[order[hi]].band == frames[order[lo]].band)
      ++hi;
    if (hi - lo > 1) {
      for (std::size_t a = lo; a < hi; ++a) {
        others.clear();
        for (std::size_t b = lo; b < hi; ++b)
          if (b != a) others.push_back(frames[order[b]]);
        survived[order[a]] = channel::capture_verdict(frames[order[a]], others, cfg.capture) ? 1 : 0;
      }
    }
    lo = hi;
  }
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto s = static_cast<std::size_t>(frames[k].slot);
    ++out.slot_frames[s];
    out.slot_survived[s] += survived[k];
  }

  std::vector<char> got;
  for (std::size_t e = 0; e < n; ++e) {
    const auto& dev = devices[e];
    if (!dev.wake) continue;
    const auto& sched = dev.schedule;
    if (sched.uses_coding()) {
      std::vector<fountain::CodedFrame> received;
      for (std::size_t j = 0; j < sched.entries.size(); ++j)
        if (survived[dev.first_frame + j]) received.push_back(sched.coded_frames[sched.entries[j].index]);
      if (fountain::decode(received, static_cast<std::size_t>(cfg.beta)).success)
        out.delivered[e] = cfg.beta;
    } else {
      got.assign(static_cast<std::size_t>(cfg.beta), 0);
      for (std::size_t j = 0; j < sched.entries.size(); ++j)
        if (survived[dev.first_frame + j]) got[sched.entries[j].index] = 1;
      out.delivered[e] = static_cast<int>(std::count(got.begin(), got.end(), 1));
    }
  }
  return out;
}

/// Aggregates cfg.runs sessions. Replication r uses derive_seed(cfg.seed, r),
/// and the reduction runs in index order, so results do not depend on the
/// thread count.
inline DeliveryReport run_many(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.q != 256) throw std::invalid_argument("run_many: the simulator codes over GF(256) only");
  const auto runs = static_cast<std::size_t>(cfg.runs);
  const auto n_s = static_cast<std::size_t>(cfg.n_s);

  std::vector<long> per_run(runs);
  std::vector<std::vector<long>> slot_frames, slot_survived;
  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, runs));
  slot_frames.assign(workers, std::vector<long>(n_s, 0));
  slot_survived.assign(workers, std::vector<long>(n_s, 0));

  auto work = [&](unsigned w) {
    for (std::size_t r = w; r < runs; r += workers) {
      const auto o = run_once(cfg, derive_seed(cfg.seed, r));
      long sum = 0;
      for (int d : o.delivered) sum += d;
      per_run[r] = sum;
      for (std::size_t s = 0; s < n_s; ++s) {
        slot_frames[w][s] += o.slot_frames[s];
        slot_survived[w][s] += o.slot_survived[s];
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  DeliveryReport rep;
  rep.scheme = cfg.scheme;
  rep.runs = cfg.runs;
  const double per_run_total = static_cast<double>(cfg.n) * cfg.beta;
  rep.total_messages = static_cast<long long>(cfg.runs) * cfg.n * cfg.beta;
  double mean = 0.0;
  for (long d : per_run) {
    rep.delivered += d;
    mean += static_cast<double>(d) / per_run_total;
  }
  mean /= static_cast<double>(runs);
  double ss = 0.0;
  for (long d : per_run) {
    const double x = static_cast<double>(d) / per_run_total - mean;
    ss += x * x;
  }
  rep.mdp_estimate = static_cast<double>(rep.delivered) / static_cast<double>(rep.total_messages);
  rep.half_width_95 = runs > 1 ? 1.96 * std::sqrt(ss / static_cast<double>(runs - 1) / static_cast<double>(runs)) : 0.0;

  rep.per_slot_frames.assign(n_s, 0);
  rep.per_slot_success.assign(n_s, std::nan(""));
  for (std::size_t s = 0; s < n_s; ++s) {
    long long f = 0, ok = 0;
    for (unsigned w = 0; w < workers; ++w) {
      f += slot_frames[w][s];
      ok += slot_survived[w][s];
    }
    rep.per_slot_frames[s] = f;
    if (f > 0) rep.per_slot_success[s] = static_cast<double>(ok) / static_cast<double>(f);
  }
  return rep;
}

}  // namespace uavec::sim
