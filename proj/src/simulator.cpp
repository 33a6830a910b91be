#include "cola/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <queue>
#include <stdexcept>

#include "cola/rng.hpp"

namespace cola {

namespace {

enum class EventKind : std::uint8_t { Arrival, ServiceDone };

struct Event {
  double time;
  std::uint64_t seq;  // insertion order; total-orders simultaneous events
  EventKind kind;
  std::uint32_t request = 0;
  std::uint32_t service = 0;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct Request {
  double arrived_at;
  std::int32_t endpoint;
  std::int32_t hop;
};

struct ServiceState {
  int servers = 1;
  int busy = 0;
  std::deque<std::uint32_t> waiting;
  double busy_area = 0.0;  // busy-server time integral over the measured window
  double last_change = 0.0;
};

class NetworkSim {
 public:
  NetworkSim(const Workload& workload, const ClusterState& state,
             const AppTopology& topo, const SimConfig& cfg)
      : workload_(workload),
        topo_(topo),
        cfg_(cfg),
        arrival_rng_(mix_seed(cfg.seed, 0)),
        service_rng_(mix_seed(cfg.seed, 1)),
        warmup_(cfg.effective_warmup_s()),
        horizon_(cfg.effective_warmup_s() + cfg.duration_s) {
    services_.resize(topo.services.size());
    for (std::size_t i = 0; i < services_.size(); ++i)
      services_[i].servers = state.replicas[i];
    // Hop sequences resolved to service indices once.
    paths_.resize(topo.endpoints.size());
    for (std::size_t e = 0; e < topo.endpoints.size(); ++e) {
      for (const auto& name : topo.endpoints[e].path)
        paths_[e].push_back(topo.service_index(name));
    }
  }

  void run() {
    if (workload_.total_rps > 0.0) schedule_arrival(0.0);
    while (!events_.empty()) {
      Event ev = events_.top();
      if (ev.time > horizon_) break;
      events_.pop();
      now_ = ev.time;
      if (ev.kind == EventKind::Arrival) {
        handle_arrival();
      } else {
        handle_service_done(ev.request, ev.service);
      }
    }
    for (auto& s : services_) settle_area(s, horizon_);
  }

  SimReport report(double cost_units) {
    SimReport r;
    r.cost_units = cost_units;
    r.total_arrivals = total_arrivals_;
    r.completed_requests = completed_;
    r.timed_out_requests = timed_out_;
    r.in_flight_at_horizon = total_arrivals_ - completed_ - timed_out_;
    r.failures_per_s = window_failures_ / cfg_.duration_s;
    r.mean_utilization.resize(services_.size());
    for (std::size_t i = 0; i < services_.size(); ++i) {
      r.mean_utilization[i] =
          services_[i].busy_area / (cfg_.duration_s * services_[i].servers);
    }
    if (!samples_.empty()) {
      double sum = 0.0;
      for (double s : samples_) sum += s;
      r.mean_ms = sum / samples_.size();
      r.median_ms = percentile(samples_, 0.5);
      r.p90_ms = percentile(samples_, 0.9);
    }
    if (cfg_.noise_sd_ms > 0.0 && !samples_.empty()) {
      // One shared noise draw keeps median <= p90 intact.
      Rng noise(mix_seed(cfg_.seed, 2));
      double shift = noise.normal(0.0, cfg_.noise_sd_ms);
      auto jitter = [&](double v) {
        return std::clamp(v + shift, 0.0, cfg_.timeout_ms);
      };
      r.median_ms = jitter(r.median_ms);
      r.p90_ms = jitter(r.p90_ms);
      r.mean_ms = jitter(r.mean_ms);
    }
    return r;
  }

  std::vector<double> take_samples() { return std::move(samples_); }
  const std::vector<double>& samples() const { return samples_; }

 private:
  void push_event(double time, EventKind kind, std::uint32_t request = 0,
                  std::uint32_t service = 0) {
    events_.push(Event{time, next_seq_++, kind, request, service});
  }

  void schedule_arrival(double from) {
    double t = from + arrival_rng_.exponential(workload_.total_rps);
    if (t < horizon_) push_event(t, EventKind::Arrival);
  }

  void handle_arrival() {
    schedule_arrival(now_);
    ++total_arrivals_;
    std::uint32_t id = static_cast<std::uint32_t>(requests_.size());
    auto endpoint =
        static_cast<std::int32_t>(arrival_rng_.categorical(workload_.endpoint_probs));
    requests_.push_back(Request{now_, endpoint, 0});
    enter_service(id, paths_[endpoint][0]);
  }

  void enter_service(std::uint32_t id, std::uint32_t svc) {
    ServiceState& s = services_[svc];
    if (s.busy < s.servers) {
      settle_area(s, now_);
      ++s.busy;
      push_event(now_ + service_rng_.exponential(topo_.services[svc].mu),
                 EventKind::ServiceDone, id, svc);
    } else {
      s.waiting.push_back(id);
    }
  }

  void handle_service_done(std::uint32_t id, std::uint32_t svc) {
    ServiceState& s = services_[svc];
    if (s.waiting.empty()) {
      settle_area(s, now_);
      --s.busy;
    } else {
      // Server hands off to the next waiter; busy count is unchanged.
      std::uint32_t next = s.waiting.front();
      s.waiting.pop_front();
      push_event(now_ + service_rng_.exponential(topo_.services[svc].mu),
                 EventKind::ServiceDone, next, svc);
    }

    Request& req = requests_[id];
    ++req.hop;
    const auto& path = paths_[req.endpoint];
    if (req.hop < static_cast<std::int32_t>(path.size())) {
      enter_service(id, path[req.hop]);
      return;
    }
    finish_request(req);
  }

  void finish_request(const Request& req) {
    double latency_ms = (now_ - req.arrived_at) * 1000.0 +
                        topo_.endpoints[req.endpoint].base_delay_ms;
    bool timed_out = latency_ms > cfg_.timeout_ms;
    if (timed_out) {
      latency_ms = cfg_.timeout_ms;
      ++timed_out_;
    } else {
      ++completed_;
    }
    if (req.arrived_at >= warmup_) {
      samples_.push_back(latency_ms);
      if (timed_out) ++window_failures_;
    }
  }

  void settle_area(ServiceState& s, double t) {
    double lo = std::max(s.last_change, warmup_);
    double hi = std::min(t, horizon_);
    if (hi > lo) s.busy_area += s.busy * (hi - lo);
    s.last_change = t;
  }

  const Workload& workload_;
  const AppTopology& topo_;
  const SimConfig& cfg_;
  Rng arrival_rng_;
  Rng service_rng_;
  double warmup_;
  double horizon_;
  double now_ = 0.0;

  std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
  std::uint64_t next_seq_ = 0;
  std::vector<Request> requests_;
  std::vector<ServiceState> services_;
  std::vector<std::vector<std::uint32_t>> paths_;

  std::vector<double> samples_;
  std::uint64_t total_arrivals_ = 0;
  std::uint64_t completed_ = 0;
  std::uint64_t timed_out_ = 0;
  std::uint64_t window_failures_ = 0;
};

}  // namespace

SimReport simulate(const Workload& workload, const ClusterState& state,
                   const AppTopology& topo, const CostModel& cm,
                   const SimConfig& cfg, std::vector<double>* latency_sink) {
  validate_state(state, topo);
  validate_workload(workload, topo.endpoint_count());
  if (!(cfg.duration_s > 0.0))
    throw std::invalid_argument("SimConfig: duration_s must be > 0");
  if (!(cfg.timeout_ms > 0.0))
    throw std::invalid_argument("SimConfig: timeout_ms must be > 0");

  NetworkSim sim(workload, state, topo, cfg);
  sim.run();
  SimReport report = sim.report(cluster_cost(state, topo, cm));
  if (latency_sink) {
    auto samples = sim.take_samples();
    latency_sink->insert(latency_sink->end(), samples.begin(), samples.end());
  }
  return report;
}

std::vector<double> measure_utilization_delta(
    const Workload& workload, const ClusterState& state,
    const AppTopology& topo, const CostModel& cm, const SimConfig& cfg,
    const std::optional<Workload>& background) {
  Workload loaded =
      background ? combine_workloads(workload, *background) : workload;
  SimReport with = simulate(loaded, state, topo, cm, cfg);
  std::vector<double> delta = with.mean_utilization;
  if (background) {
    SimReport idle = simulate(*background, state, topo, cm, cfg);
    for (std::size_t i = 0; i < delta.size(); ++i)
      delta[i] -= idle.mean_utilization[i];
  }
  return delta;
}

double percentile(std::vector<double> samples, double q) {
  if (samples.empty())
    throw std::invalid_argument("percentile: empty sample set");
  if (q < 0.0 || q > 1.0)
    throw std::invalid_argument("percentile: q outside [0, 1]");
  std::sort(samples.begin(), samples.end());
  auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(samples.size())));
  rank = std::clamp<std::size_t>(rank, 1, samples.size());
  return samples[rank - 1];
}

void WindowAccumulator::add(const SimReport& report,
                            const std::vector<double>& window_samples,
                            double window_s) {
  samples.insert(samples.end(), window_samples.begin(), window_samples.end());
  total_time_s += window_s;
  failures += report.failures_per_s * window_s;
  completed += report.completed_requests;
  if (util_time_weighted.size() < report.mean_utilization.size())
    util_time_weighted.resize(report.mean_utilization.size(), 0.0);
  for (std::size_t i = 0; i < report.mean_utilization.size(); ++i)
    util_time_weighted[i] += report.mean_utilization[i] * window_s;
  cost_time_weighted += report.cost_units * window_s;
}

SimReport WindowAccumulator::finalize(double timeout_ms) const {
  SimReport r;
  if (!samples.empty()) {
    double sum = 0.0;
    for (double s : samples) sum += s;
    r.mean_ms = sum / samples.size();
    r.median_ms = percentile(samples, 0.5);
    r.p90_ms = percentile(samples, 0.9);
    r.median_ms = std::min(r.median_ms, timeout_ms);
    r.p90_ms = std::min(r.p90_ms, timeout_ms);
  }
  r.completed_requests = completed;
  if (total_time_s > 0.0) {
    r.failures_per_s = failures / total_time_s;
    r.cost_units = cost_time_weighted / total_time_s;
    r.mean_utilization.resize(util_time_weighted.size());
    for (std::size_t i = 0; i < util_time_weighted.size(); ++i)
      r.mean_utilization[i] = util_time_weighted[i] / total_time_s;
  }
  return r;
}

}  // namespace cola
