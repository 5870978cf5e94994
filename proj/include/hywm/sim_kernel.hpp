#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hywm/detail/format.hpp"
#include "hywm/errors.hpp"
#include "hywm/resource_manager.hpp"
#include "hywm/workflow_model.hpp"

// Deterministic discrete-event simulation of task execution and data
// transfer. Each resource runs one task at a time.
namespace hywm {

/// Share of the system load that throttles a resource; a fully loaded
/// resource still delivers 10% of its rate.
inline constexpr double kLoadThrottle = 0.9;

/// Seconds to run `task` on `res` when it starts at `t`. The system metric
/// is frozen at the start instant.
inline double exec_time(const TaskSpec& task, const ResourceDescriptor& res, double t) {
  return task.work / (res.cpu_rate * (1.0 - metric_at(res.sys_trace, t) * kLoadThrottle));
}

/// Seconds to move `bytes` between resources; free within a site.
inline double transfer_time(std::uint64_t bytes, const ResourceDescriptor& src, const ResourceDescriptor& dst) {
  if (src.site == dst.site) return 0.0;
  return static_cast<double>(bytes) / std::min(src.bandwidth, dst.bandwidth) + std::max(src.latency, dst.latency);
}

/// Monotone simulation clock; only event processing advances it.
class SimClock {
 public:
  explicit SimClock(double start = 0.0) : now_(start) {}
  double now() const noexcept { return now_; }

  void advance_to(double t) {
    if (t < now_) throw Error("SimClock cannot move backwards");
    now_ = t;
  }

 private:
  double now_;
};

enum class EventKind { TaskReady, InputArrived, TaskFinished };

struct Event {
  double time = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::TaskReady;
  std::size_t task = 0;
};

/// Min-queue on (time, sequence); sequence numbers are handed out on push.
class EventQueue {
 public:
  void push(double time, EventKind kind, std::size_t task) { heap_.push(Event{time, next_seq_++, kind, task}); }

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  const Event& top() const { return heap_.top(); }

  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
  }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.sequence > b.sequence;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

/// Input of one simulated task. Task indices double as dispatch priority:
/// callers list tasks in topological order.
struct SimTask {
  struct Dependency {
    std::size_t producer;  // task index
    std::uint64_t bytes;
  };
  struct StagedInput {
    std::size_t source;  // resource index holding the file
    std::uint64_t bytes;
  };

  TaskSpec spec;
  std::size_t resource = 0;  // index into the pool
  std::vector<Dependency> deps;
  std::vector<StagedInput> staged;
};

struct SimProblem {
  std::span<const ResourceDescriptor> pool;
  std::vector<SimTask> tasks;
  double t0 = 0.0;
};

struct ResourceState {
  std::string resource_id;
  double busy_until = 0.0;
  std::vector<std::size_t> executed;  // task indices in start order
};

struct TaskRecord {
  std::string task;
  std::string resource;
  double start = 0.0;
  double end = 0.0;
  bool operator==(const TaskRecord&) const = default;
};

/// One record per task, in task-index order.
using EventLog = std::vector<TaskRecord>;

inline double makespan_of(const EventLog& log, double t0) {
  double end = t0;
  for (const auto& r : log) end = std::max(end, r.end);
  return end - t0;
}

inline std::string event_log_csv(const EventLog& log) {
  std::ostringstream out;
  out << "task,resource,start,end\n";
  for (const auto& r : log)
    out << r.task << ',' << r.resource << ',' << detail::fixed6(r.start) << ',' << detail::fixed6(r.end) << '\n';
  return out.str();
}

inline std::vector<ResourceState> initial_states(const SimProblem& problem) {
  std::vector<ResourceState> states;
  for (const auto& r : problem.pool) states.push_back({r.id, problem.t0, {}});
  return states;
}

/// Pushes the initial events: tasks with no inputs are ready at t0, staged
/// input files start moving at t0.
inline void seed_initial_events(EventQueue& queue, const SimProblem& problem) {
  for (std::size_t i = 0; i < problem.tasks.size(); ++i) {
    const auto& task = problem.tasks[i];
    if (task.deps.empty() && task.staged.empty()) queue.push(problem.t0, EventKind::TaskReady, i);
    for (const auto& in : task.staged) {
      const double tt = transfer_time(in.bytes, problem.pool[in.source], problem.pool[task.resource]);
      queue.push(problem.t0 + tt, EventKind::InputArrived, i);
    }
  }
}

/// Processes events in (time, sequence) order until the queue drains. All
/// events sharing one instant are applied before any idle resource picks
/// its next task; a resource picks the waiting task that became ready first,
/// lower task index on ties.
inline EventLog run_to_completion(EventQueue& queue, std::vector<ResourceState>& states, const SimProblem& problem) {
  const auto n = problem.tasks.size();
  std::vector<std::size_t> pending(n);
  std::vector<std::vector<std::pair<std::size_t, std::uint64_t>>> consumers(n);
  for (std::size_t i = 0; i < n; ++i) {
    pending[i] = problem.tasks[i].deps.size() + problem.tasks[i].staged.size();
    for (const auto& d : problem.tasks[i].deps) consumers[d.producer].push_back({i, d.bytes});
  }

  std::vector<std::optional<double>> ready_at(n);
  std::vector<bool> started(n, false), finished(n, false);
  std::vector<bool> busy(states.size(), false);
  EventLog log(n);
  for (std::size_t i = 0; i < n; ++i)
    log[i] = {problem.tasks[i].spec.id, problem.pool[problem.tasks[i].resource].id, 0.0, 0.0};

  SimClock clock(problem.t0);
  auto mark_ready = [&](std::size_t task) { ready_at[task] = clock.now(); };

  while (!queue.empty()) {
    const double now = queue.top().time;
    clock.advance_to(now);
    while (!queue.empty() && queue.top().time == now) {
      const Event e = queue.pop();
      switch (e.kind) {
        case EventKind::TaskReady:
          mark_ready(e.task);
          break;
        case EventKind::InputArrived:
          if (--pending[e.task] == 0) mark_ready(e.task);
          break;
        case EventKind::TaskFinished: {
          const auto& task = problem.tasks[e.task];
          finished[e.task] = true;
          busy[task.resource] = false;
          for (const auto& [consumer, bytes] : consumers[e.task]) {
            const auto dst = problem.tasks[consumer].resource;
            queue.push(now + transfer_time(bytes, problem.pool[task.resource], problem.pool[dst]),
                       EventKind::InputArrived, consumer);
          }
          break;
        }
      }
    }

    for (std::size_t r = 0; r < states.size(); ++r) {
      if (busy[r]) continue;
      std::optional<std::size_t> pick;
      for (std::size_t i = 0; i < n; ++i) {
        if (started[i] || !ready_at[i] || problem.tasks[i].resource != r) continue;
        if (!pick || *ready_at[i] < *ready_at[*pick]) pick = i;
      }
      if (!pick) continue;
      const auto i = *pick;
      const auto& res = problem.pool[r];
      const double end = now + exec_time(problem.tasks[i].spec, res, now);
      started[i] = true;
      busy[r] = true;
      states[r].busy_until = end;
      states[r].executed.push_back(i);
      log[i].start = now;
      log[i].end = end;
      queue.push(end, EventKind::TaskFinished, i);
    }
  }

  const auto unfinished = static_cast<std::size_t>(std::count(finished.begin(), finished.end(), false));
  if (unfinished > 0) throw StuckSimulation(unfinished);
  return log;
}

/// Convenience wrapper: fresh queue and resource states for `problem`.
inline EventLog simulate(const SimProblem& problem) {
  EventQueue queue;
  auto states = initial_states(problem);
  seed_initial_events(queue, problem);
  return run_to_completion(queue, states, problem);
}

}  // namespace hywm
