#include "schedpred/lifecycle.hpp"

namespace schedpred {

std::string_view to_string(LifecycleState state) {
  switch (state) {
    case LifecycleState::Unsubmitted: return "Unsubmitted";
    case LifecycleState::Pending: return "Pending";
    case LifecycleState::Running: return "Running";
    case LifecycleState::Dead: return "Dead";
  }
  return "?";
}

std::string_view to_string(EventType event) {
  switch (event) {
    case EventType::Submit: return "Submit";
    case EventType::Schedule: return "Schedule";
    case EventType::Evict: return "Evict";
    case EventType::Fail: return "Fail";
    case EventType::Finish: return "Finish";
    case EventType::Kill: return "Kill";
    case EventType::Lost: return "Lost";
    case EventType::UpdatePending: return "UpdatePending";
    case EventType::UpdateRunning: return "UpdateRunning";
  }
  return "?";
}

std::string_view to_string(FinalStatus status) {
  switch (status) {
    case FinalStatus::Finished: return "Finished";
    case FinalStatus::Failed: return "Failed";
    case FinalStatus::Killed: return "Killed";
    case FinalStatus::Evicted: return "Evicted";
    case FinalStatus::Lost: return "Lost";
    case FinalStatus::Unscheduled: return "Unscheduled";
  }
  return "?";
}

std::optional<EventType> event_type_from_code(long code) {
  if (code < 0 || code >= static_cast<long>(kNumEventTypes)) return std::nullopt;
  return static_cast<EventType>(code);
}

std::optional<FinalStatus> final_status_from_string(std::string_view name) {
  for (FinalStatus s : kAllFinalStatuses) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

FinalStatus status_of_terminal(EventType event) {
  switch (event) {
    case EventType::Finish: return FinalStatus::Finished;
    case EventType::Fail: return FinalStatus::Failed;
    case EventType::Kill: return FinalStatus::Killed;
    case EventType::Evict: return FinalStatus::Evicted;
    default: return FinalStatus::Lost;
  }
}

namespace {

std::string describe(LifecycleState state, EventType event, std::optional<std::size_t> index) {
  std::string msg = "invalid transition: ";
  msg += to_string(event);
  msg += " in state ";
  msg += to_string(state);
  if (index) msg += " at event " + std::to_string(*index);
  return msg;
}

}  // namespace

InvalidTransition::InvalidTransition(LifecycleState state, EventType event,
                                     std::optional<std::size_t> index)
    : Error(describe(state, event, index)), state_(state), event_(event), index_(index) {}

std::optional<LifecycleState> try_apply_event(LifecycleState state, EventType event) {
  switch (state) {
    case LifecycleState::Unsubmitted:
      if (event == EventType::Submit) return LifecycleState::Pending;
      break;
    case LifecycleState::Pending:
      switch (event) {
        case EventType::Schedule: return LifecycleState::Running;
        case EventType::Fail:
        case EventType::Kill:
        case EventType::Lost: return LifecycleState::Dead;
        case EventType::UpdatePending: return LifecycleState::Pending;
        default: break;
      }
      break;
    case LifecycleState::Running:
      switch (event) {
        case EventType::Evict:
        case EventType::Fail:
        case EventType::Finish:
        case EventType::Kill:
        case EventType::Lost: return LifecycleState::Dead;
        case EventType::UpdateRunning: return LifecycleState::Running;
        default: break;
      }
      break;
    case LifecycleState::Dead:
      if (event == EventType::Submit) return LifecycleState::Pending;
      break;
  }
  return std::nullopt;
}

LifecycleState apply_event(LifecycleState state, EventType event) {
  if (auto next = try_apply_event(state, event)) return *next;
  throw InvalidTransition(state, event);
}

ReplayResult replay(std::span<const EventType> events) {
  if (events.empty()) throw EmptyInput("replay: empty event history");
  ReplayResult result;
  bool submitted = false;
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto next = try_apply_event(result.final_state, events[i]);
    if (!next) throw InvalidTransition(result.final_state, events[i], i);
    if (events[i] == EventType::Submit) {
      if (submitted) ++result.resubmissions;
      submitted = true;
    }
    result.final_state = *next;
  }
  return result;
}

FinalStatus classify_final_status(std::span<const EventType> events) {
  if (events.empty()) return FinalStatus::Lost;

  LifecycleState state = LifecycleState::Unsubmitted;
  bool ever_ran = false;
  std::optional<EventType> last_terminal;
  for (EventType e : events) {
    auto next = try_apply_event(state, e);
    if (!next) return FinalStatus::Lost;
    if (e == EventType::Schedule) ever_ran = true;
    if (is_terminal(e)) last_terminal = e;
    state = *next;
  }

  switch (state) {
    case LifecycleState::Dead:
      return status_of_terminal(*last_terminal);
    case LifecycleState::Pending:
      // Waiting at the end of the trace: either never placed at all, or
      // resubmitted after an earlier attempt whose outcome stands.
      if (!ever_ran || !last_terminal) return FinalStatus::Unscheduled;
      return status_of_terminal(*last_terminal);
    case LifecycleState::Running:
    case LifecycleState::Unsubmitted:
      break;
  }
  return FinalStatus::Lost;
}

FinalStatus classify_final_status(std::span<const EventType> events, bool last_missing_info) {
  if (last_missing_info) return FinalStatus::Lost;
  return classify_final_status(events);
}

FinalStatus rollup_job_status(const StatusCounts& counts) {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  const auto n = [&](FinalStatus s) { return counts[index_of(s)]; };
  if (total == n(FinalStatus::Unscheduled)) return FinalStatus::Unscheduled;
  if (n(FinalStatus::Finished) > 0 && n(FinalStatus::Failed) == 0 && n(FinalStatus::Killed) == 0) {
    return FinalStatus::Finished;
  }
  if (n(FinalStatus::Killed) > 0 && n(FinalStatus::Failed) == 0 && n(FinalStatus::Finished) == 0) {
    return FinalStatus::Killed;
  }
  return FinalStatus::Failed;
}

}  // namespace schedpred
