#pragma once

// Task/job scheduling lifecycle: the four-state machine driven by the nine
// trace event types, and the final-status classification shared by every
// other module.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "schedpred/errors.hpp"

namespace schedpred {

enum class LifecycleState : std::uint8_t { Unsubmitted, Pending, Running, Dead };

/// Numeric values match the event codes of the trace files.
enum class EventType : std::uint8_t {
  Submit = 0,
  Schedule = 1,
  Evict = 2,
  Fail = 3,
  Finish = 4,
  Kill = 5,
  Lost = 6,
  UpdatePending = 7,
  UpdateRunning = 8,
};

enum class FinalStatus : std::uint8_t { Finished, Failed, Killed, Evicted, Lost, Unscheduled };

inline constexpr std::size_t kNumEventTypes = 9;
inline constexpr std::size_t kNumFinalStatuses = 6;

inline constexpr std::array<LifecycleState, 4> kAllLifecycleStates = {
    LifecycleState::Unsubmitted, LifecycleState::Pending, LifecycleState::Running,
    LifecycleState::Dead};

inline constexpr std::array<EventType, kNumEventTypes> kAllEventTypes = {
    EventType::Submit, EventType::Schedule,      EventType::Evict,
    EventType::Fail,   EventType::Finish,        EventType::Kill,
    EventType::Lost,   EventType::UpdatePending, EventType::UpdateRunning};

inline constexpr std::array<FinalStatus, kNumFinalStatuses> kAllFinalStatuses = {
    FinalStatus::Finished, FinalStatus::Failed, FinalStatus::Killed,
    FinalStatus::Evicted,  FinalStatus::Lost,   FinalStatus::Unscheduled};

std::string_view to_string(LifecycleState state);
std::string_view to_string(EventType event);
std::string_view to_string(FinalStatus status);

std::optional<EventType> event_type_from_code(long code);
std::optional<FinalStatus> final_status_from_string(std::string_view name);

constexpr std::size_t index_of(FinalStatus status) { return static_cast<std::size_t>(status); }

/// Evict, Fail, Finish, Kill and Lost end an attempt.
constexpr bool is_terminal(EventType event) {
  switch (event) {
    case EventType::Evict:
    case EventType::Fail:
    case EventType::Finish:
    case EventType::Kill:
    case EventType::Lost:
      return true;
    default:
      return false;
  }
}

/// Status recorded when an attempt ends with a terminal event.
FinalStatus status_of_terminal(EventType event);

class InvalidTransition : public Error {
 public:
  InvalidTransition(LifecycleState state, EventType event,
                    std::optional<std::size_t> index = std::nullopt);

  LifecycleState state() const { return state_; }
  EventType event() const { return event_; }
  /// Position of the offending event when raised by replay().
  std::optional<std::size_t> index() const { return index_; }

 private:
  LifecycleState state_;
  EventType event_;
  std::optional<std::size_t> index_;
};

/// Successor state, or nullopt when the pair is not in the transition table.
std::optional<LifecycleState> try_apply_event(LifecycleState state, EventType event);

/// Successor state; throws InvalidTransition for pairs outside the table.
LifecycleState apply_event(LifecycleState state, EventType event);

struct ReplayResult {
  LifecycleState final_state = LifecycleState::Unsubmitted;
  std::size_t resubmissions = 0;
};

/// Folds apply_event over a time-ordered history starting from Unsubmitted.
/// Throws EmptyInput for an empty history and InvalidTransition (carrying the
/// index of the offending event) for an illegal one.
ReplayResult replay(std::span<const EventType> events);

/// Final status of a time-ordered history. Total: empty, malformed or
/// truncated-while-running histories classify as Lost.
FinalStatus classify_final_status(std::span<const EventType> events);

/// As above; a history whose last record carries the trace's missing-info
/// flag is classified Lost.
FinalStatus classify_final_status(std::span<const EventType> events, bool last_missing_info);

using StatusCounts = std::array<std::size_t, kNumFinalStatuses>;

/// Job outcome from the final statuses of its tasks: Finished iff at least one
/// task finished and none failed or was killed; Unscheduled when no task was
/// ever placed; Killed when kills are the only hard failures and nothing
/// finished; Failed otherwise.
FinalStatus rollup_job_status(const StatusCounts& task_counts);

}  // namespace schedpred
