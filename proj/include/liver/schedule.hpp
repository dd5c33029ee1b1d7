#pragma once

#include <string>
#include <vector>

#include "liver/common.hpp"

namespace liver {

enum class Strategy : std::uint8_t { PG, MPG, DMPG };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& s);

/// Periodic timeline of one measurement point. All durations in microseconds.
///
/// Within every period of length gp the network-wide sync flood (duration
/// t_sc) runs first; after t_scdc_gap the local measurement instances follow,
/// each t_dc long and t_dc_gap apart. Under PG a single instance of length
/// t_dc is used.
struct PhaseSchedule {
    Micros gp = 500 * kMillis;
    Micros t_sc = 40 * kMillis;
    Micros t_sc_gap = 460 * kMillis;
    Micros t_dc = 20 * kMillis;
    Micros t_dc_gap = 80 * kMillis;
    Micros t_scdc_gap = 20 * kMillis;
    /// Measurement instances per period; <= 0 selects the largest count that fits.
    int ni = 0;
    Micros d_x = 60 * kMillis;
    Strategy strategy = Strategy::DMPG;
    int txp_sc = 31;
    int txp_dc = 23;
    Micros t_cp_min = 250 * kMillis;
    /// Lifts the operating-band checks on txp_sc / txp_dc.
    bool txp_override = false;

    /// Structural invariants (period arithmetic, positivity, power bands). Throws.
    void check() const;
    int default_ni() const;
    int effective_ni() const { return ni > 0 ? ni : default_ni(); }
};

struct Violation {
    std::string name;       ///< stable identifier
    std::string expression; ///< the inequality that should hold
    Micros lhs = 0;
    Micros rhs = 0;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    bool violates(const std::string& name) const;
    std::string to_text() const;
};

/// Checks the timing chain
///   2 t_sc + t_sc_gap > t_cp_min > 2 t_dc + t_dc_gap >= t_sc + t_scdc_gap
/// and the sync-to-measurement bound t_cp_min > t_sc + t_scdc_gap.
/// Every violated inequality is reported with both sides evaluated.
ValidationReport validate(const PhaseSchedule& schedule);

enum class PhaseTag : std::uint8_t { SC, DC, I };
std::string to_string(PhaseTag t);

struct PhaseWindow {
    PhaseTag phase = PhaseTag::SC;
    Micros start = 0;
    Micros duration = 0;
    int txp = 0;

    Micros end() const { return start + duration; }
};

/// Static timeline of period `period_index`. Throws if the schedule is invalid
/// (MPG/DMPG) or the instances overflow the period.
std::vector<PhaseWindow> build_timeline(const PhaseSchedule& schedule, std::int64_t period_index);

struct DmpgPlan {
    std::vector<Micros> starts;
    int dropped = 0;
};

/// Repacks `remaining` not-yet-started measurement instances after a
/// disturbance at trigger_time: the first starts at trigger_time + d_x and
/// consecutive ones are d_x apart. Instances that would cross the period end
/// are dropped and counted.
DmpgPlan reschedule_dmpg(const PhaseSchedule& schedule, int remaining, Micros trigger_time);

/// Longest stretch (including the wrap into the next period) during which no
/// measurement instance is active under the static timeline. A vehicle whose
/// contact period exceeds this value always meets an instance.
Micros max_uncovered_gap(const PhaseSchedule& schedule);

/// Same bound for DMPG when a compression is triggered right after the first
/// instance, which is the earliest and therefore worst case.
Micros max_uncovered_gap_dmpg(const PhaseSchedule& schedule);

} // namespace liver
