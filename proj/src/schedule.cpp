#include "liver/schedule.hpp"

#include <algorithm>
#include <sstream>

namespace liver {

std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::PG: return "pg";
    case Strategy::MPG: return "mpg";
    case Strategy::DMPG: return "dmpg";
    }
    return "?";
}

Strategy parse_strategy(const std::string& s) {
    if (s == "pg" || s == "PG") return Strategy::PG;
    if (s == "mpg" || s == "MPG") return Strategy::MPG;
    if (s == "dmpg" || s == "DMPG") return Strategy::DMPG;
    throw Error("unknown strategy '" + s + "' (expected pg, mpg or dmpg)");
}

std::string to_string(PhaseTag t) {
    switch (t) {
    case PhaseTag::SC: return "SC";
    case PhaseTag::DC: return "DC";
    case PhaseTag::I: return "I";
    }
    return "?";
}

void PhaseSchedule::check() const {
    if (gp <= 0 || t_sc <= 0 || t_sc_gap <= 0 || t_dc <= 0 || t_dc_gap <= 0 || t_scdc_gap <= 0 || d_x <= 0 ||
        t_cp_min <= 0)
        throw Error("all schedule durations must be > 0");
    if (gp != t_sc + t_sc_gap)
        throw Error("gp (" + std::to_string(gp) + ") must equal t_sc + t_sc_gap (" + std::to_string(t_sc + t_sc_gap) + ")");
    if (d_x >= t_dc_gap) throw Error("d_x must be shorter than t_dc_gap");
    if (!txp_override) {
        if (txp_sc < 25 || txp_sc > 31) throw Error("txp_sc must lie in [25, 31] (set txp_override to lift)");
        if (txp_dc < 11 || txp_dc > 25) throw Error("txp_dc must lie in [11, 25] (set txp_override to lift)");
    } else if (txp_sc < 0 || txp_sc > 31 || txp_dc < 0 || txp_dc > 31) {
        throw Error("power indices must lie in [0, 31]");
    }
}

int PhaseSchedule::default_ni() const {
    const Micros room = gp - t_sc - t_scdc_gap;
    if (room <= 0) return 0;
    return static_cast<int>(room / (t_dc + t_dc_gap));
}

bool ValidationReport::violates(const std::string& name) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.name == name; });
}

std::string ValidationReport::to_text() const {
    if (ok()) return "ok\n";
    std::ostringstream out;
    for (const auto& v : violations)
        out << "violated " << v.name << ": " << v.expression << " (" << v.lhs << " us vs " << v.rhs << " us)\n";
    return out.str();
}

ValidationReport validate(const PhaseSchedule& s) {
    ValidationReport report;
    auto strict = [&](const char* name, const char* expr, Micros lhs, Micros rhs) {
        if (!(lhs > rhs)) report.violations.push_back({name, expr, lhs, rhs});
    };
    auto weak = [&](const char* name, const char* expr, Micros lhs, Micros rhs) {
        if (!(lhs >= rhs)) report.violations.push_back({name, expr, lhs, rhs});
    };
    strict("sc_period_exceeds_contact", "2*t_sc + t_sc_gap > t_cp_min", 2 * s.t_sc + s.t_sc_gap, s.t_cp_min);
    strict("contact_exceeds_dc_split", "t_cp_min > 2*t_dc + t_dc_gap", s.t_cp_min, 2 * s.t_dc + s.t_dc_gap);
    weak("dc_split_covers_sc_gap", "2*t_dc + t_dc_gap >= t_sc + t_scdc_gap", 2 * s.t_dc + s.t_dc_gap,
         s.t_sc + s.t_scdc_gap);
    strict("contact_exceeds_sc_gap", "t_cp_min > t_sc + t_scdc_gap", s.t_cp_min, s.t_sc + s.t_scdc_gap);
    return report;
}

std::vector<PhaseWindow> build_timeline(const PhaseSchedule& s, std::int64_t period_index) {
    s.check();
    const Micros base = period_index * s.gp;
    const Micros first_dc = s.t_sc + s.t_scdc_gap;
    std::vector<PhaseWindow> out;
    out.push_back({PhaseTag::SC, base, s.t_sc, s.txp_sc});

    if (s.strategy == Strategy::PG) {
        if (first_dc + s.t_dc > s.gp)
            throw Error("measurement window overflows the period by " + std::to_string(first_dc + s.t_dc - s.gp) + " us");
        out.push_back({PhaseTag::DC, base + first_dc, s.t_dc, s.txp_dc});
        return out;
    }

    if (auto report = validate(s); !report.ok()) throw Error("schedule violates timing constraints:\n" + report.to_text());
    const int ni = s.effective_ni();
    if (ni < 1) throw Error("no measurement instance fits in the period");
    const Micros last_end = first_dc + static_cast<Micros>(ni - 1) * (s.t_dc + s.t_dc_gap) + s.t_dc;
    if (last_end > s.gp)
        throw Error(std::to_string(ni) + " instances overflow the period by " + std::to_string(last_end - s.gp) + " us");
    for (int i = 0; i < ni; ++i)
        out.push_back({PhaseTag::DC, base + first_dc + static_cast<Micros>(i) * (s.t_dc + s.t_dc_gap), s.t_dc, s.txp_dc});
    return out;
}

DmpgPlan reschedule_dmpg(const PhaseSchedule& s, int remaining, Micros trigger_time) {
    DmpgPlan plan;
    if (remaining <= 0) return plan;
    const Micros period_end = (trigger_time / s.gp + 1) * s.gp;
    Micros start = trigger_time + s.d_x;
    for (int i = 0; i < remaining; ++i) {
        if (start + s.t_dc > period_end) {
            plan.dropped = remaining - i;
            break;
        }
        plan.starts.push_back(start);
        start += s.t_dc + s.d_x;
    }
    return plan;
}

namespace {

Micros longest_gap(const std::vector<PhaseWindow>& dc, Micros gp) {
    Micros worst = 0;
    for (std::size_t i = 1; i < dc.size(); ++i) worst = std::max(worst, dc[i].start - dc[i - 1].end());
    return std::max(worst, dc.front().start + gp - dc.back().end());
}

std::vector<PhaseWindow> dc_windows(const PhaseSchedule& s) {
    auto w = build_timeline(s, 0);
    w.erase(w.begin());
    return w;
}

} // namespace

Micros max_uncovered_gap(const PhaseSchedule& s) { return longest_gap(dc_windows(s), s.gp); }

Micros max_uncovered_gap_dmpg(const PhaseSchedule& s) {
    auto dc = dc_windows(s);
    if (s.strategy == Strategy::PG || dc.size() < 2) return longest_gap(dc, s.gp);
    const auto plan = reschedule_dmpg(s, static_cast<int>(dc.size()) - 1, dc.front().end());
    dc.resize(1);
    for (Micros st : plan.starts) dc.push_back({PhaseTag::DC, st, s.t_dc, s.txp_dc});
    return longest_gap(dc, s.gp);
}

} // namespace liver
