#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "liver/common.hpp"

namespace liver {

struct VehicleClassSpec {
    SizeClass tag = SizeClass::S;
    double length_min_m = 0;
    double length_max_m = 0;
    double speed_min_mps = 0;
    double speed_max_mps = 0;
};

struct TrafficConfig {
    std::array<VehicleClassSpec, 3> classes{{
        {SizeClass::S, 2.5, 4.0, 8.0, 22.0},
        {SizeClass::M, 4.0, 6.0, 8.0, 20.0},
        {SizeClass::L, 8.0, 14.0, 6.0, 16.0},
    }};
    /// Minimum inter-arrival gap (shift of the exponential headway).
    double min_gap_s = 0.2;
    /// Width of the line-of-sight corridor a vehicle body has to clear.
    double corridor_width_m = 0.2;
    /// Speeds are capped so that no vehicle clears the corridor faster than
    /// this; 0 disables the cap.
    double min_contact_period_s = 0.25;
    int lanes = 2;
    double lane_width_m = 3.5;

    void validate() const;
};

struct Vehicle {
    std::uint32_t id = 0;
    SizeClass size = SizeClass::S;
    double speed_mps = 0;
    double length_m = 0;
    /// Front bumper reaches the line of sight.
    Micros arrival = 0;
    double lane_offset_m = 0;
};

/// Time a vehicle keeps the line of sight blocked: (length + corridor) / speed.
Micros contact_period(const Vehicle& v, double corridor_width_m);

/// Immutable, arrival-ordered vehicle log; the labelling oracle.
class GroundTruthLog {
public:
    GroundTruthLog() = default;
    GroundTruthLog(std::vector<Vehicle> vehicles, double mean_headway_s, double corridor_width_m);

    const std::vector<Vehicle>& vehicles() const { return vehicles_; }
    double mean_headway_s() const { return mean_headway_s_; }
    double corridor_width_m() const { return corridor_width_m_; }
    Micros contact(std::size_t i) const { return contact_[i]; }
    Micros max_contact() const { return max_contact_; }
    std::size_t size() const { return vehicles_.size(); }
    bool empty() const { return vehicles_.empty(); }

    /// Indices of vehicles whose occupancy interval overlaps [t0, t1) with positive length.
    std::vector<std::size_t> intersecting(Micros t0, Micros t1) const;

private:
    std::vector<Vehicle> vehicles_;
    std::vector<Micros> contact_;
    double mean_headway_s_ = 0;
    double corridor_width_m_ = 0.2;
    Micros max_contact_ = 0;
};

/// Shifted-exponential arrivals over [0, duration_s). class_mix is (S, M, L).
GroundTruthLog generate_traffic(double duration_s, double mean_headway_s, std::array<double, 3> class_mix, Rng& rng,
                                const TrafficConfig& config = {});

struct Occupant {
    std::uint32_t id = 0;
    SizeClass size = SizeClass::S;
    double overlap = 1.0;
};

/// Vehicles on the line of sight at time t (rectangular occupancy profile).
std::vector<Occupant> occupancy(const GroundTruthLog& log, Micros t);

enum class Label : std::uint8_t { N, S, M, L, SMix, MMix, LMix };
enum class LabelMode : std::uint8_t { FourClass, SevenClass };

std::string to_string(Label l);
Label parse_label(const std::string& s);
bool is_mix(Label l);
/// Mix labels collapse onto their dominant base class; base labels are unchanged.
Label base_of(Label l);

/// Four-class labelling found two or more vehicles in the window; such windows
/// have to be dropped from the cleaned data set.
class MixedWindowError : public Error {
public:
    using Error::Error;
};

struct Interval {
    Micros begin = 0;
    Micros end = 0;
};

Label label_window(const GroundTruthLog& log, Micros t0, Micros t1, LabelMode mode);

/// Same rule applied to the union of several measurement intervals: a vehicle
/// counts once if it overlaps any of them.
Label label_intervals(const GroundTruthLog& log, std::span<const Interval> intervals, LabelMode mode);

/// CSV columns: id,class,arrival_s,speed_mps,length_m
void write_ground_truth_csv(std::ostream& out, const GroundTruthLog& log);
GroundTruthLog read_ground_truth_csv(std::istream& in, double corridor_width_m, double mean_headway_s = 0);

} // namespace liver
