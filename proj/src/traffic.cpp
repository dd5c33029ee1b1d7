#include "liver/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "liver/csv.hpp"

namespace liver {

void TrafficConfig::validate() const {
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto& c = classes[i];
        if (c.tag != static_cast<SizeClass>(i)) throw Error("traffic classes must be listed in S, M, L order");
        if (!(c.length_min_m > 0 && c.length_max_m >= c.length_min_m)) throw Error("invalid length range for class " + to_string(c.tag));
        if (!(c.speed_min_mps > 0 && c.speed_max_mps >= c.speed_min_mps)) throw Error("invalid speed range for class " + to_string(c.tag));
    }
    auto mid = [](const VehicleClassSpec& c) { return 0.5 * (c.length_min_m + c.length_max_m); };
    if (!(mid(classes[0]) < mid(classes[1]) && mid(classes[1]) < mid(classes[2])))
        throw Error("class length ranges must be ordered S < M < L by midpoint");
    if (min_gap_s < 0) throw Error("min_gap_s must be >= 0");
    if (corridor_width_m < 0) throw Error("corridor_width_m must be >= 0");
    if (min_contact_period_s < 0) throw Error("min_contact_period_s must be >= 0");
    if (lanes < 1 || lane_width_m <= 0) throw Error("lane geometry must be positive");
}

Micros contact_period(const Vehicle& v, double corridor_width_m) {
    if (!(v.speed_mps > 0)) throw Error("vehicle speed must be > 0");
    if (corridor_width_m < 0) throw Error("corridor width must be >= 0");
    return from_seconds((v.length_m + corridor_width_m) / v.speed_mps);
}

GroundTruthLog::GroundTruthLog(std::vector<Vehicle> vehicles, double mean_headway_s, double corridor_width_m)
    : vehicles_(std::move(vehicles)), mean_headway_s_(mean_headway_s), corridor_width_m_(corridor_width_m) {
    contact_.reserve(vehicles_.size());
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
        const auto& v = vehicles_[i];
        if (!(v.length_m > 0)) throw Error("vehicle " + std::to_string(v.id) + ": length must be > 0");
        if (i > 0 && v.arrival < vehicles_[i - 1].arrival) throw Error("ground truth arrivals must be non-decreasing");
        contact_.push_back(contact_period(v, corridor_width_m_));
        max_contact_ = std::max(max_contact_, contact_.back());
    }
}

std::vector<std::size_t> GroundTruthLog::intersecting(Micros t0, Micros t1) const {
    std::vector<std::size_t> out;
    // Candidates arrive before t1 and no earlier than t0 - max_contact.
    auto first = std::lower_bound(vehicles_.begin(), vehicles_.end(), t0 - max_contact_,
                                  [](const Vehicle& v, Micros t) { return v.arrival < t; });
    for (auto it = first; it != vehicles_.end() && it->arrival < t1; ++it) {
        const auto i = static_cast<std::size_t>(it - vehicles_.begin());
        if (it->arrival + contact_[i] > t0) out.push_back(i);
    }
    return out;
}

GroundTruthLog generate_traffic(double duration_s, double mean_headway_s, std::array<double, 3> class_mix, Rng& rng,
                                const TrafficConfig& config) {
    config.validate();
    if (!(mean_headway_s > 0)) throw Error("mean_headway must be > 0");
    if (!(duration_s >= 0)) throw Error("duration must be >= 0");
    double total = 0;
    for (double p : class_mix) {
        if (p < 0) throw Error("class_mix entries must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("class_mix must sum to 1 (got " + csv::format(total) + ")");

    // Keep the gap strictly positive even for headways at or below the shift.
    const double shift = std::min(config.min_gap_s, 0.5 * mean_headway_s);
    std::exponential_distribution<double> excess(1.0 / (mean_headway_s - shift));
    std::discrete_distribution<int> pick_class(class_mix.begin(), class_mix.end());

    std::vector<Vehicle> vehicles;
    double t = 0;
    std::uint32_t id = 0;
    while (true) {
        t += shift + excess(rng);
        if (t >= duration_s) break;
        Vehicle v;
        v.id = id++;
        v.size = static_cast<SizeClass>(pick_class(rng));
        const auto& spec = config.classes[static_cast<std::size_t>(v.size)];
        v.length_m = std::uniform_real_distribution<double>(spec.length_min_m, spec.length_max_m)(rng);
        v.speed_mps = std::uniform_real_distribution<double>(spec.speed_min_mps, spec.speed_max_mps)(rng);
        if (config.min_contact_period_s > 0)
            v.speed_mps = std::min(v.speed_mps, (v.length_m + config.corridor_width_m) / config.min_contact_period_s);
        v.lane_offset_m = config.lane_width_m * std::uniform_int_distribution<int>(0, config.lanes - 1)(rng);
        v.arrival = from_seconds(t);
        vehicles.push_back(v);
    }
    return GroundTruthLog(std::move(vehicles), mean_headway_s, config.corridor_width_m);
}

std::vector<Occupant> occupancy(const GroundTruthLog& log, Micros t) {
    std::vector<Occupant> out;
    for (std::size_t i : log.intersecting(t, t + 1)) {
        const auto& v = log.vehicles()[i];
        out.push_back(Occupant{v.id, v.size, 1.0});
    }
    return out;
}

std::string to_string(Label l) {
    switch (l) {
    case Label::N: return "N";
    case Label::S: return "S";
    case Label::M: return "M";
    case Label::L: return "L";
    case Label::SMix: return "S-mix";
    case Label::MMix: return "M-mix";
    case Label::LMix: return "L-mix";
    }
    return "?";
}

Label parse_label(const std::string& s) {
    for (Label l : {Label::N, Label::S, Label::M, Label::L, Label::SMix, Label::MMix, Label::LMix})
        if (to_string(l) == s) return l;
    throw Error("unknown label '" + s + "'");
}

bool is_mix(Label l) { return l == Label::SMix || l == Label::MMix || l == Label::LMix; }

Label base_of(Label l) {
    switch (l) {
    case Label::SMix: return Label::S;
    case Label::MMix: return Label::M;
    case Label::LMix: return Label::L;
    default: return l;
    }
}

namespace {

Label classify(const GroundTruthLog& log, const std::vector<std::size_t>& present, LabelMode mode) {
    if (present.empty()) return Label::N;
    if (present.size() == 1) {
        switch (log.vehicles()[present.front()].size) {
        case SizeClass::S: return Label::S;
        case SizeClass::M: return Label::M;
        case SizeClass::L: return Label::L;
        }
    }
    if (mode == LabelMode::FourClass)
        throw MixedWindowError("window overlaps " + std::to_string(present.size()) + " vehicles; drop it from cleaned data");
    SizeClass largest = SizeClass::S;
    for (std::size_t i : present) largest = std::max(largest, log.vehicles()[i].size);
    switch (largest) {
    case SizeClass::L: return Label::LMix;
    case SizeClass::M: return Label::MMix;
    case SizeClass::S: return Label::SMix;
    }
    return Label::N;
}

} // namespace

Label label_window(const GroundTruthLog& log, Micros t0, Micros t1, LabelMode mode) {
    if (!(t0 < t1)) throw Error("label window must satisfy t0 < t1");
    return classify(log, log.intersecting(t0, t1), mode);
}

Label label_intervals(const GroundTruthLog& log, std::span<const Interval> intervals, LabelMode mode) {
    std::vector<std::size_t> present;
    for (const auto& iv : intervals) {
        if (!(iv.begin < iv.end)) throw Error("label interval must satisfy begin < end");
        for (std::size_t i : log.intersecting(iv.begin, iv.end)) present.push_back(i);
    }
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    return classify(log, present, mode);
}

void write_ground_truth_csv(std::ostream& out, const GroundTruthLog& log) {
    out << "id,class,arrival_s,speed_mps,length_m\n";
    for (const auto& v : log.vehicles())
        out << v.id << ',' << to_string(v.size) << ',' << csv::format(to_seconds(v.arrival)) << ','
            << csv::format(v.speed_mps) << ',' << csv::format(v.length_m) << '\n';
}

GroundTruthLog read_ground_truth_csv(std::istream& in, double corridor_width_m, double mean_headway_s) {
    csv::Reader reader(in, {"id", "class", "arrival_s", "speed_mps", "length_m"});
    std::vector<Vehicle> vehicles;
    while (reader.next()) {
        Vehicle v;
        v.id = static_cast<std::uint32_t>(reader.integer(0));
        try {
            v.size = parse_size_class(reader[1]);
        } catch (const Error& e) {
            reader.fail(e.what());
        }
        v.arrival = from_seconds(reader.real(2));
        v.speed_mps = reader.real(3);
        v.length_m = reader.real(4);
        if (!(v.speed_mps > 0)) reader.fail("speed_mps must be > 0");
        if (!vehicles.empty() && v.arrival < vehicles.back().arrival) reader.fail("arrival_s must be non-decreasing");
        vehicles.push_back(v);
    }
    return GroundTruthLog(std::move(vehicles), mean_headway_s, corridor_width_m);
}

} // namespace liver
