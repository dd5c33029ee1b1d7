#include "liver/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace liver {

std::string to_string(SizeClass c) {
    switch (c) {
    case SizeClass::S: return "S";
    case SizeClass::M: return "M";
    case SizeClass::L: return "L";
    }
    return "?";
}

SizeClass parse_size_class(const std::string& s) {
    if (s == "S") return SizeClass::S;
    if (s == "M") return SizeClass::M;
    if (s == "L") return SizeClass::L;
    throw Error("unknown vehicle class '" + s + "'");
}

void LinkCalibration::validate() const {
    if (txp_to_rxpower.empty()) throw Error("txp_to_rxpower: at least one anchor required");
    double prev = -1e300;
    for (const auto& [txp, dbm] : txp_to_rxpower) {
        if (txp < kMinTxp || txp > kMaxTxp) throw Error("txp_to_rxpower: index " + std::to_string(txp) + " outside 0..31");
        if (dbm < prev) throw Error("txp_to_rxpower: received power must be non-decreasing in the power index");
        prev = dbm;
    }
    if (!(reference_distance_m > 0)) throw Error("reference_distance_m must be > 0");
    if (!(path_loss_exponent > 0)) throw Error("path_loss_exponent must be > 0");
    if (!(prr_curve.width_db > 0)) throw Error("prr_curve.width_db must be > 0");
    if (capture_margin_db < 0) throw Error("capture_margin_db must be >= 0");
    if (rssi_sigma_db < 0 || lqi_sigma < 0) throw Error("noise sigmas must be >= 0");
}

void ObstructionModel::validate() const {
    const auto& a = attenuation_db;
    if (!(a[0] > 0 && a[1] >= a[0] && a[2] >= a[1]))
        throw Error("obstruction attenuation must satisfy L >= M >= S > 0");
    if (partial_factor < 0 || partial_factor > 1) throw Error("partial_factor must lie in [0, 1]");
}

LinkModel::LinkModel(LinkCalibration calibration, ObstructionModel obstruction)
    : cal_(std::move(calibration)), obs_(obstruction) {
    cal_.validate();
    obs_.validate();
}

double LinkModel::reference_power(int txp) const {
    if (txp < kMinTxp || txp > kMaxTxp) throw Error("unknown power index " + std::to_string(txp));
    const auto& table = cal_.txp_to_rxpower;
    if (auto it = table.find(txp); it != table.end()) return it->second;
    if (table.size() == 1) return table.begin()->second;

    // Bracketing segment; outside the anchored range the nearest segment's
    // slope is extended.
    auto hi = table.upper_bound(txp);
    if (hi == table.begin()) ++hi;
    if (hi == table.end()) --hi;
    auto lo = std::prev(hi);
    const double slope = (hi->second - lo->second) / static_cast<double>(hi->first - lo->first);
    return lo->second + slope * static_cast<double>(txp - lo->first);
}

double LinkModel::received_power(int txp, double distance_m, std::span<const Obstruction> obstructions) const {
    if (!(distance_m > 0)) throw Error("distance must be > 0");
    double p = reference_power(txp) - 10.0 * cal_.path_loss_exponent * std::log10(distance_m / cal_.reference_distance_m);
    for (const auto& o : obstructions) p -= obs_.attenuation(o.size) * o.overlap;
    return p;
}

double LinkModel::prr(double rx_dbm) const {
    const double z = (rx_dbm - prr_midpoint()) / cal_.prr_curve.width_db;
    return 1.0 / (1.0 + std::exp(-z));
}

Reception LinkModel::sample_reception(double rx_dbm, Rng& rng) const {
    const double p = prr(rx_dbm);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double u = uniform01(rng);
    const double rssi_noise = noise(rng);
    const double lqi_noise = noise(rng);
    Reception r;
    r.received = u < p;
    r.rssi_dbm = rx_dbm + cal_.rssi_sigma_db * rssi_noise;
    r.lqi = std::clamp(kLqiMin + (kLqiMax - kLqiMin) * p + cal_.lqi_sigma * lqi_noise, kLqiMin, kLqiMax);
    return r;
}

std::vector<Signal> strongest_per_content(std::span<const Signal> concurrent) {
    std::vector<Signal> best;
    for (const auto& s : concurrent) {
        auto it = std::find_if(best.begin(), best.end(), [&](const Signal& b) { return b.content == s.content; });
        if (it == best.end())
            best.push_back(s);
        else if (s.power_dbm > it->power_dbm)
            *it = s;
    }
    std::stable_sort(best.begin(), best.end(), [](const Signal& a, const Signal& b) { return a.power_dbm > b.power_dbm; });
    return best;
}

std::optional<Capture> LinkModel::capture_resolve(std::span<const Signal> concurrent, Rng& rng) const {
    if (concurrent.empty()) return std::nullopt;
    const auto groups = strongest_per_content(concurrent);
    if (groups.size() > 1 && groups[0].power_dbm - groups[1].power_dbm < cal_.capture_margin_db) return std::nullopt;
    const Signal& top = groups.front();
    Reception r = sample_reception(top.power_dbm, rng);
    if (!r.received) return std::nullopt;
    return Capture{top.transmitter, top.content, r};
}

} // namespace liver
