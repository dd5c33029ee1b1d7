#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "liver/common.hpp"

namespace liver {

/// Logistic packet-reception curve over received power (dBm).
/// prr(p) = 1 / (1 + exp(-(p - midpoint) / width)), midpoint = noise_floor + midpoint_offset.
struct PrrCurve {
    double midpoint_offset_db = 5.0;
    double width_db = 1.5;
};

/// Static link budget of the transceiver. Powers are referenced to the
/// roadside measurement geometry (two devices 12 m apart).
struct LinkCalibration {
    /// CC2420-style power index -> received power (dBm) at reference_distance.
    /// Indices between anchors are interpolated linearly in dBm.
    std::map<int, double> txp_to_rxpower{{3, -98.0}, {31, -66.0}};
    double reference_distance_m = 12.0;
    double path_loss_exponent = 3.0;
    double noise_floor_dbm = -98.0;
    PrrCurve prr_curve{};
    double capture_margin_db = 3.0;
    double rssi_sigma_db = 1.0;
    double lqi_sigma = 2.0;

    void validate() const;
};

/// Extra path loss while a vehicle body sits in a link's line of sight.
struct ObstructionModel {
    std::array<double, 3> attenuation_db{10.0, 18.0, 30.0}; // S, M, L
    double partial_factor = 0.5;

    double attenuation(SizeClass c) const { return attenuation_db[static_cast<std::size_t>(c)]; }
    void validate() const;
};

struct Obstruction {
    SizeClass size;
    double overlap = 1.0; ///< fraction in [0, 1]
};

struct Reception {
    bool received = false;
    double rssi_dbm = 0.0;
    double lqi = 0.0;
};

/// One concurrent transmission as seen by a single receiver.
struct Signal {
    NodeId transmitter = 0;
    double power_dbm = 0.0;
    std::uint64_t content = 0; ///< equal values mean bit-identical packets
};

struct Capture {
    NodeId transmitter = 0;
    std::uint64_t content = 0;
    Reception reception;
};

constexpr int kMinTxp = 0;
constexpr int kMaxTxp = 31;
constexpr double kLqiMin = 50.0;
constexpr double kLqiMax = 110.0;

class LinkModel {
public:
    LinkModel() : LinkModel(LinkCalibration{}, ObstructionModel{}) {}
    LinkModel(LinkCalibration calibration, ObstructionModel obstruction);

    const LinkCalibration& calibration() const { return cal_; }
    const ObstructionModel& obstruction() const { return obs_; }

    /// Power at the reference distance for a power index; throws on indices outside 0..31.
    double reference_power(int txp) const;

    double received_power(int txp, double distance_m, std::span<const Obstruction> obstructions = {}) const;

    double prr(double rx_dbm) const;
    double prr_midpoint() const { return cal_.noise_floor_dbm + cal_.prr_curve.midpoint_offset_db; }

    /// Draws exactly three variates from rng regardless of outcome so that
    /// stream consumption does not depend on the result.
    Reception sample_reception(double rx_dbm, Rng& rng) const;

    /// Resolves concurrent transmissions at one receiver. Identical-content
    /// packets combine (strongest copy decides); distinct content is decoded
    /// only if the strongest beats the runner-up by the capture margin.
    std::optional<Capture> capture_resolve(std::span<const Signal> concurrent, Rng& rng) const;

private:
    LinkCalibration cal_;
    ObstructionModel obs_;
};

/// Groups signals by content and keeps the strongest copy of each; sorted by
/// descending power. Shared by every capture-resolving channel.
std::vector<Signal> strongest_per_content(std::span<const Signal> concurrent);

} // namespace liver
