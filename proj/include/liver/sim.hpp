#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "liver/channel.hpp"
#include "liver/glossy.hpp"
#include "liver/metrics.hpp"
#include "liver/schedule.hpp"
#include "liver/traffic.hpp"

namespace liver {

using Point = DiscChannel::Point;

enum class Role : std::uint8_t { MpInitiator, MpReceiver, Forwarder };
std::string to_string(Role r);

/// One measurement point: two devices facing each other across a road.
struct MpSite {
    std::size_t index = 0;
    NodeId initiator = 0;
    NodeId receiver = 0;
    /// Where the line of sight crosses the road centre line.
    Point crossing;
    std::size_t row = 0;
};

struct Topology {
    std::vector<Point> positions;
    std::vector<Role> roles;
    std::vector<MpSite> mps;
    std::vector<NodeId> forwarders;
    /// y coordinate of each (horizontal) road.
    std::vector<double> roads;

    std::size_t size() const { return positions.size(); }
    std::vector<NodeId> node_ids() const;
    double distance(NodeId a, NodeId b) const;
};

/// Deployment area and node counts.
///
/// MPs are placed along horizontal roads inter_mp_m apart, filling one road
/// before starting the next (serpentine, so consecutive MPs stay adjacent).
/// Roads are inter_mp_m apart and centred in the area. Forwarders sit
/// fn_offset_m further out than an anchor MP's nodes, alternating road sides;
/// anchors are spread evenly over the MPs. fn_positions, when given, replaces
/// the generated forwarder layout.
struct Scenario {
    std::string name = "custom";
    double width_m = 1000;
    double height_m = 1000;
    double inter_mp_m = 50;
    double mp_separation_m = 12;
    int mp_count = 1;
    int fn_count = 0;
    double fn_offset_m = 20;
    std::vector<Point> fn_positions;

    static Scenario es1();
    static Scenario es2();
    /// "es1", "es2" or "custom".
    static Scenario named(const std::string& name);

    int node_count() const { return 2 * mp_count + fn_count; }
    int sites_per_road() const;
    void validate() const;
};

Topology make_grid(const Scenario& scenario);

/// Log-distance channel over a topology. Vehicles listed for an MP attenuate
/// every link that crosses that MP's road within obstruction_radius_m of the
/// MP crossing point.
class RadioChannel final : public ChannelOracle {
public:
    RadioChannel(const Topology& topology, LinkModel model, double obstruction_radius_m = 2.0);

    /// The log must outlive the channel; nullptr clears it.
    void set_traffic(std::size_t mp, const GroundTruthLog* log);

    std::optional<double> link_power(NodeId tx, NodeId rx, int txp, Micros t) const override;
    std::optional<Capture> decode(std::span<const Signal> concurrent, Rng& rng) const override;

    const LinkModel& model() const { return model_; }
    /// Unobstructed reception probability of a single packet.
    double link_prr(NodeId a, NodeId b, int txp) const;
    /// MPs whose traffic affects the link (symmetric).
    const std::vector<std::uint32_t>& obstructing_mps(NodeId a, NodeId b) const;

private:
    std::size_t n_;
    std::vector<double> dist_;
    std::vector<std::vector<std::uint32_t>> affects_;
    std::vector<const GroundTruthLog*> logs_;
    LinkModel model_;
    double cutoff_dbm_;
};

/// Hop distances from `source` over links with unobstructed PRR >= threshold;
/// -1 for unreachable nodes.
std::vector<int> connectivity_hops(const Topology& topology, const RadioChannel& channel, int txp, NodeId source,
                                   double threshold = 0.5);

/// MP-local measurement radio settings.
struct DcSettings {
    Micros slot = 1000;
    int timeout_slots = 3;
    /// Transmissions per instance under MPG / DMPG.
    int split_ntx = 1;
    /// Transmissions of the single PG instance.
    int pg_ntx = 5;
    bool pg_persistent = false;

    void validate() const;
    GlossyConfig instance_config(const PhaseSchedule& schedule) const;
};

enum class Granularity : std::uint8_t { Window, Instance };
std::string to_string(Granularity g);
Granularity parse_granularity(const std::string& s);

/// Which time span a feature row's label describes.
enum class LabelScope : std::uint8_t {
    Probe,  ///< the radio activity of the row's instances
    Period, ///< the whole period
};
std::string to_string(LabelScope s);
LabelScope parse_label_scope(const std::string& s);

struct SessionOptions {
    Granularity granularity = Granularity::Window;
    LabelScope label_scope = LabelScope::Probe;
    bool keep_trace = true;
};

struct MpSessionResult {
    std::vector<FeatureVector> rows;
    std::vector<TraceRow> trace;
    /// Scheduled windows of every executed instance.
    std::vector<Interval> windows;
    /// Per period: any instance fired the disturbance trigger.
    std::vector<bool> disturbed;
    int compressions = 0;
    int dropped = 0;
};

/// DMPG trigger: a retry was needed or the receiver missed a transmission.
bool disturbance(const GlossyRunResult& result, NodeId receiver);

/// Runs the measurement phase of one MP over `periods` periods. The random
/// stream of period p is derive_seed(seed, dc tag, stream, p), so an MP's
/// measurements depend only on its own stream index, channel and traffic.
MpSessionResult run_mp_session(const PhaseSchedule& schedule, const DcSettings& dc, const ChannelOracle& channel,
                               NodeId initiator, NodeId receiver, std::size_t stream, std::int64_t periods,
                               std::uint64_t seed, const GroundTruthLog& truth, const SessionOptions& options = {});

/// Rebuilds feature rows from a session trace. Consecutive rows sharing
/// (period, window_start) form one window; labels come from `truth` exactly
/// as in run_mp_session, so replaying a session's own trace reproduces its rows.
std::vector<FeatureVector> replay_trace(std::span<const TraceRow> trace, const GroundTruthLog& truth, Micros gp,
                                        const SessionOptions& options = {});

struct CoverageStats {
    std::size_t vehicles = 0;
    std::size_t covered = 0;

    double fraction() const { return vehicles ? static_cast<double>(covered) / static_cast<double>(vehicles) : 1.0; }
};

/// Vehicles fully inside [0, horizon) whose occupancy overlaps at least one window.
CoverageStats coverage(const GroundTruthLog& truth, std::span<const Interval> windows, Micros horizon);

struct TrafficParams {
    bool enabled = true;
    double mean_headway_s = 3.0;
    std::array<double, 3> class_mix{0.5, 0.3, 0.2};
    TrafficConfig config;
};

/// Network-wide sync flood settings; its max_duration and power come from the schedule.
struct ScSettings {
    Micros slot = 4000;
    int ntx = 5;
    int timeout_slots = 3;

    GlossyConfig config(const PhaseSchedule& schedule) const;
};

struct ExperimentConfig {
    Scenario scenario;
    PhaseSchedule schedule;
    DcSettings dc;
    ScSettings sc;
    bool iphase = false;
    ChaosConfig chaos;
    TrafficParams traffic;
    LinkCalibration calibration;
    ObstructionModel obstruction;
    double obstruction_radius_m = 2.0;
    std::int64_t periods = 100;
    std::uint64_t seed = 1;
    NodeId sc_initiator = 0;
    SessionOptions session;

    void validate() const;
};

struct NodeScSummary {
    NodeId id = 0;
    Role role = Role::Forwarder;
    std::size_t floods = 0;
    std::size_t received = 0;
    RunningStats lt;
    RunningStats ro;
    RunningStats hc;
    RunningStats rxct;
};

struct ScPeriodRow {
    std::int64_t period = 0;
    double reached = 0; ///< fraction of non-initiator nodes that received
    double mean_lt_us = 0;
    double mean_ro_us = 0;
    double mean_hc = 0;
    double mean_rxct = 0;
};

struct IPhaseRow {
    std::int64_t period = 0;
    bool complete = false;
    double mean_latency_us = 0;
    double max_latency_us = 0;
    double mean_radio_on_us = 0;
    std::size_t flags_set = 0;
};

struct MpRecord {
    MpSite site;
    GroundTruthLog truth;
    MpSessionResult session;
    CoverageStats coverage;
};

struct ExperimentRecord {
    Topology topology;
    std::vector<MpRecord> mps;
    std::vector<NodeScSummary> nodes;
    std::vector<ScPeriodRow> sc;
    std::vector<IPhaseRow> iphase;

    /// Means over the non-initiator nodes of every period.
    double mean_sc_lt() const;
    double mean_sc_ro() const;
    double mean_sc_hc() const;
    double mean_sc_rxct() const;
    double mean_iphase_latency() const;
};

/// Full periodic run: network-wide sync flood, then every MP's measurement
/// instances, then (optionally) all-to-all sharing of per-MP disturbance
/// flags. Throws before simulating if the topology is disconnected at txp_sc.
ExperimentRecord run_experiment(const ExperimentConfig& config);

/// Stream tags for derive_seed.
namespace stream {
constexpr std::uint64_t kTraffic = 0x7472616666ULL;
constexpr std::uint64_t kMeasure = 0x6d65617375ULL;
constexpr std::uint64_t kSync = 0x73796e63ULL;
constexpr std::uint64_t kShare = 0x7368617265ULL;
} // namespace stream

} // namespace liver
