#pragma once

#include <optional>
#include <span>
#include <vector>

#include "liver/channel.hpp"
#include "liver/common.hpp"

namespace liver {

/// Answers "what does rx hear from tx at time t" for the flooding engines.
/// Implementations must be deterministic given the rng they are handed.
class ChannelOracle {
public:
    virtual ~ChannelOracle() = default;

    /// Received power (dBm) at rx for a transmission by tx at power index txp
    /// starting at time t; nullopt when the pair cannot communicate at all.
    virtual std::optional<double> link_power(NodeId tx, NodeId rx, int txp, Micros t) const = 0;

    /// Decodes the set of concurrent signals arriving at one receiver.
    virtual std::optional<Capture> decode(std::span<const Signal> concurrent, Rng& rng) const = 0;
};

/// Unit-disc channel: links exist within range_m and each decode succeeds with
/// a fixed probability. Used for protocol tests with a known connectivity graph.
class DiscChannel final : public ChannelOracle {
public:
    struct Point {
        double x = 0;
        double y = 0;
    };

    DiscChannel(std::vector<Point> positions, double range_m, double success_probability = 1.0,
                double capture_margin_db = 3.0);

    std::optional<double> link_power(NodeId tx, NodeId rx, int txp, Micros t) const override;
    std::optional<Capture> decode(std::span<const Signal> concurrent, Rng& rng) const override;

    bool connected(NodeId a, NodeId b) const;
    std::size_t size() const { return pos_.size(); }

private:
    std::vector<Point> pos_;
    double range_;
    double p_;
    double margin_;
};

struct GlossyConfig {
    int ntx = 5;
    Micros slot_duration = 4000;
    Micros initiator_timeout = 3 * 4000;
    Micros max_duration = 40000;
    int txp = 31;
    /// Two-node measurement mode: every initiator transmission is retried
    /// after initiator_timeout until a reply arrives.
    bool persistent = false;

    void validate() const;
    int timeout_slots() const { return static_cast<int>(initiator_timeout / slot_duration); }
    int slot_count() const { return static_cast<int>(max_duration / slot_duration); }
};

struct NodeOutcome {
    NodeId id = 0;
    bool received = false;
    std::optional<int> first_rx_relay_count;
    int rx_count = 0;
    int tx_count = 0;
    Micros radio_on = 0;
    std::optional<Micros> latency;
    int initiator_timeout_count = 0;
    /// Per-reception PHY samples, in reception order.
    std::vector<double> rssi;
    std::vector<double> lqi;
};

struct GlossyRunResult {
    NodeId initiator = 0;
    Micros start_time = 0;
    Micros slot_duration = 0;
    Micros max_duration = 0;
    int ntx = 0;
    /// Time the last radio went off (<= start_time + max_duration).
    Micros end_time = 0;
    std::vector<NodeOutcome> nodes;

    const NodeOutcome& at(NodeId id) const;
};

/// Slot-driven synchronous-transmission flood of one packet.
///
/// The initiator transmits in slot 0; a node that decodes in slot k relays in
/// slot k+1 and listens again afterwards, until it has transmitted ntx times.
/// The relay counter a node records on its first reception equals the number
/// of transmissions the packet went through, i.e. its hop distance. The
/// initiator records 0 when its own packet comes back.
/// Re-initiations after a timeout are counted in initiator_timeout_count and
/// do not consume the ntx budget.
GlossyRunResult run_flood(std::span<const NodeId> nodes, NodeId initiator, const GlossyConfig& config,
                          const ChannelOracle& channel, Micros start_time, Rng& rng);

// ---------------------------------------------------------------------------
// All-to-all sharing (Chaos-style merge flooding)

struct ChaosConfig {
    Micros slot_duration = 4000;
    Micros max_duration = 2 * kSeconds;
    /// Back-to-back transmissions of the complete vector after a node
    /// completes; later ones happen only on idle timeout or to help a
    /// neighbour that is behind.
    int ntx_complete = 3;
    /// Hard cap on transmissions per node in one round.
    int tx_budget = 400;
    /// Silence after which a node holding data retransmits spontaneously
    /// (with probability 1/2, to break symmetry).
    Micros idle_timeout = 3 * 4000;
    int txp = 31;

    void validate() const;
};

struct Contribution {
    NodeId node = 0;
    std::size_t slot = 0;
    bool value = false;
};

/// Dense flag vector: which slots are known and their values.
struct FlagVector {
    std::vector<bool> known;
    std::vector<bool> value;

    explicit FlagVector(std::size_t n = 0) : known(n, false), value(n, false) {}
    bool complete() const;
    std::size_t count_known() const;
    bool operator==(const FlagVector&) const = default;
};

struct ChaosNodeOutcome {
    NodeId id = 0;
    FlagVector flags;
    std::optional<Micros> latency; ///< time at which the vector became complete
    Micros radio_on = 0;
    int tx_count = 0;
};

struct ChaosResult {
    std::size_t slots = 0;
    bool all_complete = false;
    Micros end_time = 0;
    std::vector<ChaosNodeOutcome> nodes;

    const ChaosNodeOutcome& at(NodeId id) const;
};

/// Rounds of synchronous transmit-and-merge until every node holds every
/// contribution or the round budget expires. Throws on contribution slot
/// collisions or contributors outside the node set.
ChaosResult run_chaos_share(std::span<const NodeId> nodes, std::span<const Contribution> contributions,
                            std::size_t vector_size, const ChaosConfig& config, const ChannelOracle& channel,
                            Micros start_time, Rng& rng);

} // namespace liver
