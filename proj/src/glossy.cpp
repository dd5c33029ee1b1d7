#include "liver/glossy.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace liver {

DiscChannel::DiscChannel(std::vector<Point> positions, double range_m, double success_probability,
                         double capture_margin_db)
    : pos_(std::move(positions)), range_(range_m), p_(success_probability), margin_(capture_margin_db) {
    if (!(range_ > 0)) throw Error("disc range must be > 0");
    if (p_ < 0 || p_ > 1) throw Error("success probability must lie in [0, 1]");
}

bool DiscChannel::connected(NodeId a, NodeId b) const {
    if (a == b || a >= pos_.size() || b >= pos_.size()) return false;
    return std::hypot(pos_[a].x - pos_[b].x, pos_[a].y - pos_[b].y) <= range_;
}

std::optional<double> DiscChannel::link_power(NodeId tx, NodeId rx, int, Micros) const {
    if (!connected(tx, rx)) return std::nullopt;
    const double d = std::max(1.0, std::hypot(pos_[tx].x - pos_[rx].x, pos_[tx].y - pos_[rx].y));
    return -40.0 - 20.0 * std::log10(d);
}

std::optional<Capture> DiscChannel::decode(std::span<const Signal> concurrent, Rng& rng) const {
    if (concurrent.empty()) return std::nullopt;
    const auto groups = strongest_per_content(concurrent);
    const double u = uniform01(rng);
    if (groups.size() > 1 && groups[0].power_dbm - groups[1].power_dbm < margin_) return std::nullopt;
    if (u >= p_) return std::nullopt;
    const Signal& top = groups.front();
    return Capture{top.transmitter, top.content, Reception{true, top.power_dbm, kLqiMax}};
}

void GlossyConfig::validate() const {
    if (ntx < 1) throw Error("ntx must be >= 1");
    if (slot_duration <= 0) throw Error("slot_duration must be > 0");
    if (initiator_timeout < slot_duration) throw Error("initiator_timeout must be >= slot_duration");
    if (max_duration < static_cast<Micros>(ntx) * 2 * slot_duration)
        throw Error("max_duration must be >= ntx * 2 * slot_duration");
    if (txp < kMinTxp || txp > kMaxTxp) throw Error("txp must lie in [0, 31]");
}

const NodeOutcome& GlossyRunResult::at(NodeId id) const {
    for (const auto& n : nodes)
        if (n.id == id) return n;
    throw Error("node " + std::to_string(id) + " not part of this flood");
}

namespace {

constexpr std::uint64_t kFloodContent = 0x6c6f737379ULL;

struct FloodState {
    bool done = false;
    int next_tx = -1;        ///< slot of the scheduled transmission, -1 if none
    int last_tx = -1;        ///< slot of the most recent transmission
    bool awaiting_reply = false;
    bool replied = false;    ///< initiator heard at least one relay
    int relay = 0;           ///< counter carried by this node's next transmission
    int last_active = -1;
};

std::size_t index_of(std::span<const NodeId> nodes, NodeId id) {
    auto it = std::find(nodes.begin(), nodes.end(), id);
    if (it == nodes.end()) throw Error("node " + std::to_string(id) + " is not in the node set");
    return static_cast<std::size_t>(it - nodes.begin());
}

void check_node_set(std::span<const NodeId> nodes) {
    if (nodes.empty()) throw Error("empty node set");
    std::vector<NodeId> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw Error("duplicate node in node set");
}

} // namespace

GlossyRunResult run_flood(std::span<const NodeId> nodes, NodeId initiator, const GlossyConfig& config,
                          const ChannelOracle& channel, Micros start_time, Rng& rng) {
    check_node_set(nodes);
    const std::size_t init = index_of(nodes, initiator);
    config.validate();

    const std::size_t n = nodes.size();
    const int slots = config.slot_count();
    const int timeout = config.timeout_slots();

    GlossyRunResult result;
    result.initiator = initiator;
    result.start_time = start_time;
    result.slot_duration = config.slot_duration;
    result.max_duration = config.max_duration;
    result.ntx = config.ntx;
    result.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.nodes[i].id = nodes[i];

    std::vector<FloodState> st(n);
    st[init].next_tx = 0;
    st[init].relay = 0;
    result.nodes[init].initiator_timeout_count = 1;

    std::vector<std::size_t> transmitters;
    std::vector<Signal> signals;
    int last_slot_used = -1;

    for (int k = 0; k < slots; ++k) {
        const Micros t = start_time + static_cast<Micros>(k) * config.slot_duration;

        // Initiator timeout: re-initiate when the listen window after the last
        // transmission expired without any reception.
        FloodState& is = st[init];
        if (!is.done && is.next_tx < 0 && is.awaiting_reply && k - is.last_tx > timeout) {
            const bool may_retry = config.persistent || !is.replied;
            if (may_retry) {
                is.next_tx = k;
                result.nodes[init].initiator_timeout_count += 1;
            }
        }

        transmitters.clear();
        bool any_active = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (st[i].done) continue;
            any_active = true;
            if (st[i].next_tx == k) transmitters.push_back(i);
        }
        if (!any_active) break;

        for (std::size_t i : transmitters) {
            FloodState& s = st[i];
            NodeOutcome& o = result.nodes[i];
            const bool retry = (i == init) && s.last_tx >= 0 && s.awaiting_reply;
            if (!retry) o.tx_count += 1;
            s.last_tx = k;
            s.next_tx = -1;
            if (i == init) s.awaiting_reply = true;
        }

        for (std::size_t r = 0; r < n; ++r) {
            FloodState& s = st[r];
            if (s.done || s.last_tx == k) continue;
            signals.clear();
            for (std::size_t i : transmitters) {
                if (auto p = channel.link_power(nodes[i], nodes[r], config.txp, t))
                    signals.push_back(Signal{static_cast<NodeId>(i), *p, kFloodContent});
            }
            if (signals.empty()) continue;
            auto cap = channel.decode(signals, rng);
            if (!cap) continue;

            NodeOutcome& o = result.nodes[r];
            const int relay = st[cap->transmitter].relay + 1;
            o.rx_count += 1;
            o.rssi.push_back(cap->reception.rssi_dbm);
            o.lqi.push_back(cap->reception.lqi);
            if (!o.received) {
                o.received = true;
                // The initiator hears its own packet echoed back; it sits at hop 0.
                o.first_rx_relay_count = r == init ? 0 : relay;
                o.latency = static_cast<Micros>(k + 1) * config.slot_duration;
            }
            s.relay = relay;
            if (r == init) {
                s.replied = true;
                s.awaiting_reply = false;
            }
            if (o.tx_count < config.ntx) s.next_tx = k + 1;
        }

        // Radio accounting for this slot, then switch off finished nodes.
        for (std::size_t i = 0; i < n; ++i) {
            FloodState& s = st[i];
            if (s.done) continue;
            result.nodes[i].radio_on += config.slot_duration;
            s.last_active = k;
            last_slot_used = k;
            const NodeOutcome& o = result.nodes[i];
            if (o.tx_count >= config.ntx && s.next_tx < 0) {
                // A persistent initiator stays on until its last packet is acknowledged.
                const bool waiting = (i == init) && s.awaiting_reply && (config.persistent || !s.replied);
                if (!waiting) s.done = true;
            }
        }
    }

    result.end_time = start_time + static_cast<Micros>(last_slot_used + 1) * config.slot_duration;
    return result;
}

// ---------------------------------------------------------------------------

void ChaosConfig::validate() const {
    if (slot_duration <= 0) throw Error("slot_duration must be > 0");
    if (max_duration < slot_duration) throw Error("max_duration must cover at least one slot");
    if (ntx_complete < 1) throw Error("ntx_complete must be >= 1");
    if (tx_budget < ntx_complete) throw Error("tx_budget must be >= ntx_complete");
    if (idle_timeout < slot_duration) throw Error("idle_timeout must be >= slot_duration");
    if (txp < kMinTxp || txp > kMaxTxp) throw Error("txp must lie in [0, 31]");
}

bool FlagVector::complete() const { return std::all_of(known.begin(), known.end(), [](bool b) { return b; }); }

std::size_t FlagVector::count_known() const {
    return static_cast<std::size_t>(std::count(known.begin(), known.end(), true));
}

const ChaosNodeOutcome& ChaosResult::at(NodeId id) const {
    for (const auto& n : nodes)
        if (n.id == id) return n;
    throw Error("node " + std::to_string(id) + " not part of this round");
}

namespace {

std::uint64_t content_hash(const FlagVector& v) {
    std::uint64_t h = 0x51ed270b27c9d5a1ULL;
    for (std::size_t i = 0; i < v.known.size(); ++i) {
        const std::uint64_t bits = (v.known[i] ? 1u : 0u) | (v.value[i] ? 2u : 0u);
        h = mix64(h ^ (bits + 4 * i));
    }
    return h;
}

FlagVector merge(const FlagVector& a, const FlagVector& b) {
    FlagVector out = a;
    for (std::size_t i = 0; i < a.known.size(); ++i) {
        if (!out.known[i] && b.known[i]) {
            out.known[i] = true;
            out.value[i] = b.value[i];
        }
    }
    return out;
}

struct ChaosState {
    FlagVector flags;
    std::uint64_t hash = 0;
    int next_tx = -1;
    int last_activity = 0;
    int full_tx = 0;
    bool done = false;
};

} // namespace

ChaosResult run_chaos_share(std::span<const NodeId> nodes, std::span<const Contribution> contributions,
                            std::size_t vector_size, const ChaosConfig& config, const ChannelOracle& channel,
                            Micros start_time, Rng& rng) {
    check_node_set(nodes);
    config.validate();
    if (vector_size == 0) throw Error("flag vector must have at least one slot");

    const std::size_t n = nodes.size();
    std::vector<ChaosState> st(n, ChaosState{FlagVector(vector_size)});
    std::vector<bool> claimed(vector_size, false);
    std::size_t initiator = n;
    for (const auto& c : contributions) {
        if (c.slot >= vector_size) throw Error("contribution slot " + std::to_string(c.slot) + " out of range");
        if (claimed[c.slot]) throw Error("contribution slot collision on slot " + std::to_string(c.slot));
        claimed[c.slot] = true;
        const std::size_t i = index_of(nodes, c.node);
        if (st[i].flags.count_known() > 0) throw Error("node " + std::to_string(c.node) + " holds more than one slot");
        st[i].flags.known[c.slot] = true;
        st[i].flags.value[c.slot] = c.value;
        if (initiator == n || nodes[i] < nodes[initiator]) initiator = i;
    }
    if (initiator == n) throw Error("no contributions to share");

    ChaosResult result;
    result.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.nodes[i].id = nodes[i];
        st[i].hash = content_hash(st[i].flags);
        if (st[i].flags.complete()) result.nodes[i].latency = 0;
    }
    st[initiator].next_tx = 0;

    const int slots = static_cast<int>(config.max_duration / config.slot_duration);
    const int idle = static_cast<int>(config.idle_timeout / config.slot_duration);
    std::vector<std::size_t> transmitters;
    std::vector<bool> is_tx(n, false);
    std::vector<Signal> signals;
    int k = 0;
    for (; k < slots; ++k) {
        const Micros t = start_time + static_cast<Micros>(k) * config.slot_duration;

        bool everyone_complete = true;
        for (std::size_t i = 0; i < n; ++i) {
            ChaosState& s = st[i];
            if (!s.flags.complete()) everyone_complete = false;
            if (s.done || s.next_tx >= 0 || s.flags.count_known() == 0) continue;
            if (k - s.last_activity >= idle) {
                s.last_activity = k;
                if (uniform01(rng) < 0.5) s.next_tx = k;
            }
        }
        if (everyone_complete) break;

        transmitters.clear();
        std::fill(is_tx.begin(), is_tx.end(), false);
        for (std::size_t i = 0; i < n; ++i) {
            if (!st[i].done && st[i].next_tx == k) {
                transmitters.push_back(i);
                is_tx[i] = true;
            }
        }

        for (std::size_t i : transmitters) {
            ChaosState& s = st[i];
            auto& o = result.nodes[i];
            o.tx_count += 1;
            if (s.flags.complete()) s.full_tx += 1;
            s.next_tx = -1;
            s.last_activity = k;
        }

        for (std::size_t r = 0; r < n; ++r) {
            ChaosState& s = st[r];
            if (s.done || is_tx[r]) continue;
            signals.clear();
            for (std::size_t i : transmitters) {
                if (auto p = channel.link_power(nodes[i], nodes[r], config.txp, t))
                    signals.push_back(Signal{static_cast<NodeId>(i), *p, st[i].hash});
            }
            if (signals.empty()) continue;
            auto cap = channel.decode(signals, rng);
            if (!cap) continue;

            const FlagVector& heard = st[cap->transmitter].flags;
            FlagVector merged = merge(s.flags, heard);
            const bool changed = !(merged == s.flags);
            const bool sender_behind = !(merged == heard);
            if (changed) {
                s.flags = std::move(merged);
                s.hash = content_hash(s.flags);
            }
            s.last_activity = k;
            auto& o = result.nodes[r];
            const bool full = s.flags.complete();
            if (full && !o.latency) o.latency = static_cast<Micros>(k + 1) * config.slot_duration;
            if (changed || sender_behind || (full && s.full_tx < config.ntx_complete)) s.next_tx = k + 1;
        }

        for (std::size_t i = 0; i < n; ++i) {
            ChaosState& s = st[i];
            if (s.done) continue;
            result.nodes[i].radio_on += config.slot_duration;
            // Complete nodes keep listening so that late neighbours can still
            // pull the vector; only the transmission budget switches a node off.
            if (s.next_tx < 0 && result.nodes[i].tx_count >= config.tx_budget) s.done = true;
        }
    }

    result.slots = static_cast<std::size_t>(k);
    result.end_time = start_time + static_cast<Micros>(k) * config.slot_duration;
    result.all_complete = true;
    for (std::size_t i = 0; i < n; ++i) {
        result.nodes[i].flags = st[i].flags;
        if (!st[i].flags.complete()) result.all_complete = false;
    }
    return result;
}

} // namespace liver
