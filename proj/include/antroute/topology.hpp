#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "antroute/channel.hpp"

namespace antroute {

enum class TopologyKind : std::uint8_t { Line, Ring, Grid, ErdosRenyi, BarabasiAlbert };

const char* to_string(TopologyKind kind);
TopologyKind topology_kind_from_string(const std::string& s);

struct TopologyParams {
    TopologyKind kind = TopologyKind::Line;
    std::uint32_t n = 0;       // line, ring, erdos_renyi, barabasi_albert
    std::uint32_t width = 0;   // grid
    std::uint32_t height = 0;  // grid
    double p = 0.0;            // erdos_renyi
    std::uint32_t m = 0;       // barabasi_albert

    static TopologyParams line(std::uint32_t n) { return {TopologyKind::Line, n, 0, 0, 0.0, 0}; }
    static TopologyParams ring(std::uint32_t n) { return {TopologyKind::Ring, n, 0, 0, 0.0, 0}; }
    static TopologyParams grid(std::uint32_t w, std::uint32_t h) { return {TopologyKind::Grid, 0, w, h, 0.0, 0}; }
    static TopologyParams erdos_renyi(std::uint32_t n, double p) { return {TopologyKind::ErdosRenyi, n, 0, 0, p, 0}; }
    static TopologyParams barabasi_albert(std::uint32_t n, std::uint32_t m) {
        return {TopologyKind::BarabasiAlbert, n, 0, 0, 0.0, m};
    }
};

struct CapacityModel {
    enum class Kind : std::uint8_t { Constant, UniformRange };

    Kind kind = Kind::Constant;
    Msat lo = 1'000'000'000;
    Msat hi = 1'000'000'000;
    // Share of channels made unidirectional (direction picked at random).
    double unidirectional_fraction = 0.0;

    static CapacityModel constant(Msat c) { return {Kind::Constant, c, c, 0.0}; }
    static CapacityModel uniform_range(Msat lo, Msat hi) { return {Kind::UniformRange, lo, hi, 0.0}; }
};

struct GeneratorInfo {
    std::string kind;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
    std::uint32_t generated_nodes = 0;  // before taking the largest component

    friend bool operator==(const GeneratorInfo&, const GeneratorInfo&) = default;
};

struct Topology {
    std::uint32_t nodes = 0;
    ChannelSet channels;
    std::optional<GeneratorInfo> generator;

    /// Per-node neighbor lists in channel order.
    std::vector<std::vector<NeighborRecord>> neighbor_records() const;

    friend bool operator==(const Topology&, const Topology&) = default;
};

/// Deterministic in (params, capacity, seed). Erdos-Renyi graphs are cut down
/// to their largest connected component and relabeled 0..k-1.
Topology generate_topology(const TopologyParams& params, const CapacityModel& capacity, std::uint64_t seed);

nlohmann::json topology_to_json(const Topology& topology);
/// Throws ConfigError on schema problems and TopologyError on bad structure.
Topology topology_from_json(const nlohmann::json& doc);

}  // namespace antroute
