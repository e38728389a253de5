#pragma once
// Config files and JSON reports.

#include <burstlab/kernel_model.hpp>
#include <burstlab/layout.hpp>
#include <burstlab/mars.hpp>
#include <burstlab/membus.hpp>
#include <burstlab/sim.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace burstlab {

using Json = nlohmann::ordered_json;

/// Everything a run needs. A config may start from a preset and override
/// any subset of fields.
struct RunConfig {
    Preset setup;
    BusConfig bus;
    std::vector<Variant> variants = all_variants();
};

/// Throws ConfigError naming the offending field, e.g. "kernel.deps[1]".
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::string& path);
void validate_config(const RunConfig& cfg);
Json config_to_json(const RunConfig& cfg);

/// "6x6" or "4x5x7".
std::vector<std::int64_t> parse_size_list(const std::string& text, const std::string& field);

/// "polybench", "constant:V" or "random[:low:high]".
InitSpec parse_init(const std::string& text);

Json to_json(const TileCoord& c);
Json to_json(const Point& p);
Json to_json(const TransferTotals& t);

Json analyze_report(const Preset& setup, const TileIOSummary& io, const PartitionReport& check, bool verbose);
Json layout_report(const Preset& setup, const TileIOSummary& io, const WeightMatrix& w, const LayoutOrder& layout,
                   const BurstCount& bursts, bool exact);
Json sim_report(const SimReport& r);

}  // namespace burstlab
