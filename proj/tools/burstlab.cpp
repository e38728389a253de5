// burstlab command-line driver: analyze, layout, simulate, codec.

#include <burstlab/codec.hpp>
#include <burstlab/json_io.hpp>
#include <burstlab/layout.hpp>
#include <burstlab/mars.hpp>
#include <burstlab/sim.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace burstlab;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIncorrect = 3;

struct Options {
    std::string preset;
    std::string config;
    std::string tile;
    std::string dtype;
    std::string n;
    std::optional<std::int64_t> t;
    std::string init;
    std::optional<std::uint64_t> seed;
    std::string variants;
    std::optional<int> bus_width;
    std::optional<int> burst_latency;
    std::optional<int> max_burst;
    std::string export_ilp;
    std::string out;
    std::string csv;
    std::string transfers;
    bool verbose = false;
    int threads = 1;

    // codec
    std::string in;
    std::string split;
};

void add_setup_options(CLI::App* app, Options& o) {
    app->add_option("--preset", o.preset, "Built-in setup: jacobi-1d, jacobi-2d, seidel-2d");
    app->add_option("--config", o.config, "JSON config file (may name a preset and override it)");
    app->add_option("--tile", o.tile, "Tile sizes, e.g. 6x6 or 4x5x7");
    app->add_option("--dtype", o.dtype, "fixed:N[:frac] | ufixed:N:frac | float:N");
    app->add_option("--n", o.n, "Spatial sizes, e.g. 40 or 24x32 (one value applies to every dimension)");
    app->add_option("--t", o.t, "Time steps");
    app->add_option("--init", o.init, "polybench | constant:V | random[:LOW:HIGH]");
    app->add_option("--seed", o.seed, "Seed for random initialization");
    app->add_option("--out", o.out, "Write the JSON report here instead of stdout");
    app->add_flag("--verbose", o.verbose, "Include MARS points and extra detail");
}

void add_bus_options(CLI::App* app, Options& o) {
    app->add_option("--bus-width", o.bus_width, "Bus width in bits (default 64)");
    app->add_option("--burst-latency", o.burst_latency, "Burst initiation latency in cycles (default 16)");
    app->add_option("--max-burst", o.max_burst, "Longest burst in beats before splitting (default 256)");
}

RunConfig resolve(const Options& o) {
    RunConfig cfg;
    if (!o.config.empty() && !o.preset.empty())
        throw ConfigError("preset", "give either --preset or --config; a config file can name its own preset");
    if (!o.config.empty()) {
        cfg = load_config(o.config);
    } else if (!o.preset.empty()) {
        cfg.setup = make_preset(o.preset);
    } else {
        throw ConfigError("preset", "give --preset or --config");
    }
    Preset& s = cfg.setup;
    if (!o.tile.empty()) s.tiling.sizes = parse_size_list(o.tile, "tile");
    if (!o.dtype.empty()) s.kernel.dtype = parse_dtype(o.dtype);
    if (!o.n.empty()) {
        auto sizes = parse_size_list(o.n, "n");
        if (sizes.size() == 1 && s.kernel.dim > 2) sizes.assign(s.kernel.dim - 1, sizes[0]);
        s.problem.spatial_sizes = sizes;
    }
    if (o.t) s.problem.time_steps = *o.t;
    if (!o.init.empty()) {
        const auto seed = s.problem.init.seed;
        s.problem.init = parse_init(o.init);
        s.problem.init.seed = seed;
    }
    if (o.seed) s.problem.init.seed = *o.seed;
    if (!o.variants.empty() && o.variants != "all") {
        cfg.variants.clear();
        std::stringstream ss(o.variants);
        std::string name;
        while (std::getline(ss, name, ',')) cfg.variants.push_back(parse_variant(name));
    } else if (o.variants == "all") {
        cfg.variants = all_variants();
    }
    if (o.bus_width) cfg.bus.width_bits = *o.bus_width;
    if (o.burst_latency) cfg.bus.burst_latency = *o.burst_latency;
    if (o.max_burst) cfg.bus.max_burst_beats = *o.max_burst;
    validate_config(cfg);
    return cfg;
}

void emit(const Json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path + "'");
    f << j.dump(2) << '\n';
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f << text;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_analyze(const Options& o) {
    const RunConfig cfg = resolve(o);
    const auto t0 = std::chrono::steady_clock::now();
    const TileIOSummary io = analyze_tile(cfg.setup.tiling, cfg.setup.kernel);
    const PartitionReport check = verify_partition(io, cfg.setup.tiling, cfg.setup.kernel);
    const Json report = analyze_report(cfg.setup, io, check, o.verbose);
    emit(report, o.out);
    if (!o.out.empty() || o.verbose)
        std::cerr << "marsIn=" << io.inputs.size() << " marsOut=" << io.outputs.size()
                  << " partition=" << (check.ok ? "ok" : "FAILED") << " time=" << seconds_since(t0) << "s\n";
    for (const auto& p : check.problems) std::cerr << "partition: " << p << '\n';
    return check.ok ? 0 : kExitRuntime;
}

int cmd_layout(const Options& o) {
    const RunConfig cfg = resolve(o);
    const auto t0 = std::chrono::steady_clock::now();
    const TileIOSummary io = analyze_tile(cfg.setup.tiling, cfg.setup.kernel);
    const WeightMatrix w = build_weights(io.outputs);
    bool exact = true;
    const LayoutOrder layout = solve_layout(w, &exact);
    const BurstCount bursts = count_read_bursts(layout, io.inputs);
    emit(layout_report(cfg.setup, io, w, layout, bursts, exact), o.out);
    if (!o.export_ilp.empty()) write_text(o.export_ilp, export_ilp(w));
    if (!o.out.empty() || o.verbose)
        std::cerr << "objective=" << layout.objective << " readBursts=" << bursts.total << " writeBursts=1"
                  << " solver=" << (exact ? "exact" : "greedy") << " time=" << seconds_since(t0) << "s\n";
    return 0;
}

int cmd_simulate(const Options& o) {
    const RunConfig cfg = resolve(o);
    const Preset& s = cfg.setup;
    SimOptions sim;
    sim.bus = cfg.bus;
    sim.threads = std::max(1, o.threads);
    sim.keep_transfers = !o.transfers.empty();
    const TileAnalysis analysis = TileAnalysis::build(s.tiling, s.kernel);
    const ReferenceResult reference = run_reference(s.kernel, s.problem);
    sim.analysis = &analysis;
    sim.reference = &reference;

    Json reports = Json::array();
    std::vector<SimReport> results;
    std::string transfers_csv = "variant,tile,direction,startBit,lengthBits,usefulBits,cycles\n";
    bool all_correct = true;
    for (Variant v : cfg.variants) {
        const auto t0 = std::chrono::steady_clock::now();
        SimResult r = run_tiled(s.kernel, s.tiling, s.problem, v, sim);
        if (o.verbose) std::cerr << to_string(v) << ": " << seconds_since(t0) << "s\n";
        all_correct &= r.report.correct;
        reports.push_back(sim_report(r.report));
        if (sim.keep_transfers) {
            std::stringstream rows(r.log.to_csv(false));
            for (std::string line; std::getline(rows, line);) transfers_csv += to_string(v) + "," + line + "\n";
        }
        results.push_back(r.report);
    }

    // Cycles relative to compressed MARS when it ran, else to the first variant.
    const SimReport* base = &results.front();
    for (const SimReport& r : results)
        if (r.variant == Variant::MarsCompressed) base = &r;
    auto ratio = [](std::uint64_t a, std::uint64_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
    Json relative = Json::array();
    std::ostringstream csv;
    csv << "variant,readCycles,writeCycles,totalCycles,relativeReadCycles,relativeTotalCycles\n";
    for (const SimReport& r : results) {
        const double rr = ratio(r.reads.cycles, base->reads.cycles), rt = ratio(r.cycles, base->cycles);
        relative.push_back({{"variant", to_string(r.variant)}, {"relativeReadCycles", rr}, {"relativeTotalCycles", rt}});
        csv << to_string(r.variant) << ',' << r.reads.cycles << ',' << r.writes.cycles << ',' << r.cycles << ',' << rr
            << ',' << rt << '\n';
    }

    Json out{{"config", config_to_json(cfg)},
             {"layout", {{"order", analysis.layout.order}, {"objective", analysis.layout.objective},
                         {"readBurstsPerTile", analysis.bursts.total}, {"writeBurstsPerTile", 1}}},
             {"reports", reports},
             {"relativeToBaseline", to_string(base->variant)},
             {"relative", relative}};
    emit(out, o.out);
    if (!o.csv.empty()) write_text(o.csv, csv.str());
    if (!o.transfers.empty()) write_text(o.transfers, transfers_csv);
    if (!o.out.empty()) {
        for (const SimReport& r : results) {
            std::fprintf(stderr, "%-17s fpga=%zu host=%zu readBursts=%llu readCycles=%llu writeCycles=%llu correct=%s",
                         to_string(r.variant).c_str(), r.tiles_fpga, r.tiles_host,
                         static_cast<unsigned long long>(r.reads.bursts), static_cast<unsigned long long>(r.reads.cycles),
                         static_cast<unsigned long long>(r.writes.cycles), r.correct ? "true" : "false");
            if (r.ratio_with_padding)
                std::fprintf(stderr, " ratioTrue=%.3f ratioWithPadding=%.3f", *r.ratio_true, *r.ratio_with_padding);
            std::fprintf(stderr, "\n");
        }
    }
    return all_correct ? 0 : kExitIncorrect;
}

// ---- codec ------------------------------------------------------------------

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Raw word files: little-endian words of ceil(N/8) bytes each.
std::vector<Word> decode_raw(const std::vector<std::uint8_t>& bytes, int n) {
    const std::size_t width = static_cast<std::size_t>((n + 7) / 8);
    if (bytes.size() % width) throw Error("raw file size is not a multiple of " + std::to_string(width) + " bytes");
    std::vector<Word> words(bytes.size() / width);
    for (std::size_t i = 0; i < words.size(); ++i) {
        Word w = 0;
        for (std::size_t b = 0; b < width; ++b) w |= Word{bytes[i * width + b]} << (8 * b);
        if (w & ~low_mask(n)) throw Error("word " + std::to_string(i) + " does not fit in " + std::to_string(n) + " bits");
        words[i] = w;
    }
    return words;
}

std::vector<std::uint8_t> encode_raw(const std::vector<Word>& words, int n) {
    const std::size_t width = static_cast<std::size_t>((n + 7) / 8);
    std::vector<std::uint8_t> out;
    out.reserve(words.size() * width);
    for (Word w : words)
        for (std::size_t b = 0; b < width; ++b) out.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
    return out;
}

int cmd_codec_pack(const Options& o) {
    if (o.in.empty() || o.out.empty()) throw ConfigError("codec", "pack needs --in and --out");
    const DataTypeSpec dtype = parse_dtype(o.dtype.empty() ? "fixed:18" : o.dtype);
    BusConfig bus;
    if (o.bus_width) bus.width_bits = *o.bus_width;
    bus.validate();
    const int n = dtype.total_bits;
    const std::vector<Word> words = decode_raw(read_file(o.in), n);
    std::vector<std::size_t> sizes;
    if (o.split.empty()) {
        sizes.push_back(words.size());
    } else {
        std::stringstream ss(o.split);
        for (std::string part; std::getline(ss, part, ',');) {
            const auto v = parse_size_list(part, "split");
            if (v.size() != 1 || v[0] < 1) throw ConfigError("split", "sizes must be positive integers");
            sizes.push_back(static_cast<std::size_t>(v[0]));
        }
    }
    std::size_t total = 0;
    for (auto s : sizes) total += s;
    if (total != words.size() || words.empty())
        throw ConfigError("split", "sizes add up to " + std::to_string(total) + " but the file holds " +
                                       std::to_string(words.size()) + " words");
    std::vector<BitStream> streams;
    std::vector<std::uint32_t> counts;
    std::size_t at = 0;
    for (auto s : sizes) {
        streams.push_back(compress_mars(std::span<const Word>(words).subspan(at, s), n));
        counts.push_back(static_cast<std::uint32_t>(s));
        at += s;
    }
    const CompressedBlock block = pack_block(streams, counts, n, bus.width_bits);
    write_file(o.out, serialize_block(block));
    if (o.verbose)
        std::cerr << "packed " << words.size() << " words into " << block.content_bits << " bits ("
                  << block.mars_count() << " MARS)\n";
    return 0;
}

int cmd_codec_unpack(const Options& o) {
    if (o.in.empty() || o.out.empty()) throw ConfigError("codec", "unpack needs --in and --out");
    const auto bytes = read_file(o.in);
    const CompressedBlock block = deserialize_block(bytes);
    write_file(o.out, encode_raw(decompress_block(block), block.word_bits));
    return 0;
}

int cmd_codec_inspect(const Options& o) {
    if (o.in.empty()) throw ConfigError("codec", "inspect needs --in");
    const auto bytes = read_file(o.in);
    const CompressedBlock block = deserialize_block(bytes);
    Json mars = Json::array();
    std::uint64_t words = 0;
    for (std::size_t k = 0; k < block.mars_count(); ++k) {
        const SeekRange r = seek_mars(block, k);
        mars.push_back({{"index", k},
                        {"wordCount", block.word_counts[k]},
                        {"coarse", block.markers[k].coarse},
                        {"fine", block.markers[k].fine},
                        {"bitOffset", block.markers[k].bit_position(block.bus_width)},
                        {"seekWords", {r.first_word, r.end_word}}});
        words += block.word_counts[k];
    }
    emit(Json{{"wordBits", block.word_bits},
              {"busWidth", block.bus_width},
              {"marsCount", block.mars_count()},
              {"words", words},
              {"payloadBits", block.stream.size_bits()},
              {"mars", mars}},
         "");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"burstlab: MARS extraction, layout, compression and burst simulation for tiled stencils"};
    app.require_subcommand(1);
    Options o;
    if (const char* env = std::getenv("BURSTLAB_THREADS")) o.threads = std::max(1, std::atoi(env));

    auto* analyze = app.add_subcommand("analyze", "Extract output and input MARS of one full tile");
    add_setup_options(analyze, o);

    auto* layout = app.add_subcommand("layout", "Order output MARS to maximize coalesced reads");
    add_setup_options(layout, o);
    layout->add_option("--export-ilp", o.export_ilp, "Write the layout model in CPLEX LP format");

    auto* simulate = app.add_subcommand("simulate", "Run the tiled simulation for one or more variants");
    add_setup_options(simulate, o);
    add_bus_options(simulate, o);
    simulate->add_option("--variants", o.variants,
                         "all, or a comma list of mars-compressed, mars-packed, mars-padded, baseline-minimal, "
                         "baseline-bbox");
    simulate->add_option("--threads", o.threads, "Worker threads per wavefront (env BURSTLAB_THREADS)");
    simulate->add_option("--csv", o.csv, "Write cycles relative to the compressed variant as CSV");
    simulate->add_option("--transfers", o.transfers, "Write every full-tile transfer as CSV");

    auto* codec = app.add_subcommand("codec", "Pack, unpack or inspect compressed block files");
    codec->require_subcommand(1);
    auto* pack = codec->add_subcommand("pack", "Compress a raw word file into a block file");
    pack->add_option("--in", o.in, "Raw words, little-endian, ceil(N/8) bytes each")->required();
    pack->add_option("--out", o.out, "Block file")->required();
    pack->add_option("--dtype", o.dtype, "Word type; its total bits give N (default fixed:18)");
    pack->add_option("--split", o.split, "Comma list of MARS sizes in words (default: one MARS)");
    pack->add_option("--bus-width", o.bus_width, "Bus width for markers (default 64)");
    pack->add_flag("--verbose", o.verbose);
    auto* unpack = codec->add_subcommand("unpack", "Decompress a block file into raw words");
    unpack->add_option("--in", o.in, "Block file")->required();
    unpack->add_option("--out", o.out, "Raw word file")->required();
    auto* inspect = codec->add_subcommand("inspect", "Print markers and sizes of a block file");
    inspect->add_option("--in", o.in, "Block file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(o);
        if (layout->parsed()) return cmd_layout(o);
        if (simulate->parsed()) return cmd_simulate(o);
        if (pack->parsed()) return cmd_codec_pack(o);
        if (unpack->parsed()) return cmd_codec_unpack(o);
        if (inspect->parsed()) return cmd_codec_inspect(o);
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
