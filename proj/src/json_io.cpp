#include <burstlab/json_io.hpp>

#include <fstream>
#include <sstream>

namespace burstlab {

namespace {

std::string field(const std::string& parent, const std::string& name) {
    return parent.empty() ? name : parent + "." + name;
}
std::string item(const std::string& parent, std::size_t k) { return parent + "[" + std::to_string(k) + "]"; }

const Json& require_object(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "(root)" : path, "expected an object");
    return j;
}

void reject_unknown(const Json& j, const std::string& path, std::initializer_list<const char*> known) {
    for (const auto& [key, _] : j.items())
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw ConfigError(field(path, key), "unknown field");
}

std::int64_t get_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<std::int64_t>();
}

double get_number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

std::string get_string(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

std::vector<std::int64_t> get_int_list(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array of integers");
    std::vector<std::int64_t> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(get_int(j[k], item(path, k)));
    return out;
}

// Rethrows a ConfigError raised by a validator with `prefix` in front of its field.
template <typename F>
void with_prefix(const std::string& prefix, F&& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        std::string what = e.what();
        what.erase(0, e.path().size() + 2);
        throw ConfigError(prefix, what);
    }
}

void read_dtype(const Json& j, DataTypeSpec& d) {
    const std::string path = "kernel.dtype";
    if (j.is_string()) {
        with_prefix(path, [&] { d = parse_dtype(j.get<std::string>()); });
        return;
    }
    require_object(j, path);
    reject_unknown(j, path, {"kind", "totalBits", "fracBits", "signed"});
    std::string kind = d.kind == NumberKind::Float ? "float" : "fixed";
    if (j.contains("kind")) kind = get_string(j["kind"], path + ".kind");
    const int bits = j.contains("totalBits") ? static_cast<int>(get_int(j["totalBits"], path + ".totalBits")) : d.total_bits;
    if (kind == "float") {
        d = DataTypeSpec::floating(bits);
    } else if (kind == "fixed") {
        std::optional<int> frac;
        if (j.contains("fracBits")) frac = static_cast<int>(get_int(j["fracBits"], path + ".fracBits"));
        bool is_signed = true;
        if (j.contains("signed")) {
            if (!j["signed"].is_boolean()) throw ConfigError(path + ".signed", "expected a boolean");
            is_signed = j["signed"].get<bool>();
        }
        d = DataTypeSpec::fixed(bits, frac, is_signed);
    } else {
        throw ConfigError(path + ".kind", "expected 'fixed' or 'float'");
    }
    d.validate();
}

void read_kernel(const Json& j, Kernel& k) {
    const std::string path = "kernel";
    require_object(j, path);
    reject_unknown(j, path, {"name", "deps", "coeffs", "dtype"});
    if (j.contains("name")) k.name = get_string(j["name"], path + ".name");
    if (j.contains("deps")) {
        const Json& deps = j["deps"];
        if (!deps.is_array() || deps.empty()) throw ConfigError(path + ".deps", "expected a non-empty array");
        k.deps.clear();
        for (std::size_t i = 0; i < deps.size(); ++i) {
            const auto v = get_int_list(deps[i], item(path + ".deps", i));
            if (v.empty() || v.size() > kMaxDims)
                throw ConfigError(item(path + ".deps", i), "expected 2 to 4 integers");
            k.deps.push_back({Point::from(v)});
        }
        k.dim = k.deps.front().delta.size();
    }
    if (j.contains("coeffs")) {
        const Json& c = j["coeffs"];
        const Json list = c.is_array() ? c : Json::array({c});
        k.coeffs.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string p = item(path + ".coeffs", i);
            std::string text;
            if (list[i].is_string()) {
                text = list[i].get<std::string>();
            } else if (list[i].is_number()) {
                std::ostringstream os;
                os << list[i];
                text = os.str();
            } else {
                throw ConfigError(p, "expected a number or a string such as \"1/9\"");
            }
            with_prefix(p, [&] { k.coeffs.push_back(Coefficient::parse(text)); });
        }
    }
    if (j.contains("dtype")) read_dtype(j["dtype"], k.dtype);
}

void read_tiling(const Json& j, TilingScheme& ts) {
    const std::string path = "tiling";
    require_object(j, path);
    reject_unknown(j, path, {"kind", "sizes", "skew"});
    if (j.contains("kind")) {
        const std::string kind = get_string(j["kind"], path + ".kind");
        if (kind == "diamond1d") {
            ts.kind = TilingKind::Diamond1D;
            ts.skew.clear();
        } else if (kind == "skewed-rect") {
            ts.kind = TilingKind::SkewedRect;
        } else {
            throw ConfigError(path + ".kind", "expected 'diamond1d' or 'skewed-rect'");
        }
    }
    if (j.contains("sizes")) ts.sizes = get_int_list(j["sizes"], path + ".sizes");
    if (j.contains("skew")) {
        const Json& s = j["skew"];
        if (!s.is_array()) throw ConfigError(path + ".skew", "expected a matrix");
        ts.skew.clear();
        for (std::size_t r = 0; r < s.size(); ++r) ts.skew.push_back(get_int_list(s[r], item(path + ".skew", r)));
    }
}

void read_init(const Json& j, InitSpec& init) {
    const std::string path = "problem.init";
    if (j.is_string()) {
        with_prefix(path, [&] { init = parse_init(j.get<std::string>()); });
        return;
    }
    require_object(j, path);
    reject_unknown(j, path, {"kind", "value", "low", "high", "seed"});
    if (j.contains("kind")) {
        const std::string kind = get_string(j["kind"], path + ".kind");
        if (kind == "polybench") init.kind = InitKind::PolyBench;
        else if (kind == "constant") init.kind = InitKind::Constant;
        else if (kind == "random") init.kind = InitKind::Random;
        else throw ConfigError(path + ".kind", "expected 'polybench', 'constant' or 'random'");
    }
    if (j.contains("value")) init.value = get_number(j["value"], path + ".value");
    if (j.contains("low")) init.low = get_number(j["low"], path + ".low");
    if (j.contains("high")) init.high = get_number(j["high"], path + ".high");
    if (j.contains("seed")) init.seed = static_cast<std::uint64_t>(get_int(j["seed"], path + ".seed"));
}

void read_problem(const Json& j, ProblemInstance& pi) {
    const std::string path = "problem";
    require_object(j, path);
    reject_unknown(j, path, {"timeSteps", "spatialSizes", "init"});
    if (j.contains("timeSteps")) pi.time_steps = get_int(j["timeSteps"], path + ".timeSteps");
    if (j.contains("spatialSizes")) pi.spatial_sizes = get_int_list(j["spatialSizes"], path + ".spatialSizes");
    if (j.contains("init")) read_init(j["init"], pi.init);
}

void read_bus(const Json& j, BusConfig& bus) {
    const std::string path = "bus";
    require_object(j, path);
    reject_unknown(j, path, {"widthBits", "burstLatencyCycles", "maxBurstBeats"});
    if (j.contains("widthBits")) bus.width_bits = static_cast<int>(get_int(j["widthBits"], path + ".widthBits"));
    if (j.contains("burstLatencyCycles"))
        bus.burst_latency = static_cast<int>(get_int(j["burstLatencyCycles"], path + ".burstLatencyCycles"));
    if (j.contains("maxBurstBeats"))
        bus.max_burst_beats = static_cast<int>(get_int(j["maxBurstBeats"], path + ".maxBurstBeats"));
}

std::string tiling_kind_name(TilingKind k) { return k == TilingKind::Diamond1D ? "diamond1d" : "skewed-rect"; }

std::string init_kind_name(InitKind k) {
    switch (k) {
        case InitKind::PolyBench: return "polybench";
        case InitKind::Constant: return "constant";
        case InitKind::Random: return "random";
    }
    return "polybench";
}

}  // namespace

std::vector<std::int64_t> parse_size_list(const std::string& text, const std::string& path) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (part.empty() || used != part.size()) throw ConfigError(path, "expected sizes like 6x6, got '" + text + "'");
        out.push_back(v);
    }
    if (out.empty() || text.back() == 'x') throw ConfigError(path, "expected sizes like 6x6, got '" + text + "'");
    return out;
}

InitSpec parse_init(const std::string& text) {
    InitSpec init;
    auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    auto number = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        throw ConfigError("init", "bad number '" + s + "' in '" + text + "'");
    };
    if (kind == "polybench" && rest.empty()) {
        init.kind = InitKind::PolyBench;
    } else if (kind == "constant") {
        init.kind = InitKind::Constant;
        if (!rest.empty()) init.value = number(rest);
    } else if (kind == "random") {
        init.kind = InitKind::Random;
        if (!rest.empty()) {
            auto c = rest.find(':');
            if (c == std::string::npos) throw ConfigError("init", "expected random:LOW:HIGH");
            init.low = number(rest.substr(0, c));
            init.high = number(rest.substr(c + 1));
        }
    } else {
        throw ConfigError("init", "expected polybench, constant:V or random[:LOW:HIGH], got '" + text + "'");
    }
    return init;
}

RunConfig config_from_json(const Json& j) {
    require_object(j, "");
    reject_unknown(j, "", {"preset", "kernel", "tiling", "problem", "bus", "variants"});
    RunConfig cfg;
    if (j.contains("preset")) {
        cfg.setup = make_preset(get_string(j["preset"], "preset"));
    } else {
        for (const char* section : {"kernel", "tiling", "problem"})
            if (!j.contains(section)) throw ConfigError(section, "required when no preset is given");
        cfg.setup = Preset{};
        cfg.setup.kernel.dtype = DataTypeSpec::fixed(18);
        cfg.setup.kernel.coeffs = {Coefficient::parse("1")};
    }
    Preset& s = cfg.setup;
    if (j.contains("kernel")) read_kernel(j["kernel"], s.kernel);
    if (j.contains("tiling")) read_tiling(j["tiling"], s.tiling);
    if (j.contains("problem")) read_problem(j["problem"], s.problem);
    if (j.contains("bus")) read_bus(j["bus"], cfg.bus);
    if (j.contains("variants")) {
        const Json& v = j["variants"];
        if (!v.is_array() || v.empty()) throw ConfigError("variants", "expected a non-empty array");
        cfg.variants.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string p = item("variants", i);
            with_prefix(p, [&] { cfg.variants.push_back(parse_variant(get_string(v[i], p))); });
        }
    }
    validate_config(cfg);
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    const Preset& s = cfg.setup;
    s.kernel.validate();
    s.tiling.validate();
    if (s.tiling.point_dims() != s.kernel.dim)
        throw ConfigError("tiling.sizes", "expected " + std::to_string(s.kernel.dim) + " sizes for kernel " + s.kernel.name);
    s.problem.validate(s.kernel);
    cfg.bus.validate();
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
    return config_from_json(j);
}

Json to_json(const TileCoord& c) { return Json(std::vector<std::int64_t>(c.begin(), c.end())); }
Json to_json(const Point& p) { return Json(std::vector<std::int64_t>(p.begin(), p.end())); }

Json to_json(const TransferTotals& t) {
    return Json{{"bursts", t.bursts}, {"cycles", t.cycles}, {"transferredBits", t.transferred_bits},
                {"usefulBits", t.useful_bits}};
}

Json config_to_json(const RunConfig& cfg) {
    const Preset& s = cfg.setup;
    Json deps = Json::array();
    for (const auto& d : s.kernel.deps) deps.push_back(to_json(d.delta));
    Json coeffs = Json::array();
    for (const auto& c : s.kernel.coeffs) coeffs.push_back(c.text);
    Json dtype{{"kind", s.kernel.dtype.kind == NumberKind::Float ? "float" : "fixed"},
               {"totalBits", s.kernel.dtype.total_bits}};
    if (s.kernel.dtype.kind == NumberKind::Fixed) {
        dtype["fracBits"] = s.kernel.dtype.frac_bits;
        dtype["signed"] = s.kernel.dtype.is_signed;
    }
    Json tiling{{"kind", tiling_kind_name(s.tiling.kind)}, {"sizes", s.tiling.sizes}};
    if (!s.tiling.skew.empty()) tiling["skew"] = s.tiling.skew;
    const InitSpec& init = s.problem.init;
    Json init_json{{"kind", init_kind_name(init.kind)}};
    if (init.kind == InitKind::Constant) init_json["value"] = init.value;
    if (init.kind == InitKind::Random) {
        init_json["low"] = init.low;
        init_json["high"] = init.high;
        init_json["seed"] = init.seed;
    }
    Json variants = Json::array();
    for (Variant v : cfg.variants) variants.push_back(to_string(v));
    return Json{{"kernel", {{"name", s.kernel.name}, {"deps", deps}, {"coeffs", coeffs}, {"dtype", dtype}}},
                {"tiling", tiling},
                {"problem",
                 {{"timeSteps", s.problem.time_steps}, {"spatialSizes", s.problem.spatial_sizes}, {"init", init_json}}},
                {"bus",
                 {{"widthBits", cfg.bus.width_bits},
                  {"burstLatencyCycles", cfg.bus.burst_latency},
                  {"maxBurstBeats", cfg.bus.max_burst_beats}}},
                {"variants", variants}};
}

Json analyze_report(const Preset& setup, const TileIOSummary& io, const PartitionReport& check, bool verbose) {
    Json outputs = Json::array();
    std::size_t flow_out = 0, flow_in = 0;
    for (const Mars& m : io.outputs) {
        Json sig = Json::array();
        for (const TileCoord& c : m.signature.offsets) sig.push_back(to_json(c));
        Json o{{"id", m.id}, {"size", m.size_words()}, {"signature", sig}};
        if (verbose) {
            Json pts = Json::array();
            for (const Point& p : m.points) pts.push_back(to_json(p));
            o["points"] = pts;
        }
        outputs.push_back(o);
        flow_out += m.size_words();
    }
    Json inputs = Json::array();
    for (const InputMars& in : io.inputs) {
        const std::size_t size = io.outputs[in.mars_id].size_words();
        inputs.push_back({{"producerOffset", to_json(in.producer_offset)}, {"marsId", in.mars_id}, {"size", size}});
        flow_in += size;
    }
    return Json{{"kernel", setup.kernel.name},
                {"tiling", {{"kind", tiling_kind_name(setup.tiling.kind)}, {"sizes", setup.tiling.sizes}}},
                {"marsIn", io.inputs.size()},
                {"marsOut", io.outputs.size()},
                {"flowInWords", flow_in},
                {"flowOutWords", flow_out},
                {"outputs", outputs},
                {"inputs", inputs},
                {"partition", {{"ok", check.ok}, {"problems", check.problems}}}};
}

Json layout_report(const Preset& setup, const TileIOSummary& io, const WeightMatrix& w, const LayoutOrder& layout,
                   const BurstCount& bursts, bool exact) {
    Json weights = Json::array();
    for (std::size_t i = 0; i < w.n; ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < w.n; ++j) row.push_back(w.at(i, j));
        weights.push_back(row);
    }
    Json per = Json::array();
    std::size_t consumed = 0;
    for (const ProducerBursts& pb : bursts.per_producer) {
        per.push_back({{"producerOffset", to_json(pb.producer_offset)}, {"mars", pb.mars}, {"bursts", pb.bursts}});
        consumed += pb.mars.size();
    }
    return Json{{"kernel", setup.kernel.name},
                {"tiling", {{"kind", tiling_kind_name(setup.tiling.kind)}, {"sizes", setup.tiling.sizes}}},
                {"marsOut", io.outputs.size()},
                {"solver", exact ? "exact" : "greedy"},
                {"order", layout.order},
                {"objective", layout.objective},
                {"weights", weights},
                {"burstsPerProducer", per},
                {"consumedMars", consumed},
                {"totalReadBursts", bursts.total},
                {"writeBursts", 1}};
}

Json sim_report(const SimReport& r) {
    auto optional_number = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    return Json{{"variant", to_string(r.variant)},
                {"tilesOnFpgaPath", r.tiles_fpga},
                {"tilesOnHostPath", r.tiles_host},
                {"reads", to_json(r.reads)},
                {"writes", to_json(r.writes)},
                {"cycles", r.cycles},
                {"compressionRatioTrue", optional_number(r.ratio_true)},
                {"compressionRatioWithPadding", optional_number(r.ratio_with_padding)},
                {"expandedBlocks", r.expanded_blocks},
                {"saturations", r.saturations},
                {"referenceSaturations", r.reference_saturations},
                {"mismatches", r.mismatches},
                {"correct", r.correct}};
}

}  // namespace burstlab
