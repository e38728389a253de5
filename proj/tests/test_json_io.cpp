#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <burstlab/json_io.hpp>

#include <cstdio>
#include <fstream>

using namespace burstlab;

namespace {

std::string error_path(const Json& j) {
    try {
        config_from_json(j);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

Json full_config() {
    return Json::parse(R"({
        "kernel": {"name": "avg3", "deps": [[1, -1], [1, 0], [1, 1]], "coeffs": "1/3",
                   "dtype": {"kind": "fixed", "totalBits": 24, "fracBits": 12}},
        "tiling": {"kind": "diamond1d", "sizes": [8, 8]},
        "problem": {"timeSteps": 10, "spatialSizes": [30], "init": {"kind": "random", "low": -1, "high": 1, "seed": 3}},
        "bus": {"widthBits": 128, "burstLatencyCycles": 20, "maxBurstBeats": 64},
        "variants": ["mars-compressed", "baseline-bbox"]
    })");
}

}  // namespace

TEST_CASE("full config") {
    const auto cfg = config_from_json(full_config());
    CHECK(cfg.setup.kernel.name == "avg3");
    CHECK(cfg.setup.kernel.dim == 2);
    CHECK(cfg.setup.kernel.coeffs.front().rational);
    CHECK(cfg.setup.kernel.dtype == DataTypeSpec::fixed(24, 12));
    CHECK(cfg.setup.tiling.kind == TilingKind::Diamond1D);
    CHECK(cfg.setup.problem.init.kind == InitKind::Random);
    CHECK(cfg.setup.problem.init.seed == 3);
    CHECK(cfg.bus.width_bits == 128);
    CHECK(cfg.bus.burst_latency == 20);
    CHECK(cfg.bus.max_burst_beats == 64);
    CHECK(cfg.variants == std::vector<Variant>{Variant::MarsCompressed, Variant::BaselineBbox});
}

TEST_CASE("preset with overrides") {
    const auto cfg = config_from_json(Json::parse(
        R"({"preset": "jacobi-1d", "tiling": {"sizes": [10, 10]}, "kernel": {"dtype": "fixed:12"},
            "problem": {"timeSteps": 7, "init": "constant:0.5"}})"));
    CHECK(cfg.setup.kernel.name == "jacobi-1d");
    CHECK(cfg.setup.tiling.sizes == std::vector<std::int64_t>{10, 10});
    CHECK(cfg.setup.kernel.dtype.total_bits == 12);
    CHECK(cfg.setup.problem.time_steps == 7);
    CHECK(cfg.setup.problem.init.kind == InitKind::Constant);
    CHECK(cfg.setup.problem.init.value == 0.5);
    CHECK(cfg.variants == all_variants());
}

TEST_CASE("config round trip") {
    const auto a = config_from_json(full_config());
    const Json j = config_to_json(a);
    const auto b = config_from_json(j);
    CHECK(config_to_json(b) == j);
    for (const auto& name : preset_names()) {
        const auto p = config_from_json(Json{{"preset", name}});
        CHECK(config_to_json(config_from_json(config_to_json(p))) == config_to_json(p));
    }
}

TEST_CASE("config errors name the field") {
    auto j = full_config();
    j["kernel"]["deps"][1] = Json::array({1, 0, 0});
    CHECK(error_path(j) == "kernel.deps[1]");

    j = full_config();
    j["kernel"]["colour"] = "red";
    CHECK(error_path(j) == "kernel.colour");

    j = full_config();
    j["kernel"]["dtype"] = "fixed:99";
    CHECK(error_path(j).rfind("kernel.dtype", 0) == 0);

    j = full_config();
    j["variants"][1] = "mars-zip";
    CHECK(error_path(j) == "variants[1]");

    j = full_config();
    j["bus"]["widthBits"] = 48;
    CHECK(error_path(j) == "bus.widthBits");

    j = full_config();
    j["tiling"]["sizes"] = Json::array({8, 8, 8});
    CHECK(error_path(j) == "tiling.sizes");

    j = full_config();
    j["problem"]["spatialSizes"] = Json::array({30, 30});
    CHECK(error_path(j) == "problem.spatialSizes");

    j = full_config();
    j["problem"]["timeSteps"] = "ten";
    CHECK(error_path(j) == "problem.timeSteps");

    j = full_config();
    j.erase("tiling");
    CHECK(error_path(j) == "tiling");

    j = full_config();
    j["kernel"]["coeffs"] = Json::array({"1/0"});
    CHECK(error_path(j) == "kernel.coeffs[0]");

    CHECK(error_path(Json{{"preset", "heat-3d"}}) == "preset");
    CHECK(error_path(Json::array()) == "(root)");
}

TEST_CASE("config files") {
    const std::string path = "test_json_io_config.json";
    {
        std::ofstream out(path);
        out << full_config().dump(2);
    }
    CHECK(load_config(path).setup.kernel.name == "avg3");
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_config(path), ConfigError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config("does/not/exist.json"), ConfigError);
}

TEST_CASE("size lists and init strings") {
    CHECK(parse_size_list("6x6", "tile") == std::vector<std::int64_t>{6, 6});
    CHECK(parse_size_list("4x5x7", "tile") == std::vector<std::int64_t>{4, 5, 7});
    CHECK(parse_size_list("40", "n") == std::vector<std::int64_t>{40});
    CHECK_THROWS_AS(parse_size_list("6by6", "tile"), ConfigError);
    CHECK_THROWS_AS(parse_size_list("6x", "tile"), ConfigError);
    CHECK(parse_init("polybench").kind == InitKind::PolyBench);
    CHECK(parse_init("constant:2.5").value == 2.5);
    const auto r = parse_init("random:-1:1");
    CHECK(r.kind == InitKind::Random);
    CHECK(r.low == -1.0);
    CHECK(r.high == 1.0);
    CHECK_THROWS_AS(parse_init("gaussian"), ConfigError);
    CHECK_THROWS_AS(parse_init("random:1"), ConfigError);
}

TEST_CASE("analyze and layout reports") {
    const auto p = make_preset("jacobi-1d");
    const auto io = analyze_tile(p.tiling, p.kernel);
    const auto check = verify_partition(io, p.tiling, p.kernel);
    const Json a = analyze_report(p, io, check, false);
    CHECK(a["marsIn"] == 7);
    CHECK(a["marsOut"] == 4);
    CHECK(a["flowInWords"] == 13);
    CHECK(a["flowOutWords"] == 10);
    CHECK(a["partition"]["ok"] == true);
    CHECK_FALSE(a["outputs"][0].contains("points"));
    CHECK(analyze_report(p, io, check, true)["outputs"][0].contains("points"));

    const auto w = build_weights(io.outputs);
    const auto l = solve_layout_exact(w);
    const Json r = layout_report(p, io, w, l, count_read_bursts(l, io.inputs), true);
    CHECK(r["objective"] == 4);
    CHECK(r["totalReadBursts"] == 3);
    CHECK(r["writeBursts"] == 1);
    CHECK(r["solver"] == "exact");
    CHECK(r["order"].size() == 4);
}

TEST_CASE("sim report fields") {
    SimReport s;
    s.variant = Variant::MarsPacked;
    s.correct = true;
    Json j = sim_report(s);
    CHECK(j["variant"] == "mars-packed");
    CHECK(j["compressionRatioTrue"].is_null());
    CHECK(j["correct"] == true);
    s.variant = Variant::MarsCompressed;
    s.ratio_true = 2.0;
    s.ratio_with_padding = 3.5;
    j = sim_report(s);
    CHECK(j["compressionRatioTrue"] == 2.0);
    CHECK(j["compressionRatioWithPadding"] == 3.5);
    CHECK(j["reads"].contains("usefulBits"));
}
