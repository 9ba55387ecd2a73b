#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "ckdsim/config.hpp"
#include "ckdsim/image.hpp"
#include "ckdsim/io.hpp"
#include "ckdsim/wavefunction.hpp"

namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path d = fs::temp_directory_path() / "ckdsim_io_test";
    fs::create_directories(d);
    return d;
}

TEST(Config, SerializeParseRoundTrip) {
    ckd::ExperimentConfig cfg;
    cfg.params.alpha = 1.25;
    cfg.grid.m = 4096;
    cfg.ensemble.seed = 987654321;
    cfg.husimi.zero_threshold = 0.05;
    const std::string text = ckd::serialize_config(cfg);
    ckd::ExperimentConfig back;
    back.params.alpha = -7.0;  // will be overwritten
    ckd::apply_config_text(back, text);
    EXPECT_EQ(ckd::serialize_config(back), text);
}

TEST(Config, EveryKeySettable) {
    ckd::ExperimentConfig cfg;
    for (const auto& key : ckd::config_keys()) {
        EXPECT_NO_THROW(ckd::set_config_key(cfg, key, "8")) << key;
    }
}

TEST(Config, UnknownKeyReportsLineNumber) {
    ckd::ExperimentConfig cfg;
    try {
        ckd::apply_config_text(cfg, "system.alpha = 1\n\n# comment\nbogus.key = 3\n");
        FAIL() << "expected ConfigError";
    } catch (const ckd::ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("bogus.key"), std::string::npos);
    }
}

TEST(Config, BadNumberRejected) {
    ckd::ExperimentConfig cfg;
    EXPECT_THROW(ckd::apply_config_text(cfg, "system.alpha = fast\n"), ckd::ConfigError);
    EXPECT_THROW(ckd::apply_config_text(cfg, "grid.m = 1024.5\n"), ckd::ConfigError);
    EXPECT_THROW(ckd::apply_config_text(cfg, "system.alpha 1\n"), ckd::ConfigError);
}

TEST(Config, CommentsAndWhitespaceTolerated) {
    ckd::ExperimentConfig cfg;
    ckd::apply_config_text(cfg, "  system.alpha =  2.5  # stiffness\n\t\nstate.x0=0.25\n");
    EXPECT_DOUBLE_EQ(cfg.params.alpha, 2.5);
    EXPECT_DOUBLE_EQ(cfg.state.x0, 0.25);
}

TEST(Config, OverrideForm) {
    ckd::ExperimentConfig cfg;
    ckd::apply_config_override(cfg, "grid.m=512");
    EXPECT_EQ(cfg.grid.m, 512u);
    EXPECT_THROW(ckd::apply_config_override(cfg, "grid.m"), ckd::ConfigError);
}

TEST(Config, Presets) {
    ckd::ExperimentConfig cfg;
    ckd::apply_preset(cfg, "harmonic-dissipative");
    EXPECT_DOUBLE_EQ(cfg.params.alpha, 1.0);
    EXPECT_DOUBLE_EQ(cfg.params.beta, 0.0);
    EXPECT_DOUBLE_EQ(cfg.params.delta, 0.1);
    ckd::apply_preset(cfg, "conservative-chaotic");
    EXPECT_DOUBLE_EQ(cfg.params.alpha, -1.0);
    EXPECT_DOUBLE_EQ(cfg.params.delta, 0.0);
    ckd::apply_preset(cfg, "chaotic-dissipative");
    EXPECT_DOUBLE_EQ(cfg.params.delta, 0.1);
    EXPECT_EQ(cfg.grid.m, 8192u);
    for (const auto& name : ckd::preset_names()) {
        ckd::apply_preset(cfg, name);
        EXPECT_NO_THROW(ckd::validate_config(cfg)) << name;
        EXPECT_DOUBLE_EQ(cfg.params.gamma, 2.5);
        EXPECT_DOUBLE_EQ(cfg.params.omega, 2.0);
    }
    EXPECT_THROW(ckd::apply_preset(cfg, "synchronized-swimming"), ckd::ConfigError);
}

TEST(Config, ValidateCatchesBadSections) {
    ckd::ExperimentConfig cfg;
    cfg.quantum.dt = 0.0;
    EXPECT_THROW(ckd::validate_config(cfg), ckd::ConfigError);
    cfg = ckd::ExperimentConfig{};
    cfg.husimi.pad = 3;
    EXPECT_THROW(ckd::validate_config(cfg), ckd::ConfigError);
    cfg = ckd::ExperimentConfig{};
    cfg.otoc.samples = 1;
    EXPECT_THROW(ckd::validate_config(cfg), ckd::ConfigError);
}

TEST(Format, ShortestRoundTripDecimals) {
    EXPECT_EQ(ckd::format_double(0.1), "0.1");
    EXPECT_EQ(ckd::format_double(1.0), "1");
    EXPECT_EQ(ckd::format_double(-2.5e-7), "-2.5e-07");
    EXPECT_EQ(ckd::format_double(1.0 / 3.0), "0.3333333333333333");
    // a value needing all 17 digits survives the round trip
    const double v = 0.1234567890123456789;
    EXPECT_EQ(std::stod(ckd::format_double(v)), v);
}

TEST(Sha256, KnownVectors) {
    EXPECT_EQ(ckd::sha256_hex(std::string_view{}),
              "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(ckd::sha256_hex(std::string_view{"abc"}),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(ckd::sha256_hex(std::string_view{
                  "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"}),
              "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    // multi-block message (> 64 bytes)
    const std::string m(1000, 'a');
    EXPECT_EQ(ckd::sha256_hex(m), ckd::sha256_hex(m));
    EXPECT_EQ(ckd::sha256_hex(std::string(64, 'x')).size(), 64u);
}

TEST(Csv, HeaderRowsAndWidthCheck) {
    ckd::Csv csv({"t", "x"});
    csv.row({0.5, -1.25});
    EXPECT_EQ(csv.text(), "t,x\n0.5,-1.25\n");
    EXPECT_THROW(csv.row({1.0}), ckd::IoError);
}

TEST(TextFile, RoundTripAndMissingFile) {
    const auto d = temp_dir();
    const auto p = d / "t.txt";
    ckd::write_text_file(p, "line\n");
    EXPECT_EQ(ckd::read_text_file(p), "line\n");
    EXPECT_THROW(ckd::read_text_file(d / "absent.txt"), ckd::IoError);
}

TEST(Checkpoint, WavefunctionRoundTripIsExact) {
    const auto d = temp_dir();
    ckd::DuffingParams pr;
    ckd::GaussianState st;
    const auto g = ckd::make_grid(-12.0, 12.0, 64);
    auto w = ckd::init_gaussian(g, st, pr);
    w.t = 3.25;
    const auto p = d / "psi.ckpt";
    ckd::write_wavefunction(p, w, pr);
    const auto back = ckd::read_wavefunction(p, &pr);
    EXPECT_EQ(back.grid, w.grid);
    EXPECT_EQ(back.t, w.t);
    ASSERT_EQ(back.amp.size(), w.amp.size());
    for (std::size_t j = 0; j < w.amp.size(); ++j) EXPECT_EQ(back.amp[j], w.amp[j]);
}

TEST(Checkpoint, ParameterFingerprintGuard) {
    const auto d = temp_dir();
    ckd::DuffingParams pr;
    const auto g = ckd::make_grid(-12.0, 12.0, 32);
    const auto w = ckd::init_gaussian(g, ckd::GaussianState{}, pr);
    const auto p = d / "psi_fp.ckpt";
    ckd::write_wavefunction(p, w, pr);
    ckd::DuffingParams other = pr;
    other.delta = 0.25;
    EXPECT_THROW(ckd::read_wavefunction(p, &other), ckd::IoError);
    EXPECT_NO_THROW(ckd::read_wavefunction(p, nullptr));
}

TEST(Checkpoint, RejectsGarbage) {
    const auto d = temp_dir();
    const auto p = d / "junk.ckpt";
    ckd::write_text_file(p, "definitely not a checkpoint");
    EXPECT_THROW(ckd::read_wavefunction(p), ckd::IoError);
}

TEST(Png, DeterministicAndWellFormed) {
    ckd::Image img;
    img.width = 17;
    img.height = 9;
    img.rgb.assign(3 * 17 * 9, 0);
    for (std::size_t i = 0; i < img.rgb.size(); ++i)
        img.rgb[i] = static_cast<std::uint8_t>((i * 31) % 251);
    const auto a = ckd::encode_png(img);
    const auto b = ckd::encode_png(img);
    EXPECT_EQ(a, b);
    ASSERT_GE(a.size(), 8u);
    const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    for (int i = 0; i < 8; ++i) EXPECT_EQ(a[static_cast<std::size_t>(i)], sig[i]);
    // IHDR immediately follows the signature
    EXPECT_EQ(std::string(a.begin() + 12, a.begin() + 16), "IHDR");
    EXPECT_EQ(std::string(a.end() - 8, a.end() - 4), "IEND");
}

TEST(Png, HeatmapRangeAndOrientation) {
    // two-column field: low at ip=0, high at ip=1; brighter pixels on top row
    const std::vector<double> v = {0.0, 1.0};
    const auto img = ckd::render_heatmap(v, 1, 2, 0.0, 1.0);
    ASSERT_EQ(img.width, 1u);
    ASSERT_EQ(img.height, 2u);
    const auto& cmap = ckd::cubehelix_table();
    EXPECT_EQ(img.rgb[0], cmap[255][0]);  // top row = highest P = value 1
    EXPECT_EQ(img.rgb[3], cmap[0][0]);
    EXPECT_THROW(ckd::render_heatmap(v, 1, 2, 0.0, 0.0), ckd::ConfigError);
}

TEST(Manifest, EntryHashesFileContents) {
    const auto d = temp_dir();
    ckd::write_text_file(d / "m.txt", "abc");
    const auto e = ckd::manifest_entry_for(d, "m.txt");
    EXPECT_EQ(e.path, "m.txt");
    EXPECT_EQ(e.bytes, 3u);
    EXPECT_EQ(e.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
