#include "pmt/pmt.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace pmt;

namespace {

DefocusSeries sample_series() {
    ImagingConfig c;
    c.aperture_mrad = 30.0;
    c.thermal_rms = 0.1;
    c.dose = 1e4;
    c.rng_seed = 42;
    DefocusSeries s(Grid3(3, 2, 0.1, 0.2, -0.5, 0.25, {0.0, 1.0, 2.5}), SeriesKind::intensity, c, 0.0, 7);
    for (std::size_t n = 0; n < s.values.size(); ++n) s.values.values[n] = 0.5 + 0.125 * static_cast<double>(n);
    return s;
}

}  // namespace

TEST(Dsf, RoundTripKeepsGridValuesAndMetadata) {
    const auto s = sample_series();
    const auto back = decode_dsf(encode_dsf(s));
    EXPECT_EQ(back.grid.nx(), 3u);
    EXPECT_EQ(back.grid.ny(), 2u);
    ASSERT_EQ(back.grid.nz(), 3u);
    EXPECT_DOUBLE_EQ(back.grid.y_step(), 0.2);
    EXPECT_DOUBLE_EQ(back.grid.x_min(), -0.5);
    EXPECT_DOUBLE_EQ(back.grid.z(2), 2.5);
    EXPECT_EQ(back.kind, SeriesKind::intensity);
    EXPECT_EQ(back.orientation_id, 7);
    EXPECT_EQ(back.config.rng_seed, 42u);
    ASSERT_TRUE(back.config.aperture_mrad.has_value());
    EXPECT_DOUBLE_EQ(*back.config.aperture_mrad, 30.0);
    ASSERT_TRUE(back.config.dose.has_value());
    EXPECT_DOUBLE_EQ(*back.config.dose, 1e4);
    EXPECT_DOUBLE_EQ(back.config.thermal_rms, 0.1);
    // Values are stored as float32; these are exactly representable.
    EXPECT_EQ(back.values.values, s.values.values);
    EXPECT_EQ(encode_dsf(back), encode_dsf(s));
}

TEST(Dsf, UnlimitedApertureAndNoiselessRoundTrip) {
    auto s = sample_series();
    s.config.aperture_mrad.reset();
    s.config.dose.reset();
    const auto bytes = encode_dsf(s);
    EXPECT_NE(bytes.find("aperture_mrad=unlimited"), std::string::npos);
    EXPECT_NE(bytes.find("dose=noiseless"), std::string::npos);
    const auto back = decode_dsf(bytes);
    EXPECT_FALSE(back.config.aperture_mrad.has_value());
    EXPECT_FALSE(back.config.dose.has_value());
}

TEST(Dsf, RejectsMalformedInput) {
    const auto good = encode_dsf(sample_series());
    EXPECT_THROW(decode_dsf("nx=1\nny=1\n"), ParseError);
    EXPECT_THROW(decode_dsf(good.substr(0, good.size() - 1)), ParseError);
    std::string no_kind = good;
    no_kind.replace(no_kind.find("kind=intensity"), 14, "kind=garbage00");
    EXPECT_THROW(decode_dsf(no_kind), ParseError);
    std::string bad_nz = good;
    bad_nz.replace(bad_nz.find("nz=3"), 4, "nz=4");
    EXPECT_THROW(decode_dsf(bad_nz), ParseError);
    std::string bad_line = "garbage\n" + good;
    EXPECT_THROW(decode_dsf(bad_line), ParseError);
}

TEST(Files, AtomicWriteAndReadBack) {
    const auto dir = std::filesystem::temp_directory_path() / "pmt_io_test";
    std::filesystem::remove_all(dir);
    const auto path = dir / "nested" / "series.dsf";
    const auto bytes = encode_dsf(sample_series());
    write_file_atomic(path, bytes);
    EXPECT_EQ(read_file(path), bytes);
    EXPECT_THROW(read_file(dir / "missing.dsf"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST(Pgm, SlicesAreNormalizedBinaryImages) {
    const auto s = sample_series();
    const auto xy = pgm_xy_slice(s, 1);
    const std::string header = "P5\n3 2\n255\n";
    ASSERT_EQ(xy.substr(0, header.size()), header);
    ASSERT_EQ(xy.size(), header.size() + 6);
    EXPECT_EQ(static_cast<unsigned char>(xy[header.size()]), 0);
    EXPECT_EQ(static_cast<unsigned char>(xy.back()), 255);
    const auto xz = pgm_xz_slice(s, 0);
    EXPECT_EQ(xz.substr(0, 11), "P5\n3 3\n255\n");
    const auto flat = encode_pgm({2.0, 2.0}, 2, 1);
    EXPECT_EQ(static_cast<unsigned char>(flat.back()), 0);
}
