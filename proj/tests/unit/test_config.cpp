#include "pmt/pmt.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace pmt;

TEST(Config, DefaultsFromAnEmptyObject) {
    const auto c = parse_config("{}");
    EXPECT_EQ(c.species_table, "default");
    EXPECT_DOUBLE_EQ(c.imaging.energy_keV, 200);
    EXPECT_DOUBLE_EQ(c.grid.cube_side, 10);
    EXPECT_EQ(c.grid.make().nz(), 11u);
    EXPECT_EQ(c.grid.make().nx(), 100u);
    EXPECT_EQ(c.orientations.size(), 1u);
    EXPECT_EQ(c.comparison, ComparisonMode::contrast_abs);
    EXPECT_EQ(c.evaluation.ignore_species, std::vector<std::string>{"H"});
}

TEST(Config, ReadsEverySection) {
    const auto c = parse_config(R"({
        "structure": "mol.xyz",
        "imaging": {"aperture_mrad": "unlimited", "dose": 5000, "thermal_rms": 0.2, "seed": 9,
                    "forward_method": "multislice", "slice_thickness": 0.5},
        "grid": {"cube_side": 30, "transverse_step": 0.2, "plane_step": 1},
        "template": {"side": 6, "transverse_halfwidth": 0.7, "axial_range": 12, "max_axial_halfwidth": "none"},
        "search": {"counts": {"S": 2, "C": 31}, "exclusion_radius": 1.5, "refine": true, "comparison": "intensity"},
        "orientations": [{"axis": [0, 2, 0], "angle_deg": -20}, {"axis": [0, 1, 0], "angle_deg": -45, "id": 5}],
        "merge": {"radius": 0.8, "cutoff": 0.4},
        "evaluation": {"max_distance": 1.5, "ignore_species": []}
    })",
                                "/base");
    EXPECT_FALSE(c.imaging.aperture_mrad.has_value());
    EXPECT_DOUBLE_EQ(*c.imaging.dose, 5000);
    EXPECT_EQ(c.imaging.rng_seed, 9u);
    EXPECT_EQ(c.imaging.forward_method, ForwardMethod::multislice);
    EXPECT_EQ(c.grid.make().nz(), 31u);
    EXPECT_FALSE(c.templates.max_axial_halfwidth.has_value());
    EXPECT_DOUBLE_EQ(c.template_side, 6);
    EXPECT_TRUE(c.refine);
    EXPECT_EQ(c.comparison, ComparisonMode::intensity);
    ASSERT_EQ(c.orientations.size(), 2u);
    EXPECT_DOUBLE_EQ(c.orientations[0].axis.y, 1.0);
    EXPECT_EQ(c.orientations[0].id, 0);
    EXPECT_EQ(c.orientations[1].id, 5);
    EXPECT_DOUBLE_EQ(c.merge.cutoff, 0.4);
    EXPECT_TRUE(c.evaluation.ignore_species.empty());
    EXPECT_EQ(c.resolve(c.structure), std::filesystem::path("/base/mol.xyz"));
    EXPECT_EQ(c.resolve("/abs.xyz"), std::filesystem::path("/abs.xyz"));

    const auto& table = default_species_table();
    const auto plan = c.plan(table);
    EXPECT_EQ(plan.counts[table.index_of("S")], 2u);
    EXPECT_EQ(plan.counts[table.index_of("C")], 31u);
    EXPECT_EQ(plan.counts[table.index_of("O")], 0u);
    EXPECT_DOUBLE_EQ(plan.exclusion_radius, 1.5);
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse_config("{"), ParseError);
    EXPECT_THROW(parse_config("[]"), ConfigError);
    EXPECT_THROW(parse_config(R"({"imaging": 3})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"imaging": {"energy_keV": "high"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"imaging": {"energy_keV": -1}})"), Error);
    EXPECT_THROW(parse_config(R"({"imaging": {"dose": "lots"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"merge": {"radius": 0}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"merge": {"cutoff": 2}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"search": {"comparison": "l1"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"orientations": [{"axis": [0, 0]}]})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"orientations": [{"axis": [0, 0, 0]}]})"), DomainError);
    EXPECT_THROW(parse_config(R"({"orientations": []})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"grid": {"transverse_step": 0}})"), ConfigError);
    const auto unknown = parse_config(R"({"search": {"counts": {"Xx": 1}}})");
    EXPECT_THROW(unknown.plan(default_species_table()), Error);
}

TEST(Config, ShippedConfigsLoad) {
    const std::filesystem::path dir = PMT_SOURCE_DIR "/configs";
    for (const char* name : {"aspartate_realistic.json", "aspartate_ideal.json", "synthetic_3orient.json"}) {
        const auto c = load_config(dir / name);
        EXPECT_TRUE(std::filesystem::exists(c.resolve(c.structure))) << name;
        EXPECT_NO_THROW(c.plan(c.load_species())) << name;
    }
    const auto s = load_config(dir / "synthetic_3orient.json");
    EXPECT_EQ(s.orientations.size(), 3u);
    EXPECT_EQ(s.grid.make().nz(), 31u);
}
